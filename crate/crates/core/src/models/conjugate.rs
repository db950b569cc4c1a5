//! Dirichlet prior, multinomial likelihood, Dirichlet variational family.
//! The posterior and the exact ELBO gradient are available in closed form.

use crate::distributions::{DirichletParams, SIMPLEX_TOLERANCE};
use crate::error::{Error, Result};
use crate::mathcore::{digamma_unchecked, ln_gamma, trigamma_unchecked};

use super::{simplex_pullback, Family, LatentBlock, ModelSpec};

#[derive(Debug, Clone)]
pub struct ConjugateModel {
    prior: Vec<f64>,
    counts: Vec<u64>,
    /// `prior + counts`, the posterior concentrations.
    posterior: Vec<f64>,
    log_const: f64,
    layout: Vec<LatentBlock>,
}

impl ConjugateModel {
    pub fn new(prior: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        let prior_params = DirichletParams::new(prior.clone())?;
        if counts.len() != prior.len() {
            return Err(Error::Contract(format!(
                "{} counts for {} categories",
                counts.len(),
                prior.len()
            )));
        }
        let n: u64 = counts.iter().sum();
        let log_const = ln_gamma(prior_params.total())
            - prior.iter().map(|&a| ln_gamma(a)).sum::<f64>()
            + ln_gamma(n as f64 + 1.0)
            - counts.iter().map(|&c| ln_gamma(c as f64 + 1.0)).sum::<f64>();
        let posterior = prior.iter().zip(&counts).map(|(a, &c)| a + c as f64).collect();
        let layout = vec![LatentBlock::new("z", Family::Dirichlet, prior.len())];
        Ok(Self {
            prior,
            counts,
            posterior,
            log_const,
            layout,
        })
    }

    /// Uniform prior `Dir(1, …, 1)`.
    pub fn with_uniform_prior(counts: Vec<u64>) -> Result<Self> {
        Self::new(vec![1.0; counts.len()], counts)
    }

    pub fn dim(&self) -> usize {
        self.prior.len()
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total_trials(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn posterior(&self) -> DirichletParams {
        DirichletParams::new(self.posterior.clone()).expect("posterior concentrations are positive")
    }

    /// `ln p(x)`.
    pub fn log_evidence(&self) -> f64 {
        let a0: f64 = self.posterior.iter().sum();
        self.log_const + self.posterior.iter().map(|&a| ln_gamma(a)).sum::<f64>() - ln_gamma(a0)
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Contract(format!(
                "expected {} simplex coordinates, got {}",
                self.dim(),
                z.len()
            )));
        }
        let s: f64 = z.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOLERANCE || z.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::domain(
                "conjugate_log_joint",
                format!("point must lie strictly inside the simplex (sum {s})"),
            ));
        }
        Ok(())
    }

    /// `f(z) = Σ (α⁰_k - 1 + n_k) ln z_k + const`.
    pub fn log_joint_at(&self, z: &[f64]) -> Result<f64> {
        self.check_point(z)?;
        Ok(self.log_const
            + self
                .posterior
                .iter()
                .zip(z)
                .map(|(a, zk)| (a - 1.0) * zk.ln())
                .sum::<f64>())
    }

    /// Gradient of `f(z̃ / Σ z̃)` with respect to positive unnormalized `z̃`.
    pub fn grad_unnormalized(&self, z_tilde: &[f64]) -> Result<Vec<f64>> {
        if z_tilde.len() != self.dim() || z_tilde.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain(
                "conjugate_grad",
                "unnormalized coordinates must be positive and match the dimension",
            ));
        }
        let total: f64 = z_tilde.iter().sum();
        let z: Vec<f64> = z_tilde.iter().map(|v| v / total).collect();
        let ambient: Vec<f64> = self.posterior.iter().zip(&z).map(|(a, zk)| (a - 1.0) / zk).collect();
        Ok(simplex_pullback(&z, &ambient, total))
    }

    /// ELBO at `q`, `ln p(x) - KL(q ‖ posterior)` evaluated directly.
    pub fn exact_elbo(&self, q: &DirichletParams) -> Result<f64> {
        self.check_q(q)?;
        let el = q.expected_log();
        Ok(self.log_const
            + self
                .posterior
                .iter()
                .zip(&el)
                .map(|(a, e)| (a - 1.0) * e)
                .sum::<f64>()
            + q.entropy())
    }

    /// `∇_θ L(θ) = (a_j - θ_j) ψ'(θ_j) - ψ'(θ₀) Σ_k (a_k - θ_k)` with `a`
    /// the posterior concentrations.
    pub fn exact_elbo_grad(&self, q: &DirichletParams) -> Result<Vec<f64>> {
        self.check_q(q)?;
        let theta = q.concentrations();
        let gap: f64 = self.posterior.iter().zip(theta).map(|(a, t)| a - t).sum();
        let common = trigamma_unchecked(q.total()) * gap;
        Ok(self
            .posterior
            .iter()
            .zip(theta)
            .map(|(a, &t)| (a - t) * trigamma_unchecked(t) - common)
            .collect())
    }

    fn check_q(&self, q: &DirichletParams) -> Result<()> {
        if q.dim() != self.dim() {
            return Err(Error::Contract(format!(
                "variational dimension {} does not match model dimension {}",
                q.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `E_q[ln z_k]` uses digamma; exposed for diagnostics.
    pub fn expected_log_joint(&self, q: &DirichletParams) -> Result<f64> {
        self.check_q(q)?;
        let psi0 = digamma_unchecked(q.total());
        Ok(self.log_const
            + self
                .posterior
                .iter()
                .zip(q.concentrations())
                .map(|(a, &t)| (a - 1.0) * (digamma_unchecked(t) - psi0))
                .sum::<f64>())
    }
}

impl ModelSpec for ConjugateModel {
    fn layout(&self) -> &[LatentBlock] {
        &self.layout
    }

    fn log_joint(&self, z: &[f64]) -> Result<f64> {
        self.log_joint_at(z)
    }

    fn grad_latents(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_point(z)?;
        Ok(self.posterior.iter().zip(z).map(|(a, zk)| (a - 1.0) / zk).collect())
    }
}

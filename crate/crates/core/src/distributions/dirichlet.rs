use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{digamma_unchecked, ln_gamma, trigamma_unchecked};

/// Points whose coordinates sum to 1 within this tolerance count as on the
/// simplex.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletParams {
    concentrations: Vec<f64>,
}

impl DirichletParams {
    pub fn new(concentrations: Vec<f64>) -> Result<Self> {
        if concentrations.len() < 2 {
            return Err(Error::domain(
                "DirichletParams",
                format!("need at least 2 components, got {}", concentrations.len()),
            ));
        }
        if let Some((k, a)) = concentrations
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > 0.0))
        {
            return Err(Error::domain(
                "DirichletParams",
                format!("concentration {k} must be positive and finite, got {a}"),
            ));
        }
        Ok(Self { concentrations })
    }

    pub fn concentrations(&self) -> &[f64] {
        &self.concentrations
    }

    pub fn dim(&self) -> usize {
        self.concentrations.len()
    }

    pub fn total(&self) -> f64 {
        self.concentrations.iter().sum()
    }

    pub fn mean(&self) -> Vec<f64> {
        let t = self.total();
        self.concentrations.iter().map(|a| a / t).collect()
    }

    /// `ln Γ(Σα) - Σ ln Γ(α_k)`.
    fn log_normalizer(&self) -> f64 {
        ln_gamma(self.total()) - self.concentrations.iter().map(|&a| ln_gamma(a)).sum::<f64>()
    }

    pub fn log_pdf(&self, z: &[f64]) -> Result<f64> {
        check_simplex(z, self.dim())?;
        if z.iter().any(|&v| v <= 0.0) {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.log_normalizer()
            + self
                .concentrations
                .iter()
                .zip(z)
                .map(|(a, zk)| (a - 1.0) * zk.ln())
                .sum::<f64>())
    }

    pub fn entropy(&self) -> f64 {
        let k = self.dim() as f64;
        let a0 = self.total();
        -self.log_normalizer() + (a0 - k) * digamma_unchecked(a0)
            - self
                .concentrations
                .iter()
                .map(|&a| (a - 1.0) * digamma_unchecked(a))
                .sum::<f64>()
    }

    /// `∂H/∂α_k = (α₀ - K) ψ'(α₀) - (α_k - 1) ψ'(α_k)`.
    pub fn entropy_grad(&self) -> Vec<f64> {
        let k = self.dim() as f64;
        let a0 = self.total();
        let common = (a0 - k) * trigamma_unchecked(a0);
        self.concentrations
            .iter()
            .map(|&a| common - (a - 1.0) * trigamma_unchecked(a))
            .collect()
    }

    /// `∂/∂α_k ln q(z) = ψ(α₀) - ψ(α_k) + ln z_k`.
    pub fn score(&self, z: &[f64]) -> Vec<f64> {
        let psi0 = digamma_unchecked(self.total());
        self.concentrations
            .iter()
            .zip(z)
            .map(|(&a, &zk)| psi0 - digamma_unchecked(a) + zk.ln())
            .collect()
    }

    /// `E_q[ln z_k] = ψ(α_k) - ψ(α₀)`.
    pub fn expected_log(&self) -> Vec<f64> {
        let psi0 = digamma_unchecked(self.total());
        self.concentrations
            .iter()
            .map(|&a| digamma_unchecked(a) - psi0)
            .collect()
    }

    /// `KL(self ‖ other)`.
    pub fn kl(&self, other: &DirichletParams) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Contract(format!(
                "dirichlet_kl dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let cross: f64 = self
            .concentrations
            .iter()
            .zip(&other.concentrations)
            .zip(self.expected_log())
            .map(|((p, q), el)| (p - q) * el)
            .sum();
        // Clamp tiny negative roundoff; KL is non-negative.
        Ok((self.log_normalizer() - other.log_normalizer() + cross).max(0.0))
    }
}

fn check_simplex(z: &[f64], dim: usize) -> Result<()> {
    if z.len() != dim {
        return Err(Error::Contract(format!(
            "simplex point has {} coordinates, expected {dim}",
            z.len()
        )));
    }
    let sum: f64 = z.iter().sum();
    if !((sum - 1.0).abs() <= SIMPLEX_TOLERANCE) || z.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::domain(
            "dirichlet_log_pdf",
            format!("point is off the simplex (sum {sum})"),
        ));
    }
    Ok(())
}

pub fn dirichlet_log_pdf(z: &[f64], p: &DirichletParams) -> Result<f64> {
    p.log_pdf(z)
}

pub fn dirichlet_entropy(p: &DirichletParams) -> f64 {
    p.entropy()
}

pub fn dirichlet_entropy_grad(p: &DirichletParams) -> Vec<f64> {
    p.entropy_grad()
}

pub fn dirichlet_kl(p: &DirichletParams, q: &DirichletParams) -> Result<f64> {
    p.kl(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::{finite_diff_grad, relative_error};

    #[test]
    fn kl_identity_is_zero() {
        let p = DirichletParams::new(vec![0.5, 2.0, 7.0]).unwrap();
        assert_eq!(dirichlet_kl(&p, &p).unwrap(), 0.0);
        let q = DirichletParams::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(dirichlet_kl(&p, &q).unwrap() > 0.0);
        assert!(dirichlet_kl(&q, &p).unwrap() > 0.0);
    }

    #[test]
    fn uniform_density_is_factorial() {
        for k in 2..7 {
            let p = DirichletParams::new(vec![1.0; k]).unwrap();
            let z = vec![1.0 / k as f64; k];
            let lp = dirichlet_log_pdf(&z, &p).unwrap();
            assert!((lp - ln_gamma(k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn off_simplex_rejected() {
        let p = DirichletParams::new(vec![1.0, 2.0]).unwrap();
        assert!(dirichlet_log_pdf(&[0.5, 0.6], &p).is_err());
        assert!(dirichlet_log_pdf(&[0.5, 0.5, 0.0], &p).is_err());
        assert_eq!(dirichlet_log_pdf(&[0.0, 1.0], &p).unwrap(), f64::NEG_INFINITY);
        assert!(DirichletParams::new(vec![1.0]).is_err());
        assert!(DirichletParams::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn beta_case_matches_closed_form_entropy() {
        // Beta(1,1) is uniform on [0,1]: entropy 0.
        let p = DirichletParams::new(vec![1.0, 1.0]).unwrap();
        assert!(p.entropy().abs() < 1e-14);
    }

    #[test]
    fn entropy_grad_matches_finite_differences() {
        let x = [2.0, 3.0, 4.0];
        let an = DirichletParams::new(x.to_vec()).unwrap().entropy_grad();
        let fd = finite_diff_grad(
            |a| DirichletParams::new(a.to_vec()).unwrap().entropy(),
            &x,
            1e-5,
        )
        .unwrap();
        for (a, f) in an.iter().zip(&fd) {
            assert!(relative_error(*a, *f, 1e-12) < 1e-6, "{an:?} vs {fd:?}");
        }
    }
}

//! Marsaglia–Tsang gamma sampler viewed as a reparameterized proposal.
//!
//! For shape `α ≥ 1` the proposal is `h(ε, α) = (α - 1/3)(1 + ε/√(9α-3))³`
//! with `ε ~ N(0, 1)`. Writing `d = α - 1/3` and `y = 1 + ε/√(9α-3)`, the
//! log ratio of target to proposal density at `h(ε, α)` splits into
//!
//! ```text
//! ln q(h)/r(h) = (α - ½) ln d - ln Γ(α) + ½ ln 2π  +  3d ln y - d y³ + ε²/2
//!                \_______ shape-only constant ______/  \____ reduced ____/
//! ```
//!
//! The acceptance test compares `ln u` against `reduced(ε) - max reduced`,
//! which equals `ln q/r - ln M` with the constant cancelled exactly.

use serde::{Deserialize, Serialize};

use crate::distributions::GammaParams;
use crate::error::{Error, Result};
use crate::mathcore::{digamma_unchecked, golden_section_max, ln_gamma, RandomStream};

pub const DEFAULT_TRIAL_BUDGET: u64 = 1_000_000;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;
const SEARCH_HALF_WIDTH: f64 = 40.0;
const SEARCH_TOLERANCE: f64 = 1e-10;

/// Shape-dependent quantities of the transform.
#[derive(Debug, Clone, Copy)]
struct Transform {
    alpha: f64,
    d: f64,
    root: f64,
}

impl Transform {
    fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::domain(
                "gamma transform",
                format!("shape must be finite and >= 1, got {alpha}"),
            ));
        }
        let d = alpha - 1.0 / 3.0;
        Ok(Self {
            alpha,
            d,
            root: (9.0 * alpha - 3.0).sqrt(),
        })
    }

    /// `1 + ε/√(9α-3)`, or `None` at or below the support boundary.
    #[inline]
    fn base(&self, eps: f64) -> Option<f64> {
        let y = 1.0 + eps / self.root;
        (y > 0.0).then_some(y)
    }

    fn checked_base(&self, eps: f64) -> Result<f64> {
        if !eps.is_finite() {
            return Err(Error::domain("gamma transform", format!("epsilon is {eps}")));
        }
        self.base(eps).ok_or(Error::OutsideSupport {
            epsilon: eps,
            shape: self.alpha,
        })
    }

    #[inline]
    fn h(&self, y: f64) -> f64 {
        self.d * y * y * y
    }

    #[inline]
    fn dh_deps(&self, y: f64) -> f64 {
        3.0 * self.d * y * y / self.root
    }

    #[inline]
    fn dh_dalpha(&self, eps: f64, y: f64) -> f64 {
        // d · 27 / (2 (9α-3)^{3/2}) simplifies to 3 / (2√(9α-3)).
        y * y * y - 1.5 * eps / self.root * y * y
    }

    #[inline]
    fn reduced(&self, eps: f64) -> f64 {
        match self.base(eps) {
            Some(y) => self.d * (3.0 * y.ln() - y * y * y) + 0.5 * eps * eps,
            None => f64::NEG_INFINITY,
        }
    }

    fn log_const(&self) -> f64 {
        (self.alpha - 0.5) * self.d.ln() - ln_gamma(self.alpha) + HALF_LN_2PI
    }

    /// `∂/∂α ln q(h(ε,α); α) + ∂/∂α ln |dh/dε|` given `ψ(α)`.
    #[inline]
    fn grad_log_ratio(&self, eps: f64, y: f64, digamma_alpha: f64) -> f64 {
        let h = self.h(y);
        let dh = self.dh_dalpha(eps, y);
        let log_q = h.ln() + (self.alpha - 1.0) * dh / h - dh - digamma_alpha;
        let r3 = self.root * self.root * self.root;
        let jacobian = 1.0 / (2.0 * self.d) - 9.0 * eps / (y * r3);
        log_q + jacobian
    }

    fn max_reduced(&self) -> Result<f64> {
        let lo = (-self.root * (1.0 - 1e-9)).max(-SEARCH_HALF_WIDTH);
        let (_, max) = golden_section_max(|e| self.reduced(e), lo, SEARCH_HALF_WIDTH, SEARCH_TOLERANCE)?;
        Ok(max)
    }
}

/// `h(ε, α) = (α - 1/3)(1 + ε/√(9α-3))³` for `α ≥ 1`.
///
/// Returns [`Error::OutsideSupport`] when `ε ≤ -√(9α-3)`.
pub fn h_gam(eps: f64, alpha: f64) -> Result<f64> {
    let t = Transform::new(alpha)?;
    let y = t.checked_base(eps)?;
    Ok(t.h(y))
}

pub fn dh_deps(eps: f64, alpha: f64) -> Result<f64> {
    let t = Transform::new(alpha)?;
    let y = t.checked_base(eps)?;
    Ok(t.dh_deps(y))
}

pub fn dh_dalpha(eps: f64, alpha: f64) -> Result<f64> {
    let t = Transform::new(alpha)?;
    let y = t.checked_base(eps)?;
    Ok(t.dh_dalpha(eps, y))
}

/// `ln q(h(ε,α); α, 1) + ln h'(ε) - ln s(ε)` with `s` the standard normal
/// density.
pub fn log_ratio_q_over_r(eps: f64, alpha: f64) -> Result<f64> {
    let t = Transform::new(alpha)?;
    t.checked_base(eps)?;
    Ok(t.log_const() + t.reduced(eps))
}

/// Log density of the accepted proposal, `ln s(ε) + ln q/r`.
pub fn accepted_eps_log_density(eps: f64, alpha: f64) -> Result<f64> {
    Ok(log_ratio_q_over_r(eps, alpha)? - 0.5 * eps * eps - HALF_LN_2PI)
}

/// `∂/∂α ln [q(h(ε,α); α) / r(h(ε,α); α)]`.
pub fn grad_log_ratio_gamma(eps: f64, alpha: f64) -> Result<f64> {
    let t = Transform::new(alpha)?;
    let y = t.checked_base(eps)?;
    Ok(t.grad_log_ratio(eps, y, digamma_unchecked(alpha)))
}

/// `ln M(α) = sup_ε ln q/r`, located by golden-section search.
pub fn envelope_log_m(alpha: f64) -> Result<f64> {
    let t = Transform::new(alpha)?;
    Ok(t.log_const() + t.max_reduced()?)
}

/// One accepted run of the rejection sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedDraw {
    pub epsilon: f64,
    /// Final variate with rate and augmentation applied.
    pub z: f64,
    /// Number of propose/test rounds, at least 1.
    pub trials: u64,
    /// Shape-augmentation uniforms `u_1..u_B`, each in `(0, 1)`.
    pub aug_uniforms: Vec<f64>,
}

/// Sampler for `Gam(α, β)` run at the effective shape `α + B ≥ 1`.
#[derive(Debug, Clone)]
pub struct GammaSampler {
    target: GammaParams,
    augmentation: usize,
    effective_shape: f64,
    log_m: f64,
    transform: Transform,
    reduced_max: f64,
    digamma_effective: f64,
    trial_budget: u64,
}

/// Build a sampler for `p` with `augmentation` shape-augmentation steps.
/// Shapes below 1 get at least one step so the transform is valid.
pub fn make_gamma_sampler(p: GammaParams, augmentation: usize) -> Result<GammaSampler> {
    GammaSampler::new(p, augmentation)
}

impl GammaSampler {
    pub fn new(target: GammaParams, augmentation: usize) -> Result<Self> {
        let augmentation = if target.shape() < 1.0 {
            augmentation.max(1)
        } else {
            augmentation
        };
        let effective_shape = target.shape() + augmentation as f64;
        let transform = Transform::new(effective_shape)?;
        let reduced_max = transform.max_reduced()?;
        Ok(Self {
            target,
            augmentation,
            effective_shape,
            log_m: transform.log_const() + reduced_max,
            transform,
            reduced_max,
            digamma_effective: digamma_unchecked(effective_shape),
            trial_budget: DEFAULT_TRIAL_BUDGET,
        })
    }

    pub fn with_trial_budget(mut self, budget: u64) -> Self {
        self.trial_budget = budget.max(1);
        self
    }

    pub fn target(&self) -> GammaParams {
        self.target
    }

    pub fn augmentation(&self) -> usize {
        self.augmentation
    }

    pub fn effective_shape(&self) -> f64 {
        self.effective_shape
    }

    pub fn log_m(&self) -> f64 {
        self.log_m
    }

    /// Expected acceptance probability `1/M`.
    pub fn acceptance_probability(&self) -> f64 {
        (-self.log_m).exp()
    }

    /// `ln q/r` at the effective shape; `-∞` outside the support.
    pub fn log_ratio(&self, eps: f64) -> f64 {
        self.transform.log_const() + self.transform.reduced(eps)
    }

    /// Log acceptance threshold `ln q/r - ln M`, never positive up to roundoff.
    pub fn log_acceptance(&self, eps: f64) -> f64 {
        self.transform.reduced(eps) - self.reduced_max
    }

    /// Gradient of the log ratio with respect to the target shape, at the
    /// effective shape. `-∞`-support proposals give an error.
    pub fn grad_log_ratio(&self, eps: f64) -> Result<f64> {
        let y = self.transform.checked_base(eps)?;
        Ok(self.transform.grad_log_ratio(eps, y, self.digamma_effective))
    }

    /// Unit-rate variate `h(ε, α+B) ∏ u_i^{1/(α+i-1)}`.
    pub fn unit_z(&self, eps: f64, aug_uniforms: &[f64]) -> Result<f64> {
        let y = self.transform.checked_base(eps)?;
        Ok(self.transform.h(y) * self.augmentation_product(aug_uniforms))
    }

    /// Rate-adjusted variate; the value stored in [`AcceptedDraw::z`].
    pub fn compose_z(&self, eps: f64, aug_uniforms: &[f64]) -> Result<f64> {
        Ok(self.unit_z(eps, aug_uniforms)? / self.target.rate())
    }

    fn augmentation_product(&self, aug_uniforms: &[f64]) -> f64 {
        let a = self.target.shape();
        aug_uniforms
            .iter()
            .enumerate()
            .map(|(i, u)| u.powf(1.0 / (a + i as f64)))
            .product()
    }

    /// Derivative of the unit-rate variate with respect to the target shape,
    /// including the path through the augmentation exponents.
    pub fn unit_z_dshape(&self, eps: f64, aug_uniforms: &[f64]) -> Result<f64> {
        let y = self.transform.checked_base(eps)?;
        let a = self.target.shape();
        let h = self.transform.h(y);
        let prod = self.augmentation_product(aug_uniforms);
        let exponent_path: f64 = aug_uniforms
            .iter()
            .enumerate()
            .map(|(i, u)| {
                let s = a + i as f64;
                -u.ln() / (s * s)
            })
            .sum();
        Ok(self.transform.dh_dalpha(eps, y) * prod + h * prod * exponent_path)
    }

    /// Run the propose/test loop; returns the accepted proposal and the
    /// composed variate.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<AcceptedDraw> {
        let eps = self.sample_eps(stream)?;
        let aug_uniforms: Vec<f64> = (0..self.augmentation)
            .map(|_| stream.draw_open_uniform())
            .collect();
        let z = self.compose_z(eps.0, &aug_uniforms)?;
        Ok(AcceptedDraw {
            epsilon: eps.0,
            z,
            trials: eps.1,
            aug_uniforms,
        })
    }

    /// Same draws as [`GammaSampler::sample`], returning only the unit-rate
    /// variate and the trial count, without allocating.
    pub fn sample_unit(&self, stream: &mut RandomStream) -> Result<(f64, u64)> {
        let (eps, trials) = self.sample_eps(stream)?;
        let y = self.transform.checked_base(eps)?;
        let a = self.target.shape();
        let mut prod = 1.0;
        for i in 0..self.augmentation {
            prod *= stream.draw_open_uniform().powf(1.0 / (a + i as f64));
        }
        Ok((self.transform.h(y) * prod, trials))
    }

    /// Accepted `ε` and the number of trials it took.
    pub fn sample_eps(&self, stream: &mut RandomStream) -> Result<(f64, u64)> {
        for trial in 1..=self.trial_budget {
            let eps = stream.draw_std_normal();
            let u = stream.draw_open_uniform();
            if u.ln() < self.log_acceptance(eps) {
                return Ok((eps, trial));
            }
        }
        Err(Error::SamplerStall {
            trials: self.trial_budget,
            shape: self.effective_shape,
            log_m: self.log_m,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathcore::{finite_diff_grad, relative_error};

    #[test]
    fn transform_plug_in() {
        assert!((h_gam(0.0, 2.0).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        // (5/3)(1 + 1/√15)³ = 3.319683214263268
        assert!((h_gam(1.0, 2.0).unwrap() - 3.319_683_214_263_268).abs() < 1e-13);
        assert!(matches!(
            h_gam(-6f64.sqrt(), 1.0),
            Err(Error::OutsideSupport { .. })
        ));
        assert!(matches!(h_gam(-3.0, 1.0), Err(Error::OutsideSupport { .. })));
        assert!(matches!(h_gam(0.0, 0.9), Err(Error::Domain { .. })));
    }

    #[test]
    fn derivative_plug_in() {
        for a in [1.0, 2.0, 7.5, 100.0] {
            assert!((dh_dalpha(0.0, a).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((dh_deps(0.0, 2.0).unwrap() - 5.0 / 15f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut s = RandomStream::new(17, 0);
        for _ in 0..50 {
            let a = 1.0 + 9.0 * s.draw_uniform();
            let e = -1.5 + 3.0 * s.draw_uniform();
            let fd = finite_diff_grad(|x| h_gam(x[0], x[1]).unwrap(), &[e, a], 1e-6).unwrap();
            assert!(relative_error(dh_deps(e, a).unwrap(), fd[0], 1e-8) < 1e-6);
            assert!(relative_error(dh_dalpha(e, a).unwrap(), fd[1], 1e-8) < 1e-6);
        }
    }

    #[test]
    fn log_ratio_matches_direct_definition() {
        // Independent route: gamma log density + log Jacobian - log normal density.
        for &a in &[1.0, 2.0, 10.0, 55.5] {
            for &e in &[-1.5, -0.2, 0.0, 0.7, 2.5] {
                let h = h_gam(e, a).unwrap();
                let q = GammaParams::new(a, 1.0).unwrap().log_pdf(h);
                let direct = q + dh_deps(e, a).unwrap().ln() + 0.5 * e * e + HALF_LN_2PI;
                let got = log_ratio_q_over_r(e, a).unwrap();
                assert!((got - direct).abs() < 1e-11, "a={a} e={e}: {got} vs {direct}");
            }
        }
    }

    #[test]
    fn envelope_matches_closed_form_maximum() {
        // The reduced log ratio peaks at ε = 0 with value -d.
        for &a in &[1.0, 2.0, 5.0, 10.0, 1e4] {
            let t = Transform::new(a).unwrap();
            let closed = t.log_const() - t.d;
            // The terms being summed are of size d, so rounding scales with d.
            assert!((envelope_log_m(a).unwrap() - closed).abs() < 1e-12 * t.d.max(1.0));
        }
    }

    #[test]
    fn acceptance_probabilities() {
        let p = |a: f64| (-envelope_log_m(a).unwrap()).exp();
        assert!((p(2.0) - 0.98).abs() < 0.005);
        assert!(p(1.0) >= 0.95);
        assert!(p(1e4) >= 0.999);
    }

    #[test]
    fn sampler_construction() {
        let s = make_gamma_sampler(GammaParams::new(0.1, 1.0).unwrap(), 0).unwrap();
        assert_eq!(s.augmentation(), 1);
        assert!((s.effective_shape() - 1.1).abs() < 1e-15);
        let s = make_gamma_sampler(GammaParams::new(2.0, 1.0).unwrap(), 4).unwrap();
        assert_eq!(s.effective_shape(), 6.0);
        assert_eq!(s.augmentation(), 4);
    }

    #[test]
    fn draws_are_recomputable() {
        let s = make_gamma_sampler(GammaParams::new(0.4, 2.5).unwrap(), 3).unwrap();
        let mut st = RandomStream::new(5, 5);
        for _ in 0..1000 {
            let d = s.sample(&mut st).unwrap();
            assert!(d.trials >= 1);
            assert_eq!(d.aug_uniforms.len(), 3);
            assert!(d.aug_uniforms.iter().all(|u| *u > 0.0 && *u < 1.0));
            let z = s.compose_z(d.epsilon, &d.aug_uniforms).unwrap();
            assert_eq!(z.to_bits(), d.z.to_bits());
        }
        let mut a = RandomStream::new(8, 1);
        let mut b = a.clone();
        for _ in 0..100 {
            let full = s.sample(&mut a).unwrap();
            let (unit, trials) = s.sample_unit(&mut b).unwrap();
            assert_eq!((unit / 2.5).to_bits(), full.z.to_bits());
            assert_eq!(trials, full.trials);
        }
    }

    #[test]
    fn stall_is_reported() {
        // A budget of one trial eventually rejects.
        let s = make_gamma_sampler(GammaParams::new(1.0, 1.0).unwrap(), 0)
            .unwrap()
            .with_trial_budget(1);
        let mut st = RandomStream::new(0, 0);
        let stalled = (0..1000).any(|_| matches!(s.sample(&mut st), Err(Error::SamplerStall { .. })));
        assert!(stalled);
    }

    #[test]
    fn unit_z_dshape_matches_finite_differences() {
        let eps = 0.37;
        let aug = [0.3, 0.8, 0.55];
        for &a in &[0.3, 1.0, 2.7] {
            let an = make_gamma_sampler(GammaParams::new(a, 1.0).unwrap(), 3)
                .unwrap()
                .unit_z_dshape(eps, &aug)
                .unwrap();
            let fd = finite_diff_grad(
                |x| {
                    make_gamma_sampler(GammaParams::new(x[0], 1.0).unwrap(), 3)
                        .unwrap()
                        .unit_z(eps, &aug)
                        .unwrap()
                },
                &[a],
                1e-6,
            )
            .unwrap();
            assert!(relative_error(an, fd[0], 1e-8) < 1e-6, "a={a}: {an} vs {}", fd[0]);
        }
    }
}

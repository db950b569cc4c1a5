//! Two more proposal transforms from the rejection-sampling literature.
//! Only the transforms and density hooks are provided; there is no tuned
//! envelope or accept/reject loop for these.

use crate::error::{Error, Result};
use crate::mathcore::std_normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtraFamily {
    /// Standard normal truncated to `[a, ∞)`, proposal `ε ~ U(0, 1]`.
    TruncatedNormalTail { a: f64 },
    /// Von Mises with concentration `κ`, proposal `ε ~ U[-1, 1]`.
    VonMises { kappa: f64 },
}

impl ExtraFamily {
    fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            ExtraFamily::TruncatedNormalTail { a } => ("a", a),
            ExtraFamily::VonMises { kappa } => ("kappa", kappa),
        };
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::domain("extras_transform", format!("{name} must be positive, got {v}")))
        }
    }

    /// Apply the proposal transform.
    ///
    /// Truncated normal tail: `√(a² - 2 ln ε)`.
    ///
    /// Von Mises (Best–Fisher wrapped-Cauchy form): with
    /// `τ = 1 + √(1 + 4κ²)`, `ρ = (τ - √(2τ)) / 2κ`, `c = (1 + ρ²) / 2ρ`,
    /// `f = (1 + c cos πε) / (c + cos πε)`, the angle is `sign(ε) arccos f`.
    pub fn transform(&self, eps: f64) -> Result<f64> {
        self.validate()?;
        match *self {
            ExtraFamily::TruncatedNormalTail { a } => {
                if !(eps > 0.0 && eps <= 1.0) {
                    return Err(Error::domain("extras_transform", format!("ε must be in (0, 1], got {eps}")));
                }
                Ok((a * a - 2.0 * eps.ln()).sqrt())
            }
            ExtraFamily::VonMises { kappa } => {
                if !(-1.0..=1.0).contains(&eps) {
                    return Err(Error::domain("extras_transform", format!("ε must be in [-1, 1], got {eps}")));
                }
                let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
                let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
                let c = (1.0 + rho * rho) / (2.0 * rho);
                let w = (std::f64::consts::PI * eps).cos();
                let f = ((1.0 + c * w) / (c + w)).clamp(-1.0, 1.0);
                Ok(eps.signum() * f.acos())
            }
        }
    }

    /// Log density of the target at `x`. The von Mises value omits the
    /// `-ln(2π I₀(κ))` normalizer.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            ExtraFamily::TruncatedNormalTail { a } => {
                if x < a {
                    f64::NEG_INFINITY
                } else {
                    let tail = 1.0 - std_normal_cdf(a);
                    -0.5 * x * x - 0.918_938_533_204_672_8 - tail.ln()
                }
            }
            ExtraFamily::VonMises { kappa } => {
                if x.abs() > std::f64::consts::PI {
                    f64::NEG_INFINITY
                } else {
                    kappa * x.cos()
                }
            }
        })
    }
}

pub fn extras_transform(family: ExtraFamily, eps: f64) -> Result<f64> {
    family.transform(eps)
}

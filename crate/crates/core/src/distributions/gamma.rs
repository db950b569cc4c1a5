use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{digamma_unchecked, ln_gamma, trigamma_unchecked};

fn positive(what: &'static str, name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(what, format!("{name} must be positive and finite, got {v}")))
    }
}

/// Gamma distribution in shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    shape: f64,
    rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        positive("GammaParams", "shape", shape)?;
        positive("GammaParams", "rate", rate)?;
        Ok(Self { shape, rate })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn log_pdf(&self, z: f64) -> f64 {
        if !(z > 0.0) {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * z.ln() - self.rate * z + self.shape * self.rate.ln()
            - ln_gamma(self.shape)
    }

    pub fn entropy(&self) -> f64 {
        let a = self.shape;
        a - self.rate.ln() + ln_gamma(a) + (1.0 - a) * digamma_unchecked(a)
    }

    /// `(∂H/∂shape, ∂H/∂rate)`.
    pub fn entropy_grad(&self) -> (f64, f64) {
        let a = self.shape;
        (1.0 + (1.0 - a) * trigamma_unchecked(a), -1.0 / self.rate)
    }

    /// `(∂/∂shape, ∂/∂rate) ln q(z)`.
    pub fn score(&self, z: f64) -> (f64, f64) {
        let a = self.shape;
        let b = self.rate;
        (b.ln() - digamma_unchecked(a) + z.ln(), a / b - z)
    }
}

pub fn gamma_log_pdf(z: f64, p: &GammaParams) -> f64 {
    p.log_pdf(z)
}

pub fn gamma_entropy(p: &GammaParams) -> f64 {
    p.entropy()
}

pub fn gamma_entropy_grad(p: &GammaParams) -> (f64, f64) {
    p.entropy_grad()
}

/// Gamma distribution in shape/mean form; the rate is `shape / mean`.
///
/// Kept separate from [`GammaParams`] because gradients with respect to the
/// mean hold the shape fixed while moving the rate, which is a different
/// chain rule from the shape/rate form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaMeanShapeParams {
    shape: f64,
    mean: f64,
}

impl GammaMeanShapeParams {
    pub fn new(shape: f64, mean: f64) -> Result<Self> {
        positive("GammaMeanShapeParams", "shape", shape)?;
        positive("GammaMeanShapeParams", "mean", mean)?;
        Ok(Self { shape, mean })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn rate(&self) -> f64 {
        self.shape / self.mean
    }

    pub fn to_shape_rate(&self) -> GammaParams {
        GammaParams {
            shape: self.shape,
            rate: self.rate(),
        }
    }

    pub fn log_pdf(&self, z: f64) -> f64 {
        self.to_shape_rate().log_pdf(z)
    }

    pub fn entropy(&self) -> f64 {
        self.to_shape_rate().entropy()
    }

    /// `(∂H/∂shape, ∂H/∂mean)` with the other coordinate held fixed.
    pub fn entropy_grad(&self) -> (f64, f64) {
        let a = self.shape;
        (
            1.0 - 1.0 / a + (1.0 - a) * trigamma_unchecked(a),
            1.0 / self.mean,
        )
    }

    /// `(∂/∂shape, ∂/∂mean) ln q(z)` with the other coordinate held fixed.
    pub fn score(&self, z: f64) -> (f64, f64) {
        let a = self.shape;
        let m = self.mean;
        let rate = a / m;
        (
            rate.ln() + 1.0 - digamma_unchecked(a) + z.ln() - z / m,
            -a / m + a * z / (m * m),
        )
    }
}

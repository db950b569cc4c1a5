//! Softplus map between unconstrained and positive parameters.

use crate::error::{Error, Result};

/// `ln(1 + e^x)`, without overflow for large `x`. Never returns 0 for finite
/// input: deep in the left tail the result is clamped to the smallest
/// positive normal number.
pub fn softplus(x: f64) -> f64 {
    let y = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
    y.max(f64::MIN_POSITIVE)
}

/// Inverse of [`softplus`]: `ln(e^θ - 1)`.
pub fn softplus_inv(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain("softplus_inv", format!("argument must be positive and finite, got {theta}")));
    }
    // For large θ, ln(e^θ - 1) = θ + ln(1 - e^-θ).
    Ok(if theta > 30.0 {
        theta + (-(-theta).exp()).ln_1p()
    } else {
        theta.exp_m1().ln()
    })
}

/// `dθ/dϑ = sigmoid(ϑ)`, the diagonal of the softplus Jacobian.
pub fn softplus_jacobian(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn softplus_vec(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| softplus(v)).collect()
}

pub fn softplus_inv_vec(theta: &[f64]) -> Result<Vec<f64>> {
    theta.iter().map(|&v| softplus_inv(v)).collect()
}

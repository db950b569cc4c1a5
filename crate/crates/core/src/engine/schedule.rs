//! Adaptive step size mixing rmsprop-style averaging with a decaying
//! Adagrad-style schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DELTA: f64 = 1e-16;
pub const DEFAULT_SMOOTHING: f64 = 0.1;

/// `ρⁿ = η n^{-1/2+δ} / (1 + √sⁿ)` with `sⁿ = t (ĝⁿ)² + (1 - t) s^{n-1}`.
///
/// The recursion needs an `s⁰` that is never specified; the first step uses
/// `s¹ = (ĝ¹)²` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerState {
    /// Index of the next step, starting at 1.
    pub iteration: u64,
    pub s: Vec<f64>,
    pub eta: f64,
    pub delta: f64,
    pub smoothing: f64,
}

impl OptimizerState {
    pub fn new(dim: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::domain("step size", format!("eta must be positive, got {eta}")));
        }
        Ok(Self {
            iteration: 1,
            s: vec![0.0; dim],
            eta,
            delta: DEFAULT_DELTA,
            smoothing: DEFAULT_SMOOTHING,
        })
    }

    /// Step sizes for gradient `g` and the state after this step. `self` is
    /// untouched, so a rejected gradient leaves no trace.
    pub fn step_size(&self, g: &[f64]) -> Result<(Vec<f64>, OptimizerState)> {
        if g.len() != self.s.len() {
            return Err(Error::Contract(format!(
                "gradient has {} coordinates, state has {}",
                g.len(),
                self.s.len()
            )));
        }
        if let Some(i) = g.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "gradient",
                coordinate: Some(i),
                value: g[i],
            });
        }
        let n = self.iteration;
        let t = self.smoothing;
        let s: Vec<f64> = if n == 1 {
            g.iter().map(|v| v * v).collect()
        } else {
            self.s.iter().zip(g).map(|(s, v)| t * v * v + (1.0 - t) * s).collect()
        };
        let decay = self.eta * (n as f64).powf(-0.5 + self.delta);
        let rho = s.iter().map(|s| decay / (1.0 + s.sqrt())).collect();
        let next = OptimizerState {
            iteration: n + 1,
            s,
            ..self.clone()
        };
        Ok((rho, next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step() {
        let st = OptimizerState::new(1, 1.0).unwrap();
        let (rho, next) = st.step_size(&[3.0]).unwrap();
        assert_eq!(rho, vec![0.25]);
        assert_eq!(next.s, vec![9.0]);
        assert_eq!(next.iteration, 2);
    }

    #[test]
    fn zero_gradient_is_pure_decay() {
        let mut st = OptimizerState::new(2, 2.0).unwrap();
        for n in 1..=50u64 {
            let (rho, next) = st.step_size(&[0.0, 0.0]).unwrap();
            let expect = 2.0 * (n as f64).powf(-0.5 + DEFAULT_DELTA);
            assert!(rho.iter().all(|r| (r - expect).abs() < 1e-15));
            assert!(next.s.iter().all(|s| *s == 0.0));
            st = next;
        }
    }

    #[test]
    fn non_finite_gradient_rejected() {
        let st = OptimizerState::new(2, 1.0).unwrap();
        assert!(st.step_size(&[1.0, f64::NAN]).is_err());
        assert!(st.step_size(&[1.0]).is_err());
        assert!(OptimizerState::new(1, 0.0).is_err());
    }

    #[test]
    fn bounded_gradient_decays_like_inverse_sqrt() {
        let mut st = OptimizerState::new(1, 1.0).unwrap();
        let mut last = 0.0;
        for _ in 0..10_000 {
            let (rho, next) = st.step_size(&[1.0]).unwrap();
            last = rho[0];
            st = next;
        }
        // s → 1, so ρ ≈ 0.5 / √n.
        assert!((last * 100.0 - 0.5).abs() < 1e-3, "{last}");
    }
}

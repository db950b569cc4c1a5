//! Target models and the contract estimators consume.

mod conjugate;
mod def;
mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{finite_diff_grad_relative, relative_error, RandomStream};

pub use conjugate::ConjugateModel;
pub use def::{CountMatrix, DefHyperparameters, SparseGammaDef, POISSON_RATE_FLOOR};
pub use synthetic::{make_synthetic_def_data, SyntheticDef, SyntheticOptions};

/// Variational family attached to a latent block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `dim` independent gammas, each with parameters `(shape, mean)`.
    GammaMeanShape,
    /// One Dirichlet over `dim` coordinates with `dim` concentrations.
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentBlock {
    pub name: String,
    pub family: Family,
    pub dim: usize,
}

impl LatentBlock {
    pub fn new(name: impl Into<String>, family: Family, dim: usize) -> Self {
        Self {
            name: name.into(),
            family,
            dim,
        }
    }

    pub fn param_len(&self) -> usize {
        match self.family {
            Family::GammaMeanShape => 2 * self.dim,
            Family::Dirichlet => self.dim,
        }
    }
}

/// Number of latent values in a layout.
pub fn latent_len(layout: &[LatentBlock]) -> usize {
    layout.iter().map(|b| b.dim).sum()
}

/// Number of variational parameters in a layout. Gamma blocks store
/// `(shape, mean)` pairs per latent; Dirichlet blocks one concentration per
/// coordinate.
pub fn param_len(layout: &[LatentBlock]) -> usize {
    layout.iter().map(LatentBlock::param_len).sum()
}

/// Human-readable name of every variational parameter, in vector order.
pub fn param_names(layout: &[LatentBlock]) -> Vec<String> {
    let mut names = Vec::with_capacity(param_len(layout));
    for b in layout {
        for i in 0..b.dim {
            match b.family {
                Family::GammaMeanShape => {
                    names.push(format!("{}[{i}].shape", b.name));
                    names.push(format!("{}[{i}].mean", b.name));
                }
                Family::Dirichlet => names.push(format!("{}[{i}].concentration", b.name)),
            }
        }
    }
    names
}

/// A model's log joint `f(z) = ln p(x, z)` and its gradient in the latents.
///
/// Latents are passed flattened in layout order. Dirichlet blocks receive a
/// point on the simplex; their gradient is the ambient gradient of a smooth
/// extension of `f` (only its tangential part matters).
pub trait ModelSpec: Sync {
    fn layout(&self) -> &[LatentBlock];

    fn log_joint(&self, z: &[f64]) -> Result<f64>;

    fn grad_latents(&self, z: &[f64]) -> Result<Vec<f64>>;

    fn log_joint_and_grad(&self, z: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.log_joint(z)?, self.grad_latents(z)?))
    }
}

/// Gradient with respect to unnormalized gammas `z̃` of `f(z̃ / Σ z̃)`, given
/// the simplex point and the ambient gradient there.
pub fn simplex_pullback(point: &[f64], ambient_grad: &[f64], total: f64) -> Vec<f64> {
    let proj: f64 = point.iter().zip(ambient_grad).map(|(z, g)| z * g).sum();
    ambient_grad.iter().map(|g| (g - proj) / total).collect()
}

/// Outcome of [`gradient_self_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfCheckReport {
    pub points: usize,
    pub max_relative_error: f64,
    pub worst_coordinate: usize,
    pub passed: bool,
}

/// Compare `grad_latents` with central finite differences of `log_joint` at
/// `points` random interior points.
///
/// Gamma latents are drawn log-uniformly in `[e^-1.5, e^1.5]`. Dirichlet
/// blocks are checked through unnormalized coordinates `z̃`, differentiating
/// `f(z̃ / Σ z̃)` and comparing against [`simplex_pullback`].
pub fn gradient_self_check<M: ModelSpec + ?Sized>(
    model: &M,
    points: usize,
    tolerance: f64,
    stream: &mut RandomStream,
) -> Result<SelfCheckReport> {
    let layout = model.layout();
    let n = latent_len(layout);
    let mut max_err: f64 = 0.0;
    let mut worst = 0;
    for _ in 0..points {
        let raw: Vec<f64> = (0..n).map(|_| (3.0 * stream.draw_uniform() - 1.5).exp()).collect();
        let to_latents = |raw: &[f64]| -> Vec<f64> {
            let mut z = raw.to_vec();
            let mut off = 0;
            for b in layout {
                if b.family == Family::Dirichlet {
                    let s: f64 = raw[off..off + b.dim].iter().sum();
                    for v in &mut z[off..off + b.dim] {
                        *v /= s;
                    }
                }
                off += b.dim;
            }
            z
        };
        let z = to_latents(&raw);
        let mut analytic = model.grad_latents(&z)?;
        let mut off = 0;
        for b in layout {
            if b.family == Family::Dirichlet {
                let s: f64 = raw[off..off + b.dim].iter().sum();
                let pulled = simplex_pullback(&z[off..off + b.dim], &analytic[off..off + b.dim], s);
                analytic[off..off + b.dim].copy_from_slice(&pulled);
            }
            off += b.dim;
        }
        let numeric = finite_diff_grad_relative(
            |r| model.log_joint(&to_latents(r)).unwrap_or(f64::NAN),
            &raw,
            1e-5,
        )?;
        for (i, (a, f)) in analytic.iter().zip(&numeric).enumerate() {
            let e = relative_error(*a, *f, 1e-3);
            if e > max_err || e.is_nan() {
                max_err = if e.is_nan() { f64::INFINITY } else { e };
                worst = i;
            }
        }
    }
    Ok(SelfCheckReport {
        points,
        max_relative_error: max_err,
        worst_coordinate: worst,
        passed: max_err <= tolerance,
    })
}

pub(crate) fn check_latent_len(layout: &[LatentBlock], z: &[f64]) -> Result<()> {
    let n = latent_len(layout);
    if z.len() != n {
        return Err(Error::Contract(format!("expected {n} latent values, got {}", z.len())));
    }
    Ok(())
}

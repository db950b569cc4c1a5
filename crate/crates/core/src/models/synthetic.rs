//! Ancestral sampling from the sparse gamma DEF, used as desk-scale data.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::distributions::GammaParams;
use crate::error::{Error, Result};
use crate::mathcore::RandomStream;
use crate::rejection::{make_gamma_sampler, GammaSampler};

use super::{CountMatrix, DefHyperparameters, SparseGammaDef, POISSON_RATE_FLOOR};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticOptions {
    pub layer_sizes: Vec<usize>,
    pub n_obs: usize,
    pub dim: usize,
    pub hyper: DefHyperparameters,
    /// Replace every sampled weight by 0. Rates then fall below the floor and
    /// every count is 0.
    pub zero_weights: bool,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        Self {
            layer_sizes: SparseGammaDef::DEFAULT_LAYERS.to_vec(),
            n_obs: 50,
            dim: 20,
            hyper: DefHyperparameters::default(),
            zero_weights: false,
        }
    }
}

/// Generated counts together with the latents that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDef {
    pub counts: CountMatrix,
    /// `z^l`, row-major `n_obs × K_l`.
    pub z_layers: Vec<Vec<f64>>,
    /// `w^l` in the layout used by [`SparseGammaDef`].
    pub weights: Vec<Vec<f64>>,
}

/// One sampler per distinct shape; rates are applied by division.
fn unit_sampler(shape: f64) -> Result<GammaSampler> {
    make_gamma_sampler(GammaParams::new(shape, 1.0)?, 0)
}

fn draw(s: &GammaSampler, rate: f64, stream: &mut RandomStream) -> Result<f64> {
    Ok(s.sample(stream)?.z / rate)
}

pub fn make_synthetic_def_data(opts: &SyntheticOptions, stream: &mut RandomStream) -> Result<SyntheticDef> {
    opts.hyper.validate()?;
    let sizes = &opts.layer_sizes;
    if sizes.is_empty() || sizes.contains(&0) || opts.n_obs == 0 || opts.dim == 0 {
        return Err(Error::domain(
            "make_synthetic_def_data",
            "layer sizes, observation count and dimension must be ≥ 1",
        ));
    }
    let h = &opts.hyper;
    let nl = sizes.len();
    let n = opts.n_obs;

    let weight_s = unit_sampler(h.weight_shape)?;
    let mut weights = Vec::with_capacity(nl);
    for l in 0..nl {
        let len = if l == 0 { sizes[0] * opts.dim } else { sizes[l - 1] * sizes[l] };
        let mut w = Vec::with_capacity(len);
        for _ in 0..len {
            let v = draw(&weight_s, h.weight_rate, stream)?;
            w.push(if opts.zero_weights { 0.0 } else { v });
        }
        weights.push(w);
    }

    let mut z_layers = vec![Vec::new(); nl];
    let top_s = unit_sampler(h.top_shape)?;
    z_layers[nl - 1] = (0..n * sizes[nl - 1])
        .map(|_| draw(&top_s, h.top_rate, stream))
        .collect::<Result<_>>()?;
    let cond_s = unit_sampler(h.alpha_z)?;
    for l in (0..nl - 1).rev() {
        let (kc, kp) = (sizes[l], sizes[l + 1]);
        let mut layer = Vec::with_capacity(n * kc);
        for i in 0..n {
            for k in 0..kc {
                let m: f64 = (0..kp).map(|j| weights[l + 1][k * kp + j] * z_layers[l + 1][i * kp + j]).sum();
                // Gam(α_z, α_z / m) has mean m; m = 0 collapses to a point mass at 0.
                layer.push(if m > 0.0 { draw(&cond_s, h.alpha_z / m, stream)? } else { 0.0 });
            }
        }
        z_layers[l] = layer;
    }

    let k0 = sizes[0];
    let mut counts = Vec::with_capacity(n * opts.dim);
    for i in 0..n {
        for d in 0..opts.dim {
            let rate: f64 = (0..k0).map(|k| weights[0][k * opts.dim + d] * z_layers[0][i * k0 + k]).sum();
            let x = if rate <= POISSON_RATE_FLOOR {
                0
            } else {
                let p = Poisson::new(rate)
                    .map_err(|e| Error::domain("make_synthetic_def_data", format!("Poisson rate {rate}: {e}")))?;
                let v: f64 = p.sample(stream);
                v as u64
            };
            counts.push(x);
        }
    }
    Ok(SyntheticDef {
        counts: CountMatrix::new(n, opts.dim, counts)?,
        z_layers,
        weights,
    })
}

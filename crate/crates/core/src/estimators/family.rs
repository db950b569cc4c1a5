//! The mean-field variational family for a model layout, prepared once per
//! parameter vector.

use crate::distributions::{DirichletParams, GammaMeanShapeParams, GammaParams};
use crate::error::{Error, Result};
use crate::mathcore::RandomStream;
use crate::models::{latent_len, param_len, Family, LatentBlock};
use crate::rejection::{make_gamma_sampler, GammaSampler};

#[derive(Debug, Clone)]
pub(crate) enum Factor {
    Gamma {
        params: GammaMeanShapeParams,
        /// Unit-rate sampler at the factor's shape.
        sampler: GammaSampler,
    },
    Dirichlet {
        params: DirichletParams,
        /// One unit-rate sampler per coordinate.
        samplers: Vec<GammaSampler>,
    },
}

#[derive(Debug, Clone)]
pub(crate) struct Slot {
    pub factor: Factor,
    pub latent_offset: usize,
    pub param_offset: usize,
}

/// `q(z; θ)` for every latent in a layout.
///
/// Gamma blocks read `θ` as interleaved `(shape, mean)` pairs; Dirichlet
/// blocks read one concentration per coordinate. Building the family runs
/// the envelope search for every sampler, so reuse it across draws.
#[derive(Debug, Clone)]
pub struct VariationalFamily {
    slots: Vec<Slot>,
    latent_len: usize,
    param_len: usize,
    augmentation: usize,
}

fn unit_sampler(shape: f64, augmentation: usize) -> Result<GammaSampler> {
    make_gamma_sampler(GammaParams::new(shape, 1.0)?, augmentation)
}

impl VariationalFamily {
    pub fn new(layout: &[LatentBlock], theta: &[f64], augmentation: usize) -> Result<Self> {
        let plen = param_len(layout);
        if theta.len() != plen {
            return Err(Error::Contract(format!(
                "expected {plen} variational parameters, got {}",
                theta.len()
            )));
        }
        if let Some(i) = theta.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain(
                "variational parameters",
                format!("parameter {i} must be positive and finite, got {}", theta[i]),
            ));
        }
        let mut slots = Vec::new();
        let (mut lo, mut po) = (0, 0);
        for block in layout {
            match block.family {
                Family::GammaMeanShape => {
                    for i in 0..block.dim {
                        let params = GammaMeanShapeParams::new(theta[po + 2 * i], theta[po + 2 * i + 1])?;
                        slots.push(Slot {
                            factor: Factor::Gamma {
                                sampler: unit_sampler(params.shape(), augmentation)?,
                                params,
                            },
                            latent_offset: lo + i,
                            param_offset: po + 2 * i,
                        });
                    }
                }
                Family::Dirichlet => {
                    let params = DirichletParams::new(theta[po..po + block.dim].to_vec())?;
                    let samplers = params
                        .concentrations()
                        .iter()
                        .map(|&a| unit_sampler(a, augmentation))
                        .collect::<Result<_>>()?;
                    slots.push(Slot {
                        factor: Factor::Dirichlet { params, samplers },
                        latent_offset: lo,
                        param_offset: po,
                    });
                }
            }
            lo += block.dim;
            po += block.param_len();
        }
        Ok(Self {
            slots,
            latent_len: latent_len(layout),
            param_len: plen,
            augmentation,
        })
    }

    pub(crate) fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn latent_len(&self) -> usize {
        self.latent_len
    }

    pub fn param_len(&self) -> usize {
        self.param_len
    }

    /// Requested augmentation; shapes below 1 may use more.
    pub fn augmentation(&self) -> usize {
        self.augmentation
    }

    pub fn entropy(&self) -> f64 {
        self.slots
            .iter()
            .map(|s| match &s.factor {
                Factor::Gamma { params, .. } => params.entropy(),
                Factor::Dirichlet { params, .. } => params.entropy(),
            })
            .sum()
    }

    pub fn entropy_grad(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.param_len];
        for s in &self.slots {
            match &s.factor {
                Factor::Gamma { params, .. } => {
                    let (da, dm) = params.entropy_grad();
                    g[s.param_offset] = da;
                    g[s.param_offset + 1] = dm;
                }
                Factor::Dirichlet { params, .. } => {
                    let d = params.entropy_grad();
                    g[s.param_offset..s.param_offset + d.len()].copy_from_slice(&d);
                }
            }
        }
        g
    }

    /// `Σ ln q(z)` over all factors.
    pub fn log_density(&self, z: &[f64]) -> Result<f64> {
        self.check_latents(z)?;
        let mut total = 0.0;
        for s in &self.slots {
            total += match &s.factor {
                Factor::Gamma { params, .. } => params.log_pdf(z[s.latent_offset]),
                Factor::Dirichlet { params, .. } => {
                    params.log_pdf(&z[s.latent_offset..s.latent_offset + params.dim()])?
                }
            };
        }
        Ok(total)
    }

    /// `∇_θ ln q(z; θ)`.
    pub fn score(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_latents(z)?;
        let mut g = vec![0.0; self.param_len];
        for s in &self.slots {
            match &s.factor {
                Factor::Gamma { params, .. } => {
                    let (da, dm) = params.score(z[s.latent_offset]);
                    g[s.param_offset] = da;
                    g[s.param_offset + 1] = dm;
                }
                Factor::Dirichlet { params, .. } => {
                    let d = params.score(&z[s.latent_offset..s.latent_offset + params.dim()]);
                    g[s.param_offset..s.param_offset + d.len()].copy_from_slice(&d);
                }
            }
        }
        Ok(g)
    }

    /// One exact draw of all latents; returns the latents and the total
    /// number of sampler trials used.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<(Vec<f64>, u64)> {
        let mut z = vec![0.0; self.latent_len];
        let mut trials = 0;
        for s in &self.slots {
            match &s.factor {
                Factor::Gamma { params, sampler } => {
                    let (unit, t) = sampler.sample_unit(stream)?;
                    trials += t;
                    z[s.latent_offset] = floor_latent(unit / params.rate());
                }
                Factor::Dirichlet { samplers, .. } => {
                    let block = &mut z[s.latent_offset..s.latent_offset + samplers.len()];
                    for (v, sampler) in block.iter_mut().zip(samplers) {
                        let (unit, t) = sampler.sample_unit(stream)?;
                        trials += t;
                        *v = floor_latent(unit);
                    }
                    let total: f64 = block.iter().sum();
                    block.iter_mut().for_each(|v| *v /= total);
                }
            }
        }
        Ok((z, trials))
    }

    fn check_latents(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.latent_len {
            return Err(Error::Contract(format!(
                "expected {} latents, got {}",
                self.latent_len,
                z.len()
            )));
        }
        Ok(())
    }
}

/// Draws with tiny shapes can underflow to 0, which no model accepts; such
/// draws are raised to the smallest normal float. The path derivatives are
/// left as computed (they underflow with the draw).
pub(crate) fn floor_latent(z: f64) -> f64 {
    z.max(f64::MIN_POSITIVE)
}

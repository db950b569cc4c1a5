use crate::distributions::{DirichletParams, GammaParams};
use crate::error::Result;
use crate::mathcore::RandomStream;

use super::{make_gamma_sampler, AcceptedDraw, GammaSampler};

/// Dirichlet draws as normalized independent unit-rate gammas, one
/// reparameterized sampler per coordinate.
#[derive(Debug, Clone)]
pub struct DirichletSampler {
    coordinates: Vec<GammaSampler>,
}

impl DirichletSampler {
    pub fn new(p: &DirichletParams, augmentation: usize) -> Result<Self> {
        let coordinates = p
            .concentrations()
            .iter()
            .map(|&a| make_gamma_sampler(GammaParams::new(a, 1.0)?, augmentation))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coordinates })
    }

    pub fn coordinates(&self) -> &[GammaSampler] {
        &self.coordinates
    }

    /// Per-coordinate accepted draws (whose `z` are the unnormalized gammas)
    /// and the simplex point.
    pub fn sample(&self, stream: &mut RandomStream) -> Result<(Vec<AcceptedDraw>, Vec<f64>)> {
        let draws = self
            .coordinates
            .iter()
            .map(|s| s.sample(stream))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = draws.iter().map(|d| d.z).sum();
        let point = draws.iter().map(|d| d.z / total).collect();
        Ok((draws, point))
    }
}

pub fn sample_dirichlet_eps(
    p: &DirichletParams,
    augmentation: usize,
    stream: &mut RandomStream,
) -> Result<(Vec<AcceptedDraw>, Vec<f64>)> {
    DirichletSampler::new(p, augmentation)?.sample(stream)
}

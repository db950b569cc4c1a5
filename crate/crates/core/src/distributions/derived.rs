//! Distributions obtained as deterministic functions of auxiliary gamma
//! (and, for Student-t, normal) draws. These are samplers only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::RandomStream;
use crate::rejection::make_gamma_sampler;

use super::GammaParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum DerivedFamily {
    Beta { a: f64, b: f64 },
    Dirichlet { concentrations: Vec<f64> },
    StudentT { nu: f64 },
    ChiSquared { k: f64 },
    FDist { d1: f64, d2: f64 },
    Nakagami { m: f64, omega: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum DerivedValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl DerivedValue {
    pub fn scalar(&self) -> Option<f64> {
        match self {
            DerivedValue::Scalar(x) => Some(*x),
            DerivedValue::Vector(_) => None,
        }
    }
}

impl DerivedFamily {
    /// Unit-rate gamma shapes of the auxiliary draws, in the order
    /// [`DerivedFamily::transform`] expects them.
    pub fn aux_gamma_shapes(&self) -> Vec<f64> {
        match self {
            DerivedFamily::Beta { a, b } => vec![*a, *b],
            DerivedFamily::Dirichlet { concentrations } => concentrations.clone(),
            DerivedFamily::StudentT { nu } => vec![nu / 2.0],
            DerivedFamily::ChiSquared { k } => vec![k / 2.0],
            DerivedFamily::FDist { d1, d2 } => vec![d1 / 2.0, d2 / 2.0],
            DerivedFamily::Nakagami { m, .. } => vec![*m],
        }
    }

    /// Student-t takes one standard normal after its gamma draw.
    pub fn needs_normal(&self) -> bool {
        matches!(self, DerivedFamily::StudentT { .. })
    }

    fn aux_len(&self) -> usize {
        self.aux_gamma_shapes().len() + usize::from(self.needs_normal())
    }

    fn validate(&self) -> Result<()> {
        let params: Vec<f64> = match self {
            DerivedFamily::Beta { a, b } => vec![*a, *b],
            DerivedFamily::Dirichlet { concentrations } => {
                if concentrations.len() < 2 {
                    return Err(Error::domain("derived_transform", "dirichlet needs K >= 2"));
                }
                concentrations.clone()
            }
            DerivedFamily::StudentT { nu } => vec![*nu],
            DerivedFamily::ChiSquared { k } => vec![*k],
            DerivedFamily::FDist { d1, d2 } => vec![*d1, *d2],
            DerivedFamily::Nakagami { m, omega } => vec![*m, *omega],
        };
        match params.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            Some(p) => Err(Error::domain(
                "derived_transform",
                format!("parameters must be positive, got {p}"),
            )),
            None => Ok(()),
        }
    }

    /// Map auxiliary draws to a draw of the family.
    pub fn transform(&self, aux: &[f64]) -> Result<DerivedValue> {
        self.validate()?;
        if aux.len() != self.aux_len() {
            return Err(Error::Contract(format!(
                "{self:?} expects {} auxiliary draws, got {}",
                self.aux_len(),
                aux.len()
            )));
        }
        let v = match self {
            DerivedFamily::Beta { .. } => DerivedValue::Scalar(aux[0] / (aux[0] + aux[1])),
            DerivedFamily::Dirichlet { .. } => {
                let s: f64 = aux.iter().sum();
                DerivedValue::Vector(aux.iter().map(|x| x / s).collect())
            }
            DerivedFamily::StudentT { nu } => {
                DerivedValue::Scalar((nu / (2.0 * aux[0])).sqrt() * aux[1])
            }
            DerivedFamily::ChiSquared { .. } => DerivedValue::Scalar(2.0 * aux[0]),
            DerivedFamily::FDist { d1, d2 } => DerivedValue::Scalar(d2 * aux[0] / (d1 * aux[1])),
            DerivedFamily::Nakagami { m, omega } => DerivedValue::Scalar((omega * aux[0] / m).sqrt()),
        };
        Ok(v)
    }

    /// Draw the auxiliary variables with the reparameterized gamma sampler
    /// (using `augmentation` shape-augmentation steps) and transform them.
    pub fn sample(&self, augmentation: usize, stream: &mut RandomStream) -> Result<DerivedValue> {
        self.validate()?;
        let mut aux = Vec::with_capacity(self.aux_len());
        for shape in self.aux_gamma_shapes() {
            let sampler = make_gamma_sampler(GammaParams::new(shape, 1.0)?, augmentation)?;
            aux.push(sampler.sample(stream)?.z);
        }
        if self.needs_normal() {
            aux.push(stream.draw_std_normal());
        }
        self.transform(&aux)
    }
}

pub fn derived_transform(family: &DerivedFamily, aux: &[f64]) -> Result<DerivedValue> {
    family.transform(aux)
}

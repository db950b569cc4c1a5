//! Variational families and the gamma-derived distributions.

mod derived;
mod dirichlet;
mod gamma;

pub use derived::{derived_transform, DerivedFamily, DerivedValue};
pub use dirichlet::{
    dirichlet_entropy, dirichlet_entropy_grad, dirichlet_kl, dirichlet_log_pdf, DirichletParams,
    SIMPLEX_TOLERANCE,
};
pub use gamma::{gamma_entropy, gamma_entropy_grad, gamma_log_pdf, GammaMeanShapeParams, GammaParams};

//! Reparameterized rejection sampling.
//!
//! The sampler returns the accepted proposal `ε` rather than only the final
//! variate, so gradients can flow through the proposal transform `h(ε, θ)`
//! while the accept step is integrated out analytically.

mod dirichlet;
mod extras;
mod gamma;

pub use dirichlet::{sample_dirichlet_eps, DirichletSampler};
pub use extras::{extras_transform, ExtraFamily};
pub use gamma::{
    accepted_eps_log_density, dh_dalpha, dh_deps, envelope_log_m, grad_log_ratio_gamma, h_gam,
    log_ratio_q_over_r, make_gamma_sampler, AcceptedDraw, GammaSampler, DEFAULT_TRIAL_BUDGET,
};

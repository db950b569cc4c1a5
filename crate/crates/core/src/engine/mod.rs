//! Optimization of the variational parameters.

mod run;
mod schedule;
mod transform;

pub use run::{
    default_initialization, estimate_elbo, run_rsvi, RunConfig, RunOutcome, RunStatus, TraceRecord,
    OPTIMIZATION_STREAM, TRACE_STREAM,
};
pub use schedule::{OptimizerState, DEFAULT_DELTA, DEFAULT_SMOOTHING};
pub use transform::{softplus, softplus_inv, softplus_inv_vec, softplus_jacobian, softplus_vec};

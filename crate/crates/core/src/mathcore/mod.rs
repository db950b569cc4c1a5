//! Numerical building blocks shared by every other module.

mod numdiff;
mod random;
mod special;
mod stats;

pub use numdiff::{finite_diff_grad, finite_diff_grad_relative, golden_section_max, relative_error};
pub use random::RandomStream;
pub use special::{
    digamma, ln_gamma, log_gamma_fn, regularized_gamma_p, regularized_gamma_q, std_normal_cdf,
    trigamma,
};
pub(crate) use special::{digamma_unchecked, trigamma_unchecked};
pub use stats::{ks_critical_value, ks_statistic, mean_and_std_error, sample_variance};

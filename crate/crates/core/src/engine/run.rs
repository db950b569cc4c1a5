//! The optimization loop.

use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{estimate_with_family, EstimatorConfig, VariationalFamily};
use crate::mathcore::RandomStream;
use crate::models::{param_len, Family, LatentBlock, ModelSpec};
use crate::par::{try_map_indexed, Execution};

use super::schedule::OptimizerState;
use super::transform::{softplus, softplus_inv_vec, softplus_jacobian};

/// Child index of the run stream feeding gradient estimates.
pub const OPTIMIZATION_STREAM: u64 = 0;
/// Child index of the run stream feeding ELBO trace draws.
pub const TRACE_STREAM: u64 = 1;

const MAX_CONSECUTIVE_FAILURES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub estimator: EstimatorConfig,
    pub eta: f64,
    pub max_iters: u64,
    /// Fresh draws behind each traced ELBO value.
    pub elbo_draws: usize,
    /// Stop once the relative change between consecutive ELBO windows drops
    /// below this; `None` always runs to `max_iters`.
    pub stop_tolerance: Option<f64>,
    pub stop_window: usize,
    pub exec: Execution,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            eta: 1.0,
            max_iters: 1000,
            elbo_draws: 100,
            stop_tolerance: Some(1e-6),
            stop_window: 200,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: u64,
    /// ELBO at the parameters after this iteration's update.
    pub elbo: f64,
    pub step_size_norm: f64,
    /// Norm of the gradient in unconstrained coordinates.
    pub grad_norm: f64,
    pub acceptance_rate: Option<f64>,
    /// Cumulative seconds spent estimating gradients and updating.
    pub wall_clock_s: f64,
    /// Cumulative seconds spent estimating traced ELBO values.
    pub trace_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Converged,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub theta: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    pub status: RunStatus,
    pub failures: u64,
    /// The error behind an abort.
    pub last_error: Option<String>,
}

/// Shapes 0.5 and means 1.0 for gamma blocks, concentrations 1.0 for
/// Dirichlet blocks.
pub fn default_initialization(layout: &[LatentBlock]) -> Vec<f64> {
    let mut theta = Vec::with_capacity(param_len(layout));
    for b in layout {
        for _ in 0..b.dim {
            match b.family {
                Family::GammaMeanShape => theta.extend([0.5, 1.0]),
                Family::Dirichlet => theta.push(1.0),
            }
        }
    }
    theta
}

/// Monte Carlo ELBO `mean f(z) + H[q]`. Draw `i` uses `stream.child(i)`;
/// the sum runs in index order whatever the execution mode.
pub fn estimate_elbo<M: ModelSpec + ?Sized>(
    model: &M,
    family: &VariationalFamily,
    draws: usize,
    stream: &RandomStream,
    exec: Execution,
) -> Result<f64> {
    if draws == 0 {
        return Err(Error::Contract("ELBO needs at least one draw".into()));
    }
    let values = try_map_indexed(exec, draws, |i| {
        let (z, _) = family.sample(&mut stream.child(i as u64))?;
        model.log_joint(&z)
    })?;
    let mean = values.iter().sum::<f64>() / draws as f64;
    let elbo = mean + family.entropy();
    if !elbo.is_finite() {
        return Err(Error::NonFinite {
            what: "ELBO estimate",
            coordinate: None,
            value: elbo,
        });
    }
    Ok(elbo)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn window_converged(trace: &[TraceRecord], window: usize, tol: f64) -> bool {
    let n = trace.len();
    if window == 0 || n < 2 * window {
        return false;
    }
    let mean = |s: &[TraceRecord]| s.iter().map(|r| r.elbo).sum::<f64>() / s.len() as f64;
    let prev = mean(&trace[n - 2 * window..n - window]);
    let cur = mean(&trace[n - window..]);
    (cur - prev) / prev.abs().max(f64::MIN_POSITIVE) < tol
}

/// Stochastic gradient ascent on the ELBO in softplus coordinates.
///
/// Iteration `n` estimates the gradient with `stream.child(OPTIMIZATION_STREAM).child(n)`
/// and traces the ELBO with `stream.child(TRACE_STREAM).child(n)`, so the
/// trace never reuses optimization draws.
pub fn run_rsvi<M: ModelSpec + ?Sized>(
    model: &M,
    theta_init: &[f64],
    cfg: &RunConfig,
    stream: &RandomStream,
) -> Result<RunOutcome> {
    cfg.estimator.validate()?;
    let layout = model.layout();
    let dim = param_len(layout);
    if theta_init.len() != dim {
        return Err(Error::Contract(format!(
            "initialization has {} parameters, model needs {dim}",
            theta_init.len()
        )));
    }
    if cfg.elbo_draws == 0 {
        return Err(Error::Contract("elbo_draws must be at least 1".into()));
    }
    // Validates positivity up front.
    let mut family = VariationalFamily::new(layout, theta_init, cfg.estimator.augmentation)?;
    let mut vartheta = softplus_inv_vec(theta_init)?;
    let mut theta = theta_init.to_vec();
    let mut state = OptimizerState::new(dim, cfg.eta)?;
    let opt_stream = stream.child(OPTIMIZATION_STREAM);
    let trace_stream = stream.child(TRACE_STREAM);

    let mut trace: Vec<TraceRecord> = Vec::new();
    let (mut opt_s, mut trace_s) = (0.0, 0.0);
    let mut consecutive = 0;
    let mut failures = 0;
    let mut status = RunStatus::Completed;
    let mut last_error = None;

    for n in 1..=cfg.max_iters {
        let started = Instant::now();
        let attempt = (|| -> Result<_> {
            let est = estimate_with_family(model, &family, &cfg.estimator, &mut opt_stream.child(n))?;
            let g: Vec<f64> = est.total.iter().zip(&vartheta).map(|(g, v)| g * softplus_jacobian(*v)).collect();
            let (rho, next) = state.step_size(&g)?;
            // Ascent: ϑ ← ϑ + ρ ⊙ ĝ.
            let new_vartheta: Vec<f64> = vartheta.iter().zip(&rho).zip(&g).map(|((v, r), g)| v + r * g).collect();
            let new_theta: Vec<f64> = new_vartheta.iter().map(|&v| softplus(v)).collect();
            let new_family = VariationalFamily::new(layout, &new_theta, cfg.estimator.augmentation)?;
            Ok((est, g, rho, next, new_vartheta, new_theta, new_family))
        })();
        opt_s += started.elapsed().as_secs_f64();

        let (est, g, rho, next, new_vartheta, new_theta, new_family) = match attempt {
            Ok(v) => v,
            Err(e) => {
                failures += 1;
                consecutive += 1;
                warn!("iteration {n}: gradient step failed: {e}");
                if consecutive >= MAX_CONSECUTIVE_FAILURES {
                    status = RunStatus::Aborted;
                    last_error = Some(e.to_string());
                    break;
                }
                continue;
            }
        };
        debug_assert!(new_theta.iter().all(|t| *t > 0.0));
        state = next;
        vartheta = new_vartheta;
        theta = new_theta;
        family = new_family;

        let started = Instant::now();
        let elbo = estimate_elbo(model, &family, cfg.elbo_draws, &trace_stream.child(n), cfg.exec);
        trace_s += started.elapsed().as_secs_f64();
        match elbo {
            Ok(elbo) => {
                consecutive = 0;
                trace.push(TraceRecord {
                    iteration: n,
                    elbo,
                    step_size_norm: norm(&rho),
                    grad_norm: norm(&g),
                    acceptance_rate: est.meta.acceptance_rate(),
                    wall_clock_s: opt_s,
                    trace_s,
                });
            }
            Err(e) => {
                failures += 1;
                consecutive += 1;
                warn!("iteration {n}: ELBO estimate failed: {e}");
                if consecutive >= MAX_CONSECUTIVE_FAILURES {
                    status = RunStatus::Aborted;
                    last_error = Some(e.to_string());
                    break;
                }
                continue;
            }
        }
        if let Some(tol) = cfg.stop_tolerance {
            if window_converged(&trace, cfg.stop_window, tol) {
                status = RunStatus::Converged;
                break;
            }
        }
    }
    Ok(RunOutcome {
        theta,
        trace,
        status,
        failures,
        last_error,
    })
}

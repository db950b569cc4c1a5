use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use rsvi::distributions::DirichletParams;
use rsvi::engine::{default_initialization, run_rsvi, softplus_inv, RunConfig, RunOutcome, RunStatus};
use rsvi::estimators::EstimatorConfig;
use rsvi::mathcore::RandomStream;
use rsvi::models::param_names;
use rsvi::par::Execution;

use crate::cli::{Command, FitArgs};
use crate::failure::Failure;
use crate::output::{config_json, csv_config_line, emit};
use crate::setup::{build_model, BuiltModel};

/// Moving-average window and span of the smoothed-ELBO stability report.
const SMOOTH_WINDOW: usize = 100;
const SMOOTH_SPAN: usize = 1000;

#[derive(Serialize)]
struct TraceLine {
    iteration: u64,
    elbo: f64,
    step_size_norm: f64,
    grad_norm: f64,
    acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_s: Option<f64>,
}

/// Number of decreases of the `SMOOTH_WINDOW`-iteration moving average over
/// the final `SMOOTH_SPAN` iterations; `None` for shorter traces.
pub fn smoothed_decreases(elbo: &[f64]) -> Option<usize> {
    if elbo.len() < SMOOTH_WINDOW + SMOOTH_SPAN {
        return None;
    }
    let ma: Vec<f64> = elbo.windows(SMOOTH_WINDOW).map(|w| w.iter().sum::<f64>() / SMOOTH_WINDOW as f64).collect();
    Some(ma[ma.len() - SMOOTH_SPAN - 1..].windows(2).filter(|w| w[1] < w[0]).count())
}

fn summary(outcome: &RunOutcome, built: &BuiltModel) -> Result<serde_json::Value, Failure> {
    let elbo: Vec<f64> = outcome.trace.iter().map(|r| r.elbo).collect();
    let mut s = json!({
        "status": outcome.status,
        "records": outcome.trace.len(),
        "failures": outcome.failures,
        "final_elbo": elbo.last(),
    });
    if let Some(e) = &outcome.last_error {
        s["last_error"] = json!(e);
    }
    if let Some(m) = built.conjugate() {
        let q = DirichletParams::new(outcome.theta.clone())?;
        s["kl_to_posterior"] = json!(q.kl(&m.posterior())?);
        s["log_evidence"] = json!(m.log_evidence());
    }
    if let Some(d) = smoothed_decreases(&elbo) {
        s["smoothed_elbo"] = json!({
            "window": SMOOTH_WINDOW,
            "span": SMOOTH_SPAN,
            "decreasing_steps": d,
            "non_decreasing": d == 0,
        });
    }
    Ok(s)
}

pub fn run(args: &FitArgs, command: &Command) -> Result<(), Failure> {
    if !(args.stop_tolerance >= 0.0) {
        return Err(Failure::Config("stop-tolerance must be non-negative".into()));
    }
    let seed = args.seed.seed;
    let built = build_model(&args.model, seed)?;
    let model = built.spec();
    let theta_init = args.theta_init.clone().unwrap_or_else(|| default_initialization(model.layout()));
    let cfg = RunConfig {
        estimator: EstimatorConfig::new(args.estimator.into(), args.augmentation, args.draws)?,
        eta: args.eta,
        max_iters: args.iterations,
        elbo_draws: args.elbo_draws,
        stop_tolerance: (args.stop_tolerance > 0.0).then_some(args.stop_tolerance),
        stop_window: args.stop_window,
        exec: if args.sequential { Execution::Sequential } else { Execution::Parallel },
    };
    let outcome = run_rsvi(model, &theta_init, &cfg, &RandomStream::new(seed, 0))?;

    let mut trace = format!("{{\"config\":{}}}\n", config_json(command));
    for r in &outcome.trace {
        let line = TraceLine {
            iteration: r.iteration,
            elbo: r.elbo,
            step_size_norm: r.step_size_norm,
            grad_norm: r.grad_norm,
            acceptance_rate: r.acceptance_rate,
            wall_clock_s: args.timing.then_some(r.wall_clock_s),
            trace_s: args.timing.then_some(r.trace_s),
        };
        trace.push_str(&serde_json::to_string(&line).expect("trace serializes"));
        trace.push('\n');
    }
    let summary = summary(&outcome, &built)?;
    writeln!(trace, "{}", json!({ "summary": summary })).unwrap();
    emit(Some(&args.out), trace.as_bytes())?;

    let params_path = args.params.clone().unwrap_or_else(|| {
        let mut p: PathBuf = args.out.clone().into_os_string().into();
        p.as_mut_os_string().push(".params.csv");
        p
    });
    let mut params = csv_config_line(command);
    params.push_str("name,unconstrained,constrained\n");
    for (name, t) in param_names(model.layout()).iter().zip(&outcome.theta) {
        writeln!(params, "{name},{},{t}", softplus_inv(*t)?).unwrap();
    }
    writeln!(params, "# summary: {summary}").unwrap();
    emit(Some(&params_path), params.as_bytes())?;

    println!("{summary}");
    match outcome.status {
        RunStatus::Aborted => Err(Failure::Abort(outcome.last_error.unwrap_or_default())),
        _ => Ok(()),
    }
}

use std::fmt::Write as _;

use rsvi::engine::default_initialization;
use rsvi::estimators::{variance_profile, EstimatorConfig};
use rsvi::mathcore::RandomStream;
use rsvi::par::Execution;

use crate::cli::{Command, EstimatorArg, VarianceArgs};
use crate::failure::Failure;
use crate::output::{csv_config_line, emit};
use crate::setup::build_model;

pub fn run(args: &VarianceArgs, command: &Command) -> Result<(), Failure> {
    if args.replicates < 2 {
        return Err(Failure::Config(format!("replicates must be at least 2, got {}", args.replicates)));
    }
    if args.estimators.is_empty() || args.augmentations.is_empty() {
        return Err(Failure::Config("need at least one estimator and one augmentation".into()));
    }
    let built = build_model(&args.model, args.seed.seed)?;
    let model = built.spec();
    let theta = args.theta.clone().unwrap_or_else(|| default_initialization(model.layout()));
    let exec = if args.sequential { Execution::Sequential } else { Execution::Parallel };

    // Augmentation only changes the score-function estimator's sampler, not
    // its value distribution, so it gets a single row.
    let mut rows = Vec::new();
    for &e in &args.estimators {
        match e {
            EstimatorArg::ScoreFunction => rows.push((e, 0)),
            _ => rows.extend(args.augmentations.iter().map(|&b| (e, b))),
        }
    }
    let root = RandomStream::new(args.seed.seed, 0);
    let mut out = csv_config_line(command);
    out.push_str("estimator,augmentation,replicates,min,median,max\n");
    for (i, &(e, b)) in rows.iter().enumerate() {
        let cfg = EstimatorConfig::new(e.into(), b, args.draws)?;
        let p = variance_profile(model, &theta, &cfg, args.replicates, &root.child(i as u64), exec)?;
        writeln!(out, "{},{b},{},{:e},{:e},{:e}", cfg.kind.label(), p.replicates, p.min, p.median, p.max).unwrap();
    }
    writeln!(out, "# summary: rows={} parameters={}", rows.len(), theta.len()).unwrap();
    emit(args.out.as_deref(), out.as_bytes())
}

use std::fmt::Write as _;

use rsvi::distributions::GammaParams;
use rsvi::mathcore::{ks_statistic, regularized_gamma_p, RandomStream};
use rsvi::rejection::make_gamma_sampler;

use crate::cli::{Command, Distribution, SampleArgs};
use crate::failure::Failure;
use crate::output::{csv_config_line, emit};

pub fn run(args: &SampleArgs, command: &Command) -> Result<(), Failure> {
    let Distribution::Gamma = args.distribution;
    let target = GammaParams::new(args.shape, args.rate)?;
    let mut sampler = make_gamma_sampler(target, args.augmentation)?;
    if let Some(b) = args.trial_budget {
        if b == 0 {
            return Err(Failure::Config("trial-budget must be at least 1".into()));
        }
        sampler = sampler.with_trial_budget(b);
    }
    let mut stream = RandomStream::new(args.seed.seed, 0);
    let mut out = csv_config_line(command);
    out.push_str("epsilon,z,trials\n");
    let mut zs = Vec::with_capacity(args.draws);
    let mut trials = 0u64;
    for _ in 0..args.draws {
        let d = sampler.sample(&mut stream)?;
        writeln!(out, "{},{},{}", d.epsilon, d.z, d.trials).unwrap();
        trials += d.trials;
        zs.push(d.z);
    }
    let summary = if zs.is_empty() {
        "no draws".to_string()
    } else {
        let (a, b) = (target.shape(), target.rate());
        let ks = ks_statistic(&mut zs, |z| if z <= 0.0 { 0.0 } else { regularized_gamma_p(a, b * z).unwrap_or(f64::NAN) });
        format!(
            "draws={} trials={trials} acceptance_rate={} ks_statistic={ks}",
            args.draws,
            args.draws as f64 / trials as f64
        )
    };
    writeln!(out, "# summary: {summary}").unwrap();
    emit(args.out.as_deref(), out.as_bytes())?;
    if args.out.is_some() {
        println!("{summary}");
    }
    Ok(())
}

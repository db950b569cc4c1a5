//! Replicated estimates and per-parameter variance summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mathcore::{sample_variance, RandomStream};
use crate::models::ModelSpec;
use crate::par::{try_map_indexed, Execution};

use super::{estimate_with_family, EstimatorConfig, GradientEstimate, VariationalFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceProfile {
    pub label: String,
    pub replicates: usize,
    /// Unbiased sample variance of `total`, per parameter.
    pub variances: Vec<f64>,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// `replicates` independent estimates; replicate `i` uses `stream.child(i)`,
/// so results do not depend on the execution mode.
pub fn replicate_estimates<M: ModelSpec + ?Sized>(
    model: &M,
    theta: &[f64],
    cfg: &EstimatorConfig,
    replicates: usize,
    stream: &RandomStream,
    exec: Execution,
) -> Result<Vec<GradientEstimate>> {
    cfg.validate()?;
    let family = VariationalFamily::new(model.layout(), theta, cfg.augmentation)?;
    try_map_indexed(exec, replicates, |i| {
        let mut s = stream.child(i as u64);
        estimate_with_family(model, &family, cfg, &mut s)
    })
}

pub fn variance_profile<M: ModelSpec + ?Sized>(
    model: &M,
    theta: &[f64],
    cfg: &EstimatorConfig,
    replicates: usize,
    stream: &RandomStream,
    exec: Execution,
) -> Result<VarianceProfile> {
    if replicates < 2 {
        return Err(Error::Contract(format!(
            "variance needs at least 2 replicates, got {replicates}"
        )));
    }
    let estimates = replicate_estimates(model, theta, cfg, replicates, stream, exec)?;
    let n = theta.len();
    let variances: Vec<f64> = (0..n)
        .map(|j| {
            let col: Vec<f64> = estimates.iter().map(|e| e.total[j]).collect();
            sample_variance(&col)
        })
        .collect();
    let label = match cfg.kind {
        super::EstimatorKind::Rsvi => format!("rsvi(B={})", cfg.augmentation),
        k => k.label().to_string(),
    };
    summarize_variances(label, replicates, variances)
}

/// Min, median and max of per-parameter variances. An even count takes the
/// mean of the two middle values.
pub fn summarize_variances(label: String, replicates: usize, variances: Vec<f64>) -> Result<VarianceProfile> {
    if variances.is_empty() {
        return Err(Error::Contract("no parameters to summarize".into()));
    }
    let mut sorted = variances.clone();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len();
    let median = if k % 2 == 1 {
        sorted[k / 2]
    } else {
        0.5 * (sorted[k / 2 - 1] + sorted[k / 2])
    };
    Ok(VarianceProfile {
        label,
        replicates,
        min: sorted[0],
        median,
        max: sorted[k - 1],
        variances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_order_statistics() {
        let p = summarize_variances("x".into(), 3, vec![4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((p.min, p.median, p.max), (1.0, 2.5, 4.0));
        let p = summarize_variances("x".into(), 3, vec![5.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.median, 1.0);
        assert!(summarize_variances("x".into(), 3, vec![]).is_err());
    }
}

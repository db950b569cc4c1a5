//! Flag definitions. Every flag can also be set from a `--config` file
//! using its long name as the key.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "rsvi", version, about = "Rejection sampling variational inference experiments")]
pub struct Cli {
    /// Flat `key = value` file mirroring the subcommand's flags; flags given
    /// on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Draw from the rejection sampler and summarize acceptance and fit.
    Sample(SampleArgs),
    /// Compare every analytic derivative against finite differences.
    Gradcheck(GradcheckArgs),
    /// Per-parameter gradient variance for several estimators.
    Variance(VarianceArgs),
    /// Run stochastic optimization of the ELBO.
    Fit(FitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Gamma,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Dirichlet-multinomial with a Dirichlet variational factor.
    Conjugate,
    /// Sparse gamma deep exponential family with Poisson observations.
    Def,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    /// Lines of `doc_id word_id count`.
    Bow,
    /// Dense integer matrix, one row per observation.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorArg {
    Rsvi,
    #[value(name = "score_function", alias = "score")]
    ScoreFunction,
    Importance,
}

impl From<EstimatorArg> for rsvi::estimators::EstimatorKind {
    fn from(e: EstimatorArg) -> Self {
        use rsvi::estimators::EstimatorKind as K;
        match e {
            EstimatorArg::Rsvi => K::Rsvi,
            EstimatorArg::ScoreFunction => K::ScoreFunction,
            EstimatorArg::Importance => K::Importance,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeedArg {
    /// Master seed; defaults to $RSVI_SEED, then 0.
    #[arg(long, env = "RSVI_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Distribution::Gamma)]
    pub distribution: Distribution,
    #[arg(long, default_value_t = 2.0)]
    pub shape: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rate: f64,
    /// Shape-augmentation steps B (forced to at least 1 below shape 1).
    #[arg(long, default_value_t = 0)]
    pub augmentation: usize,
    /// Number of accepted draws.
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    /// Proposals allowed per draw before the sampler reports a stall.
    #[arg(long)]
    pub trial_budget: Option<u64>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Conjugate)]
    pub model: ModelKind,
    /// Category counts for the conjugate model.
    #[arg(long, value_delimiter = ',', default_value = "7,5,4,3,1")]
    pub counts: Vec<u64>,
    /// Dirichlet prior concentrations; uniform when absent.
    #[arg(long, value_delimiter = ',')]
    pub prior: Option<Vec<f64>>,
    /// Count data. The conjugate model uses its column totals; the DEF
    /// uses it as the observation matrix. Synthetic DEF data when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Data format; inferred from the extension (`.csv` is dense) when absent.
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    /// DEF layer sizes, bottom first.
    #[arg(long, value_delimiter = ',', default_value = "10,5")]
    pub layers: Vec<usize>,
    /// Synthetic DEF observations.
    #[arg(long, default_value_t = 50)]
    pub n_obs: usize,
    /// Synthetic DEF observation dimension.
    #[arg(long, default_value_t = 20)]
    pub dim: usize,
    /// Seed for synthetic data; the master seed when absent.
    #[arg(long)]
    pub data_seed: Option<u64>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha_z: f64,
    #[arg(long, default_value_t = 0.1)]
    pub weight_shape: f64,
    #[arg(long, default_value_t = 0.3)]
    pub weight_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    pub top_shape: f64,
    #[arg(long, default_value_t = 0.1)]
    pub top_rate: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Random points per check.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Largest accepted relative error.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Report CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Perturb the model gradient (negative control for the checker).
    #[arg(long, hide = true)]
    pub corrupt_gradient: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VarianceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rsvi,score_function")]
    pub estimators: Vec<EstimatorArg>,
    /// Augmentation steps to profile for the rsvi and importance estimators.
    #[arg(long, value_delimiter = ',', default_value = "0,1,4")]
    pub augmentations: Vec<usize>,
    /// Replicate estimates per row (G ≥ 2).
    #[arg(long, default_value_t = 1000)]
    pub replicates: usize,
    /// Draws averaged per estimate.
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    /// Variational parameters; the default initialization when absent.
    #[arg(long, value_delimiter = ',')]
    pub theta: Option<Vec<f64>>,
    /// Compute replicates on one thread (output is identical either way).
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Output CSV; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Rsvi)]
    pub estimator: EstimatorArg,
    #[arg(long, default_value_t = 0)]
    pub augmentation: usize,
    /// Draws averaged per gradient estimate.
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
    /// Step-size scale.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long, default_value_t = 1000)]
    pub iterations: u64,
    /// Fresh draws behind each traced ELBO value.
    #[arg(long, default_value_t = 100)]
    pub elbo_draws: usize,
    /// Relative ELBO change between windows that stops the run; 0 disables.
    #[arg(long, default_value_t = 1e-6)]
    pub stop_tolerance: f64,
    #[arg(long, default_value_t = 200)]
    pub stop_window: usize,
    /// Initial variational parameters; the default initialization when absent.
    #[arg(long, value_delimiter = ',')]
    pub theta_init: Option<Vec<f64>>,
    #[arg(long)]
    pub sequential: bool,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Trace output (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Final parameter CSV; `<out>.params.csv` when absent.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Include wall-clock timings in the trace (the trace is then no longer
    /// reproducible byte for byte).
    #[arg(long)]
    pub timing: bool,
}

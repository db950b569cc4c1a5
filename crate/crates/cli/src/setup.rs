//! Model construction from flags.

use rsvi::mathcore::RandomStream;
use rsvi::models::{make_synthetic_def_data, ConjugateModel, DefHyperparameters, ModelSpec, SparseGammaDef, SyntheticOptions};

use crate::cli::{ModelArgs, ModelKind};
use crate::data::read_counts;
use crate::failure::Failure;

/// Stream id for synthetic data, kept apart from every computation stream.
const DATA_STREAM: u64 = 0xda7a;

pub enum BuiltModel {
    Conjugate(ConjugateModel),
    Def(SparseGammaDef),
}

impl BuiltModel {
    pub fn spec(&self) -> &dyn ModelSpec {
        match self {
            BuiltModel::Conjugate(m) => m,
            BuiltModel::Def(m) => m,
        }
    }

    pub fn conjugate(&self) -> Option<&ConjugateModel> {
        match self {
            BuiltModel::Conjugate(m) => Some(m),
            BuiltModel::Def(_) => None,
        }
    }
}

pub fn build_model(args: &ModelArgs, seed: u64) -> Result<BuiltModel, Failure> {
    let data = args.data.as_deref().map(|p| read_counts(p, args.format)).transpose()?;
    match args.model {
        ModelKind::Conjugate => {
            let counts = match &data {
                Some(m) => (0..m.cols()).map(|c| (0..m.rows()).map(|r| m.get(r, c)).sum()).collect(),
                None => args.counts.clone(),
            };
            let model = match &args.prior {
                Some(p) => ConjugateModel::new(p.clone(), counts)?,
                None => ConjugateModel::with_uniform_prior(counts)?,
            };
            Ok(BuiltModel::Conjugate(model))
        }
        ModelKind::Def => {
            let hyper = DefHyperparameters {
                alpha_z: args.alpha_z,
                weight_shape: args.weight_shape,
                weight_rate: args.weight_rate,
                top_shape: args.top_shape,
                top_rate: args.top_rate,
            };
            hyper.validate()?;
            let counts = match data {
                Some(m) => m,
                None => {
                    let opts = SyntheticOptions {
                        layer_sizes: args.layers.clone(),
                        n_obs: args.n_obs,
                        dim: args.dim,
                        hyper,
                        ..SyntheticOptions::default()
                    };
                    let mut stream = RandomStream::new(args.data_seed.unwrap_or(seed), DATA_STREAM);
                    make_synthetic_def_data(&opts, &mut stream)?.counts
                }
            };
            Ok(BuiltModel::Def(SparseGammaDef::new(args.layers.clone(), counts, hyper)?))
        }
    }
}

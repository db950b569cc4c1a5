use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    /// A proposal fell outside the support of a transform. Rejection loops
    /// treat this as an automatic reject.
    #[error("epsilon {epsilon} outside the support of the transform at shape {shape}")]
    OutsideSupport { epsilon: f64, shape: f64 },

    /// Caller violated a structural contract (wrong arity, mismatched lengths).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A function evaluation returned a non-finite value.
    #[error("non-finite value in {what} at coordinate {coordinate:?}: {value}")]
    NonFinite {
        what: &'static str,
        coordinate: Option<usize>,
        value: f64,
    },

    #[error("rejection sampler stalled after {trials} trials (shape {shape}, log M {log_m})")]
    SamplerStall { trials: u64, shape: f64, log_m: f64 },

    #[error("numerical search did not converge: {0}")]
    Search(String),
}

impl Error {
    pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            what,
            detail: detail.into(),
        }
    }
}

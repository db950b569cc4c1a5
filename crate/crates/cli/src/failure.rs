//! Errors with the exit-code contract: 0 ok, 1 check failure, 2 config or
//! input error, 3 sampler stall, 4 optimizer abort.

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Argument parsing, including `--help` and `--version`.
    Clap(clap::Error),
    Config(String),
    Check(String),
    Stall(String),
    Abort(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Clap(e) => e.exit_code(),
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Stall(_) => 3,
            Failure::Abort(_) => 4,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Failure::Config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Clap(e) => write!(f, "{e}"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
            Failure::Stall(m) => write!(f, "sampler stall: {m}"),
            Failure::Abort(m) => write!(f, "optimizer abort: {m}"),
        }
    }
}

/// Library errors: stalls keep their own code, everything else is treated as
/// a bad configuration (parameters outside a domain, mismatched lengths).
impl From<rsvi::Error> for Failure {
    fn from(e: rsvi::Error) -> Self {
        match e {
            rsvi::Error::SamplerStall { .. } => Failure::Stall(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

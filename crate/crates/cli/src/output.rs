//! Output assembly. Each file is built in memory and written once.

use std::io::Write;
use std::path::Path;

use crate::cli::Command;
use crate::failure::Failure;

/// The fully resolved configuration as one JSON object, for audit lines.
pub fn config_json(command: &Command) -> String {
    serde_json::to_string(command).expect("config serializes")
}

/// `# config: {...}` header line for CSV outputs.
pub fn csv_config_line(command: &Command) -> String {
    format!("# config: {}\n", config_json(command))
}

/// Write to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::io(p, e)),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| Failure::Config(format!("standard output: {e}"))),
    }
}

//! `--config` support: a flat `key = value` file whose keys are the long flag
//! names of the chosen subcommand. Entries are turned into extra flags for
//! every argument not already given on the command line, then the whole
//! command line is parsed again so both paths share one set of validators.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, CommandFactory, FromArgMatches};

use crate::cli::Cli;
use crate::failure::Failure;

pub fn parse(args: Vec<OsString>) -> Result<Cli, Failure> {
    let command = Cli::command();
    let matches = command.clone().try_get_matches_from(&args).map_err(Failure::Clap)?;
    let Some(path) = matches.get_one::<std::path::PathBuf>("config") else {
        return Cli::from_arg_matches(&matches).map_err(Failure::Clap);
    };
    let entries = read_entries(path)?;
    let (name, sub_matches) = matches.subcommand().expect("subcommand is required");
    let sub = command.find_subcommand(name).expect("parsed subcommand exists");

    let mut extra: Vec<OsString> = Vec::new();
    for (line, key, value) in entries {
        let long = key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(long.as_str()) && long != "config")
            .ok_or_else(|| {
                Failure::Config(format!("{}:{line}: unknown key {key:?} for `{name}`", path.display()))
            })?;
        let id = arg.get_id().as_str();
        if sub_matches.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => extra.push(format!("--{long}").into()),
                "false" => {}
                _ => {
                    return Err(Failure::Config(format!(
                        "{}:{line}: {key} expects true or false, got {value:?}",
                        path.display()
                    )))
                }
            },
            _ => extra.push(format!("--{long}={value}").into()),
        }
    }
    let mut full = args;
    full.extend(extra);
    let m = Cli::command().try_get_matches_from(full).map_err(Failure::Clap)?;
    Cli::from_arg_matches(&m).map_err(Failure::Clap)
}

/// `(line number, key, value)` triples. Blank lines and `#` comments are
/// skipped; repeated keys are an error.
fn read_entries(path: &Path) -> Result<Vec<(usize, String, String)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::Config(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if out.iter().any(|(_, seen, _)| *seen == k) {
            return Err(Failure::Config(format!("{}:{}: duplicate key {k:?}", path.display(), i + 1)));
        }
        out.push((i + 1, k, v));
    }
    Ok(out)
}

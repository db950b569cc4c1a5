// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cli;
mod commands;
mod config_file;
mod data;
mod failure;
mod output;
mod setup;

use cli::Command;
use failure::Failure;

fn run() -> Result<(), Failure> {
    let cli = config_file::parse(std::env::args_os().collect())?;
    let command = &cli.command;
    match command {
        Command::Sample(a) => commands::sample::run(a, command),
        Command::Gradcheck(a) => commands::gradcheck::run(a, command),
        Command::Variance(a) => commands::variance::run(a, command),
        Command::Fit(a) => commands::fit::run(a, command),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(f) = run() {
        if let Failure::Clap(e) = &f {
            e.exit();
        }
        eprintln!("rsvi: {f}");
        std::process::exit(f.exit_code());
    }
}

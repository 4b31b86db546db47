mod args;
mod commands;
mod error;
mod output;
mod settings;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;
use settings::Settings;

const THREADS_VAR: &str = "BOSE_SCATTER_THREADS";

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!(
            "{THREADS_VAR} must be a positive integer, got '{raw}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let settings = Settings::resolve(&cli.engine)?;
    match cli.command {
        Command::Rate(a) => commands::rate(a, &settings),
        Command::SweepTau(a) => commands::sweep_tau_cmd(a, &settings),
        Command::SweepDelta(a) => commands::sweep_delta_cmd(a, &settings),
        Command::Figure1(a) => commands::figure1(a, &settings),
        Command::Sumrule(a) => commands::sumrule(a, &settings),
        Command::Convert(a) => commands::convert(a, &settings),
        Command::Oracle(c) => commands::oracle(c, &settings),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

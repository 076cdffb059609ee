//! `pairstop`: thresholds, sensitivity tables, calibration, verification,
//! simulation and backtests from the command line.
//!
//! Exit status: 0 on success, 1 when a verification check fails, 2 on
//! usage or input errors.

mod args;
mod commands;
mod config;
mod error;
mod format;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use commands::Outcome;
use error::CliError;

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Thresholds { params, data, out, model } => commands::thresholds(&params, &data, &out, model),
        Command::Tables { params, out, model } => commands::tables(&params, &out, model),
        Command::Calibrate { params, data, out } => commands::calibrate(&params, &data, &out),
        Command::Verify { params, data, out, model, lower, upper, points } => {
            commands::verify(&params, &data, &out, model, lower, upper, points)
        }
        Command::Simulate { params, sim, out, model } => commands::simulate(&params, &sim, &out, model),
        Command::Backtest { params, data, out, model, position } => {
            commands::backtest_cmd(&params, &data, &out, model, position.as_deref())
        }
    }
}

fn main() -> ExitCode {
    // Usage errors exit with status 2 from inside clap.
    let cli = Cli::parse();
    let name = cli.command.name();
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            let mut root = Cli::command().bin_name("pairstop");
            root.build();
            let sub = root.find_subcommand_mut(name).expect("subcommand exists");
            let _ = sub.error(ErrorKind::MissingRequiredArgument, msg).print();
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

mod args;
mod commands;
mod error;
mod manifest;
mod plot;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

fn dispatch(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a, argv),
        Command::Sweep(a) => commands::sweep(a, argv),
        Command::Optimize(a) => commands::optimize(a, argv),
        Command::Calibrate(a) => commands::calibrate_cmd(a, argv),
        Command::Lint(a) => commands::lint(a),
        Command::Plot(a) => commands::plot(a, argv),
        Command::Replay(a) => {
            let recorded = commands::replay(a)?;
            run(recorded)
        }
    }
}

fn run(argv: Vec<String>) -> Result<(), CliError> {
    let cli = Cli::try_parse_from(std::iter::once("sfdsim".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    dispatch(&cli, &argv)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::env::args()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match dispatch(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::Reported) {
                report::print_error(&e.to_string());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `qot`: run, verify and sweep the two-particle oblivious transfer protocol.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 protocol abort (round limit), 4 I/O error.

mod args;
mod commands;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::CliError;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap exits 0 for --help/--version and 2 for usage errors
            err.exit();
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if !matches!(err, CliError::VerificationFailed(_)) {
                eprintln!("error: {err}");
            }
            ExitCode::from(err.exit_code())
        }
    }
}

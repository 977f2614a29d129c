//! `fom-lab`: runs, certificates, worst cases and rate tables from the
//! command line.
//!
//! Exit codes: 0 success, 1 bad configuration, 2 numerical failure during a
//! run, 3 a certificate or worst-case check that was evaluated and failed.

pub mod args;
pub mod commands;
pub mod output;
pub mod problem;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use commands::{EXIT_CONFIG, EXIT_NUMERICAL};
use fom_core::FomError;
use std::ffi::OsString;
use std::io::Write;

fn exit_code(e: &FomError) -> i32 {
    match e {
        FomError::NumericalFailure { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

/// Parses `argv` and runs the command, returning the process exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let text = e.render().to_string();
            if informational {
                let _ = write!(out, "{text}");
                return 0;
            }
            let _ = write!(err, "{text}");
            return EXIT_CONFIG;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => commands::cmd_run(a, out),
        Command::Certify(a) => commands::cmd_certify(a, out),
        Command::Worst(a) => commands::cmd_worst(a, out),
        Command::Theta(a) => commands::cmd_theta(a, out),
        Command::Table(a) => commands::cmd_table(a, out),
        Command::Sweep(a) => commands::cmd_sweep(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

//! `mdwm` — benchmark driver for minimum-distance classification on
//! covariance matrices with cross-subject transfer.
//!
//! Three subcommands cover the full loop:
//!
//! ```text
//! mdwm generate --out data/synth
//! mdwm eval --dataset data/synth --out results/scores.csv
//! mdwm meta --scores results/scores.csv --n 8 --lambda 0.7 --out results/summary.csv
//! ```
//!
//! Every command is deterministic: the same invocation writes the same
//! bytes, whatever the worker count, and leaves a provenance record beside
//! its outputs. Exit codes: 0 success, 1 validation error, 2 numerical
//! failure, 3 I/O failure.

mod config_file;
mod error;
mod eval;
mod generate;
mod meta;
mod provenance;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "mdwm",
    version,
    about = "Covariance-based minimum-distance classification with cross-subject transfer: \
             dataset synthesis, leave-one-subject-out evaluation, meta-analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a seeded multi-subject benchmark dataset
    Generate(generate::GenerateArgs),
    /// Run the leave-one-subject-out transfer evaluation, writing a score table
    Eval(eval::EvalArgs),
    /// Combine score tables into per-dataset effects and a pooled p-value
    Meta(meta::MetaArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version land here by design; everything else is a
            // usage problem and exits with the validation code.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => CliError::Validation(String::new()).exit_code(),
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => generate::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Meta(args) => meta::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

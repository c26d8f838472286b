//! `hampath`: batch front end for building instances, running reductions and
//! verifications, sweeping gaps and running evolutions.
//!
//! Parameters come from `--config <file>` (a JSON object), then `--set KEY=VALUE`,
//! then the shared flags `--out`, `--seed` and `--format`; later sources win.
//! Exit status: 0 when every check passed, 1 when a check failed (reports are still
//! written), 2 for invalid usage or configuration.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod emit;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Overrides};

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, configuration or input files (exit 2).
    Usage(String),
    /// The computation itself failed (exit 1).
    Failed(String),
}

impl CliError {
    /// Library errors raised while reading inputs.
    pub fn input(e: hampath::Error) -> Self {
        Self::Usage(e.to_string())
    }

    /// Library errors raised during a run: bad parameters stay usage errors.
    pub fn run(e: hampath::Error) -> Self {
        use hampath::Error as E;
        match e {
            E::IndexOutOfRange { .. }
            | E::QubitOutOfRange { .. }
            | E::InvalidPauliTerm(_)
            | E::DimensionMismatch(_)
            | E::OutsideDomain { .. }
            | E::InvalidArgument(_)
            | E::Infeasible(_)
            | E::Structure(_)
            | E::MemoryGuard(_) => Self::Usage(e.to_string()),
            _ => Self::Failed(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "hampath", version, about = "Hamiltonian reductions, certificates and adiabatic evolutions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON file with the command's parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for every random draw of the command.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Override one config key; VALUE is JSON or a bare string.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate a random operator, path, assembly or continuous instance.
    Gen,
    /// Sparse stoquastic operator (or path) to stoquastic hypercube.
    #[command(name = "reduce-i")]
    ReduceI,
    /// Stoquastic hypercube operator (or path) to transverse-field form.
    #[command(name = "reduce-ii")]
    ReduceII,
    /// Clock-linearized path of a linear assembly.
    Linearize,
    /// Final transverse-field Ising to diagonal path.
    Assemble,
    /// Ground energy and gap along a path.
    Gapscan,
    /// Check that one operator simulates another.
    Certify,
    /// Schrödinger evolution along a path, with optional measurement.
    Evolve,
    /// Evolution along the continuous-variable path.
    Qhd,
    /// Compare the continuous operator with its qubit counterpart.
    Tosdg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let o = Overrides { config: cli.config, out: cli.out, seed: cli.seed, format: cli.format, set: cli.set };
    match commands::dispatch(cli.command, &o) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hampath: check failed; reports written");
            ExitCode::from(1)
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("hampath: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("hampath: {msg}");
            ExitCode::from(2)
        }
    }
}

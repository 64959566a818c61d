//! `surfq`: curvature export, classical bracket checks, spectra and quantum
//! identity reports for a particle on a curved surface.
//!
//! Exit status: 0 on success, 1 when a verification fails or the eigensolver
//! does not converge, 2 on usage or configuration errors.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use surfq_core::QuantizeError;

use config::{RunArgs, RunConfig};

#[derive(Parser)]
#[command(name = "surfq", version, about = "Quantum mechanics on curved surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normal, curvature and geometric potential at every grid node.
    Curvature(RunArgs),
    /// Classical Poisson and Dirac bracket identities at sampled phase points.
    Brackets(RunArgs),
    /// Lowest eigenvalues of the discrete Hamiltonian.
    Spectrum(RunArgs),
    /// Quantum identities over a ladder of grids.
    VerifyQuantum(RunArgs),
}

fn run(command: Command) -> anyhow::Result<bool> {
    match command {
        Command::Curvature(args) => commands::curvature(&RunConfig::resolve(args)?),
        Command::Brackets(args) => commands::brackets(&RunConfig::resolve(args)?),
        Command::Spectrum(args) => commands::spectrum(&RunConfig::resolve(args)?),
        Command::VerifyQuantum(args) => commands::verify_quantum(&RunConfig::resolve(args)?),
    }
}

fn is_numerical_failure(err: &anyhow::Error) -> bool {
    matches!(
        err.downcast_ref::<QuantizeError>(),
        Some(QuantizeError::NoConvergence { .. } | QuantizeError::NotPositiveDefinite { .. })
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_numerical_failure(&err) { 1 } else { 2 })
        }
    }
}

//! Command-line driver: argument handling, the solution cache, manifests
//! and the verification suites.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use config::{Cli, Command};
use error::{CliError, CliResult};

/// Run a parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start worker pool: {e}")))?;
    match &cli.command {
        Command::Moments(a) => commands::moments::run(a),
        Command::Det(a) => commands::hankel::run_det(a, &pool),
        Command::Coeffs(a) => commands::hankel::run_coeffs(a, &pool),
        Command::Painleve(a) => commands::painleve::run(a),
        Command::Verify(a) => commands::verify::run(a, &pool),
    }
}

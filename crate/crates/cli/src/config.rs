use crate::error::{CliError, CliResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pertlag_core::Decimal;
use serde::Serialize;
use std::path::PathBuf;

/// Environment variable overriding the solution cache directory.
pub const CACHE_ENV: &str = "PERTLAG_CACHE_DIR";
const DEFAULT_CACHE_DIR: &str = ".pertlag-cache";

#[derive(Debug, Parser)]
#[command(name = "pertlag", version, about = "Perturbed Laguerre ensembles: Hankel data and the Painleve III limit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for sweeps (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moment table of the weight as JSON.
    Moments(MomentsArgs),
    /// Hankel determinants and log-derivatives over an (n, t) grid.
    Det(GridArgs),
    /// Recurrence coefficients for degrees 0..n-1.
    Coeffs(GridArgs),
    /// Integrate, certify and cache the Painleve III transcendent.
    Painleve(PainleveArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FiniteN,
    Asymptotics,
    Transitions,
}

impl Suite {
    pub fn as_str(self) -> &'static str {
        match self {
            Suite::FiniteN => "finite-n",
            Suite::Asymptotics => "asymptotics",
            Suite::Transitions => "transitions",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file (stdout when absent); a manifest is written beside it.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub jmin: i64,
    #[arg(long)]
    pub jmax: i64,
    /// Working precision (0 = 256).
    #[arg(long, default_value_t = 0)]
    pub bits: u32,
    /// Add a quadrature column.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Comma-separated t values.
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    /// Comma-separated n values.
    #[arg(long)]
    pub n: String,
    /// Working precision (0 = automatic with two-precision agreement).
    #[arg(long, default_value_t = 0)]
    pub bits: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PainleveArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long = "s-max")]
    pub s_max: String,
    #[arg(long, default_value = "1e-25")]
    pub tol: String,
    /// Minimum working precision (0 = derived from tol and s-max).
    #[arg(long, default_value_t = 0)]
    pub bits: u32,
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// Comma-separated n values.
    #[arg(long)]
    pub n: Option<String>,
    /// Comma-separated t values (finite-n suite).
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    /// Fixed s = 2nt (asymptotics suite).
    #[arg(long = "fixed-s")]
    pub fixed_s: Option<String>,
    /// Fixed t (asymptotics suite).
    #[arg(long = "fixed-t")]
    pub fixed_t: Option<String>,
    #[arg(long, default_value = "1e-25")]
    pub tol: String,
    #[arg(long, default_value_t = 0)]
    pub bits: u32,
    #[arg(long = "cache-dir")]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Validated echo of a command line; recorded in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub alpha: Decimal,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub t: Vec<Decimal>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<Decimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<Decimal>,
    pub bits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_path: Option<PathBuf>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
}

pub fn parse_decimal(name: &str, text: &str) -> CliResult<Decimal> {
    text.trim().parse().map_err(|_| CliError::Validation(format!("{name}: cannot parse '{text}' as a number")))
}

pub fn parse_alpha(text: &str) -> CliResult<Decimal> {
    let a = parse_decimal("alpha", text)?;
    if !a.is_positive() {
        return Err(CliError::Validation("alpha must be > 0".into()));
    }
    Ok(a)
}

pub fn parse_positive(name: &str, text: &str) -> CliResult<Decimal> {
    let v = parse_decimal(name, text)?;
    if !v.is_positive() {
        return Err(CliError::Validation(format!("{name} must be > 0")));
    }
    Ok(v)
}

/// Non-empty, strictly increasing list of non-negative decimals.
pub fn parse_t_grid(text: &str) -> CliResult<Vec<Decimal>> {
    let grid = text.split(',').map(|s| parse_decimal("t", s)).collect::<CliResult<Vec<_>>>()?;
    if grid.iter().any(Decimal::is_negative) {
        return Err(CliError::Validation("t must be >= 0".into()));
    }
    check_sorted("t", &grid)?;
    Ok(grid)
}

/// Non-empty, strictly increasing list of positive integers.
pub fn parse_n_grid(text: &str) -> CliResult<Vec<usize>> {
    let grid = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Validation(format!("n: cannot parse '{s}'"))))
        .collect::<CliResult<Vec<_>>>()?;
    if grid.contains(&0) {
        return Err(CliError::Validation("n must be >= 1".into()));
    }
    check_sorted("n", &grid)?;
    Ok(grid)
}

fn check_sorted<T: PartialOrd>(name: &str, grid: &[T]) -> CliResult<()> {
    if grid.is_empty() {
        return Err(CliError::Validation(format!("{name} grid is empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Validation(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// Explicit flag, then the environment, then the default.
pub fn resolve_cache_dir(flag: Option<&PathBuf>) -> PathBuf {
    flag.cloned()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR))
}

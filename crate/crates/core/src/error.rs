use thiserror::Error;

/// Every failure the numerical pipeline can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid decimal literal {0:?}")]
    Parse(String),

    #[error("moment index {j} lies below the window start {jmin}")]
    IndexWindow { j: i64, jmin: i64 },

    #[error("quadrature did not converge after {levels} levels (last change {last_change})")]
    NonConvergence { levels: u32, last_change: String },

    #[error("non-positive pivot at row {row} with {bits} bits")]
    PivotLoss { row: usize, bits: u32 },

    #[error("precision retries exhausted at {bits} bits")]
    PrecisionExhausted { bits: u32 },

    #[error("step size collapsed near s = {last_s}")]
    StepCollapse { last_s: String },

    #[error("solution came too close to zero at s = {s}")]
    DenominatorGuard { s: String },

    #[error("s = {s} lies outside the solved range (0, {s_max}]")]
    OutOfRange { s: String, s_max: String },

    #[error("a_n = {value} is below the near-zero threshold; residual indeterminate")]
    Indeterminate { value: String },

    #[error("need at least {need} grid points, got {got}")]
    InsufficientGrid { need: usize, got: usize },

    #[error("series seed failed: {0}")]
    Seed(String),

    #[error("cache format error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;

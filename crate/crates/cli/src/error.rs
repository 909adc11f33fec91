use pertlag_core::Error as CoreError;
use thiserror::Error;

/// Everything a command can fail with, each mapped to a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0}")]
    Validation(String),

    #[error("verification failed: {0}")]
    VerifyFailed(String),

    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_STEP_COLLAPSE: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::VerifyFailed(_) => EXIT_VERIFY,
            CliError::Core(e) => match e {
                CoreError::Domain(_)
                | CoreError::Parse(_)
                | CoreError::IndexWindow { .. }
                | CoreError::OutOfRange { .. }
                | CoreError::InsufficientGrid { .. } => EXIT_VALIDATION,
                CoreError::PrecisionExhausted { .. } | CoreError::PivotLoss { .. } => EXIT_PRECISION,
                CoreError::StepCollapse { .. } | CoreError::DenominatorGuard { .. } => EXIT_STEP_COLLAPSE,
                _ => EXIT_OTHER,
            },
            CliError::Io { .. } | CliError::Json(_) => EXIT_OTHER,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

//! Process-level error type carrying the exit-code contract: configuration
//! problems exit with 2, numerical or runtime failures with 3.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid flags, config file contents, or input values.
    #[error("{0}")]
    Config(String),
    /// Failure while running the requested computation or writing output.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<lmsz_spin::Error> for CliError {
    fn from(e: lmsz_spin::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Shorthand for a configuration-stage error.
pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

//! Failure classes of a run and their process exit codes.

use ggkdv::GgError;
use thiserror::Error;

/// Why a run stopped.
#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration file is unreadable, malformed or out of range.
    #[error("config error: {0}")]
    Config(String),
    /// A numerical module failed.
    #[error("solver error [{}]: {}", .0.name(), .0)]
    Solver(GgError),
    /// A certificate or a control precondition failed.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Output files could not be written.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Exit code: 1 for configuration and I/O problems, 2 for solver errors,
    /// 3 for certificate and precondition failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }
}

impl From<GgError> for CliError {
    fn from(e: GgError) -> Self {
        match e {
            GgError::Precondition(msg) => CliError::Precondition(msg),
            other => CliError::Solver(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

/// Result alias of the runner.
pub type CliResult<T> = std::result::Result<T, CliError>;

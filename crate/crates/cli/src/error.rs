use std::io;

use thiserror::Error;

/// Failure of a CLI command, mapped to the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration (exit 2).
    #[error("{0}")]
    Config(String),
    /// An invariant or convergence check did not hold (exit 1).
    #[error("{0}")]
    Check(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Core(#[from] pdm_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

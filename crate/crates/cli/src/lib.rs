//! Configuration-driven sweeps, validation battery and series-convergence
//! table for the `zfsic` binary.

pub mod config;
pub mod convergence;
pub mod output;
pub mod sweep;
pub mod validate;

/// Exit status contract of the binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECKS_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("computation failed: {0}")]
    Numeric(String),
    #[error("{failed} of {total} validation checks failed")]
    ValidationFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => exit::CONFIG,
            CliError::Numeric(_) | CliError::ValidationFailed { .. } => exit::CHECKS_FAILED,
        }
    }
}

pub(crate) fn numeric(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(format!("{context}: {e}"))
}

pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

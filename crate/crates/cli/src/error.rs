use std::path::Path;

use hubnet_core::Error as CoreError;

/// A failure carrying the process exit code it maps to.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

pub const EXIT_CONDITIONS_FAILED: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID_INPUT,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self::invalid(format!("{}: {err}", path.display()))
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let code = match err.root() {
            CoreError::InvalidInput(_) => EXIT_INVALID_INPUT,
            CoreError::Infeasible { .. } => EXIT_INFEASIBLE,
            CoreError::EnumerationCap { .. } => EXIT_LIMIT,
            CoreError::Replicate { .. } => unreachable!("root is never a replicate wrapper"),
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

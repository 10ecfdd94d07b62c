use std::path::PathBuf;

use magnon_blockade::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid input: {0}")]
    Invalid(CoreError),

    #[error("solver failed: {0}")]
    Solver(CoreError),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write output: {0}")]
    Stdout(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Invalid(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Io { .. } | CliError::Stdout(_) => 3,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidHilbertSpace { .. }
            | CoreError::InvalidParameter { .. }
            | CoreError::InvalidTimes(_)
            | CoreError::InvalidGrid(_)
            | CoreError::DimensionMismatch { .. } => CliError::Invalid(e),
            _ => CliError::Solver(e),
        }
    }
}

use std::path::Path;

use thiserror::Error;

/// Failures of a subcommand, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unparsable or inconsistent configuration, missing input files.
    #[error("{0}")]
    Config(String),

    /// A solver or generator hit a numerical failure.
    #[error("numerical failure: {0}")]
    Numerical(sharp_subgrad::Error),

    /// Verification found a violated inequality.
    #[error("{0}")]
    Verify(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verify(_) => 4,
            CliError::Io { .. } => 1,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<sharp_subgrad::Error> for CliError {
    fn from(err: sharp_subgrad::Error) -> Self {
        use sharp_subgrad::Error as E;
        match err.root() {
            E::InvalidParameter(_) | E::UnknownName { .. } | E::DimensionMismatch { .. } | E::MissingGroundTruth(_) => {
                CliError::Config(err.to_string())
            }
            _ => CliError::Numerical(err),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fracfact::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{0}")]
    Invalid(String),

    #[error("replay mismatch: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 parse/validation, 3 numeric failure, 4 budget exceeded.
    pub fn exit_code(&self) -> u8 {
        use fracfact::Error as E;
        match self {
            CliError::Core(E::NonConvergence { .. } | E::Numeric(_)) => 3,
            CliError::Core(E::CompletionBudget(_) | E::FiberTooLarge(_)) => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

use thiserror::Error;

use crate::design::Word;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("rank-deficient generators: defining contrast subgroup has {found} words, expected {expected}")]
    RankDeficientGenerators { found: usize, expected: usize },

    #[error("model inconsistent with aliasing relations: {first} and {second} have identical columns")]
    AliasedTerms { first: Word, second: Word },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid move at row {row}: {reason}")]
    InvalidMove { row: usize, reason: String },

    #[error("completion budget exceeded: {0} (consider importing a precomputed basis)")]
    CompletionBudget(String),

    #[error("fiber too large: {0}")]
    FiberTooLarge(String),

    #[error("fiber is unbounded: cell {0} has no finite upper bound")]
    UnboundedFiber(usize),

    #[error("Newton-Raphson did not converge in {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("empty move set")]
    EmptyMoveSet,

    #[error("starting point is not in the fiber: {0}")]
    NotInFiber(String),

    #[error("model is not decomposable: {0}")]
    NotDecomposable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }
}

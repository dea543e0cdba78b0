use thiserror::Error;

/// Errors raised by the optimization library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("evaluation budget exhausted ({used} of {max} evaluations used)")]
    BudgetExhausted { used: u64, max: u64 },

    #[error("protocol error: {0}")]
    Protocol(&'static str),

    #[error("update skipped: all {0} offspring have non-finite fitness")]
    UpdateSkipped(usize),

    #[error("config line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QapError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at token {position} ({token:?}): {reason}")]
    Parse {
        position: usize,
        token: String,
        reason: String,
    },

    #[error("truncated input: expected {expected} numbers, found {found} (missing {})", expected - found)]
    Truncated { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T, E = QapError> = std::result::Result<T, E>;

impl QapError {
    pub(crate) fn capacity(what: &'static str, got: usize, limit: usize) -> Self {
        QapError::Capacity { what, got, limit }
    }
}

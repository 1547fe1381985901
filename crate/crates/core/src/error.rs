use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed or out-of-range input (unknown ids, loops, bad partitions).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A caller broke an operation's precondition.
    #[error("contract violated: {0}")]
    Contract(String),

    /// The instance is larger than the exhaustive enumerators accept.
    #[error("{what} has size {size}, above the enumeration limit {limit}")]
    Capacity {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    /// An invariant that the underlying theorems guarantee did not hold.
    /// Seeing this means the implementation is wrong.
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn internal(msg: impl Into<String>) -> Error {
    Error::Internal(msg.into())
}

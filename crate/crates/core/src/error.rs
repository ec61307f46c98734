use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Only orders 2 and 3 have closed forms for the Hilbert-Schmidt ensemble.
    #[error("unsupported moment order {0}")]
    UnsupportedOrder(u32),

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a precondition (shape mismatch, out-of-range index, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The requested computation exceeds a configured size guard.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An intermediate value left the native integer range.
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    /// An enumeration guard refused to start a run.
    #[error("enumeration guard: {0}")]
    Guard(String),
    /// A construction that must always succeed did not.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

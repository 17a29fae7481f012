use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Inconsistent configuration (family mismatch, bad secret, off-grid input).
    #[error("configuration error: {0}")]
    Config(String),
    /// The combination is not covered by any implemented formula.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// No mechanism satisfies the requested budget.
    #[error("no answer: {0}")]
    Infeasible(String),
    /// Parameter estimation failed (empty or degenerate data).
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(msg.into()))
}

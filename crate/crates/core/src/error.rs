use thiserror::Error;

/// Errors raised by the collective simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed or produced an unusable value.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The request exceeds a configured resource cap.
    #[error("resource error: {0}")]
    Resource(String),

    /// Malformed input (circuit JSON, CSV, CLI lists).
    #[error("parse error: {0}")]
    Parse(String),

    /// The mean spin vanishes, so the squeezing frame is undefined.
    #[error("degenerate mean-spin frame: |<J>| = {0:e}")]
    DegenerateFrame(f64),

    /// A valid request the implementation does not support.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

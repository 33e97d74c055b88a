use thiserror::Error;

/// Errors raised by the sampling, oracle and estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("degenerate distribution: {0}")]
    Degenerate(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("malformed table: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

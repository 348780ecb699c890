use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FkError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("resource cap exceeded: {0}")]
    Resource(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FkError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(FkError::Domain(msg.into()))
}

pub(crate) fn resource<T>(msg: impl Into<String>) -> Result<T> {
    Err(FkError::Resource(msg.into()))
}

//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{what} = {value} is outside the supported range (limit {limit})")]
    Range {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular local factor at p = {p}: {reason}")]
    Singularity { p: u64, reason: String },
    #[error("degenerate setup: {0}")]
    Degenerate(String),
    #[error("input has {len} elements, more than the supported {max}")]
    Size { len: usize, max: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

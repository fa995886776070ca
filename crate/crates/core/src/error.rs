use thiserror::Error;

/// Errors raised by the toolkit.
///
/// The variants map onto the CLI exit codes: domain-type problems exit with
/// 1, resource and budget problems exit with 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown catalog entry `{0}`")]
    Catalog(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("degenerate direction: {0}")]
    Degenerate(String),

    #[error("rounding failed: {0}")]
    RoundingFailed(String),

    #[error("certificate refused: {0}")]
    Certificate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) | Error::Budget(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

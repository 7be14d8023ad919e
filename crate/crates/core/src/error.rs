use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("network generation failed: {0}")]
    GenerationFailure(String),

    #[error("network failed validation: {0}")]
    InvalidNetwork(String),

    /// A payoff or weight that must be finite was not.
    #[error("internal state corrupted: {0}")]
    Corruption(String),

    #[error("operation requires coevolution mode: {0}")]
    Mode(String),

    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { key: String, line: usize, message: String },

    #[error("malformed input at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Wraps a failure with the sweep coordinates it happened at.
    #[error("{location}: {source}")]
    At {
        location: String,
        #[source]
        source: Box<Error>,
    },

    #[error("override --{key}: {message}")]
    Override { key: String, message: String },

    #[error("I/O failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn at(location: impl Into<String>, source: Error) -> Self {
        Error::At {
            location: location.into(),
            source: Box::new(source),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Innermost error, skipping grid-coordinate wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::At { source, .. } => source.root(),
            other => other,
        }
    }
}

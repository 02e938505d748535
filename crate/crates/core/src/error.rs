use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input outside the domain of an operation (empty configuration,
    /// too few vertices, mismatched dimensions...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A model hypothesis was found violated while probing.
    #[error("model validation failed [{hypothesis}]: {detail}")]
    Validation { hypothesis: String, detail: String },

    /// The total intensity exceeded the declared upper bound during simulation.
    #[error("intensity {value} exceeds declared upper bound {bound}")]
    ModelBound { value: f64, bound: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownName {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("bandwidth selection failed: {0}")]
    Selection(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

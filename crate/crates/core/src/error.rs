use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by model construction, sampling, estimation and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("population size {n} is below the observed sample size {observed}")]
    SupportViolation { n: u64, observed: u64 },

    #[error(
        "posterior improper without cap: no unit outside the initial sample can be linked to it"
    )]
    ImproperPosterior,

    #[error("inconsistent: unsampled unit cannot avoid S0 (every stratum has zero escape weight)")]
    ZeroEscapeWeight,

    #[error("full-graph estimate undefined for an empty population")]
    EmptyPopulation,

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {cause}")]
    Io {
        path: PathBuf,
        cause: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by malformed inputs rather than runtime numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::ImproperPosterior | Error::ZeroEscapeWeight | Error::Io { .. }
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, cause: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            cause,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

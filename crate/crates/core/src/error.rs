use thiserror::Error;

/// Errors raised anywhere in the simulation pipeline.
///
/// The CLI maps [`Error::Parse`] and [`Error::Validation`] to exit code 2 and
/// [`Error::Sampler`] to exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("sampler error: {0}")]
    Sampler(#[from] SamplerError),

    #[error("enumeration guard exceeded: {0}")]
    Guard(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn precondition(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// True when the error is (or wraps) a sampler failure.
    pub fn is_sampler(&self) -> bool {
        match self {
            Error::Sampler(_) => true,
            Error::Replication { source, .. } => source.is_sampler(),
            _ => false,
        }
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Error::Parse(_) | Error::Validation { .. })
    }
}

/// Failures specific to the vertex-process samplers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("kernel not supported: {0}")]
    KernelNotSupported(String),

    #[error(
        "kernel eigenvalue {value} > 1 at Fourier mode {mode:?}; not a valid determinantal kernel"
    )]
    EigenvalueAboveOne { mode: Vec<i64>, value: f64 },

    #[error("circulant embedding not non-negative definite on a {grid:?} grid (min eigenvalue {min_eigenvalue})")]
    EmbeddingNotNonnegative {
        grid: Vec<usize>,
        min_eigenvalue: f64,
    },

    #[error("vertex process `{0}` requires a torus window")]
    RequiresTorus(String),

    #[error("unsupported alpha: {0}")]
    UnsupportedAlpha(String),
}

pub type Result<T> = std::result::Result<T, Error>;

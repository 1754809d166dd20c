use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the transport, measurement and inversion routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e}, target {target:.3e})")]
    NotConverged {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        target: f64,
    },

    #[error("measurement column {column}: {source}")]
    Column {
        column: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("outer iteration {iteration}: {source}")]
    Iteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("fingerprint mismatch: file has {found}, configuration expects {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error originates from a linear solver failing to converge.
    pub fn is_solver_failure(&self) -> bool {
        match self {
            Error::NotConverged { .. } => true,
            Error::Column { source, .. } | Error::Iteration { source, .. } => {
                source.is_solver_failure()
            }
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

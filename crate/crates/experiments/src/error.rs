use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error{}: {message}", path.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default())]
    Config {
        path: Option<PathBuf>,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] rtt_core::Error),

    #[error("{failed} check(s) failed")]
    CheckFailed { failed: usize },
}

impl ExperimentError {
    /// Process exit status: 1 for configuration and file problems, 2 for
    /// numerical failures, 3 for failed checks.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config { .. } | ExperimentError::Io { .. } => 1,
            ExperimentError::Core(rtt_core::Error::Io { .. })
            | ExperimentError::Core(rtt_core::Error::Parse { .. })
            | ExperimentError::Core(rtt_core::Error::FingerprintMismatch { .. }) => 1,
            ExperimentError::Core(_) => 2,
            ExperimentError::CheckFailed { .. } => 3,
        }
    }
}

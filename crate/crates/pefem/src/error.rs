use std::io;
use std::path::PathBuf;

use pefem_core::Error as CoreError;
use thiserror::Error;

/// Process exit status of the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitCode {
    Success = 0,
    /// Bad arguments or configuration, or an output that cannot be written.
    Usage = 1,
    Quality = 2,
    Projection = 3,
    Solver = 4,
    /// The run completed but a verification criterion was not met.
    CheckFailed = 5,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError::Usage(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Io { .. } | CliError::Parse { .. } => ExitCode::Usage,
            CliError::Core(e) => match e {
                CoreError::QualityFailure { .. } | CoreError::InvalidMesh(_) | CoreError::SingularElement { .. } => {
                    ExitCode::Quality
                }
                CoreError::Projection(_) => ExitCode::Projection,
                CoreError::SingularSystem(_) | CoreError::NoConvergence { .. } => ExitCode::Solver,
                _ => ExitCode::Usage,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

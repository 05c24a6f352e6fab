use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Core(#[from] binmix_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("check failed: {0}")]
    Failed(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Process exit status: 2 bad input, 3 solver failure, 4 failed check,
    /// 1 IO or format problems.
    pub fn exit_code(&self) -> i32 {
        use binmix_core::Error as C;
        match self {
            Error::Parse { .. } => 2,
            Error::Core(C::Assertion(_)) | Error::Failed(_) => 4,
            Error::Core(e) if e.is_solver_failure() => 3,
            Error::Core(C::IncompatibleRhs { .. }) => 3,
            Error::Core(_) => 2,
            Error::Io { .. } | Error::Format { .. } => 1,
        }
    }
}

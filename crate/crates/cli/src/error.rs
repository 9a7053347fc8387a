use std::path::{Path, PathBuf};

/// Harness failures, grouped by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Trace {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Core(#[from] arise_core::Error),
    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn trace(path: &Path, line: usize, message: impl Into<String>) -> Self {
        HarnessError::Trace {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse(_) | HarnessError::Invalid(_) => 2,
            _ => 1,
        }
    }
}

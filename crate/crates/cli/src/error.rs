use std::path::PathBuf;

use ofbmkit::io::IoError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const MODEL: i32 = 3;
    pub const DATA: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    File { path: PathBuf, source: IoError },
    #[error(transparent)]
    Core(#[from] ofbmkit::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn file(path: impl Into<PathBuf>, source: impl Into<IoError>) -> Self {
        CliError::File {
            path: path.into(),
            source: source.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::File { .. } => exit::USAGE,
            CliError::Core(e) if e.is_model_error() => exit::MODEL,
            CliError::Core(_) => exit::DATA,
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

use std::io;
use std::path::Path;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags or flag values; exit code 2.
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] expgrad::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{path}: {source}")]
    File { path: String, source: io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Core(e) => e.kind(),
            CliError::Io(_) | CliError::File { .. } => "IoError",
            CliError::Json(_) => "JsonError",
        }
    }

    /// One-line JSON object for standard error.
    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches `path` to an I/O failure.
pub fn at_path(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::File { path: path.display().to_string(), source }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

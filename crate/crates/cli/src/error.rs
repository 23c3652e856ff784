use collinear_lens_core::{ErrorKind, LensError};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot read `{path}`: {message}")]
    Io { path: String, message: String },

    #[error("malformed CSV at row {row}{}: {message}", column.as_ref().map(|c| format!(", column `{c}`")).unwrap_or_default())]
    Csv {
        /// 1-based line number in the file, header included.
        row: usize,
        column: Option<String>,
        message: String,
    },

    #[error(transparent)]
    Lens(#[from] LensError),
}

impl CliError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            CliError::Usage(_) | CliError::Config(_) => ErrorKind::Config,
            CliError::Io { .. } | CliError::Csv { .. } => ErrorKind::Data,
            CliError::Lens(e) => e.kind(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config(_) => "invalid_config",
            CliError::Io { .. } => "io_error",
            CliError::Csv { .. } => "malformed_csv",
            CliError::Lens(e) => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }

    /// Object written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind() {
            ErrorKind::Config => "config",
            ErrorKind::Data => "data",
            ErrorKind::Numerical => "numerical",
        };
        json!({
            "error": {
                "code": self.code(),
                "kind": kind,
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

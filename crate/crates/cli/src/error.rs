use std::path::PathBuf;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("{source_name}: line {line}, column {column}: {message}")]
    Config { source_name: String, line: usize, column: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] lorenz_core::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl ToolError {
    /// `1` for bad input, `2` for an internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Invariant(_) | ToolError::Core(lorenz_core::Error::LinkedIntervalsDetected { .. }) => 2,
            _ => 1,
        }
    }

    pub(crate) fn from_json(source_name: &str, e: serde_json::Error) -> Self {
        ToolError::Config {
            source_name: source_name.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ToolError>;

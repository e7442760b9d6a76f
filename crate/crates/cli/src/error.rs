use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}:{line}:{column}: {message}")]
    Json {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("io: {0}")]
    Io(String),
    #[error("config: {0}")]
    Config(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn compute(e: impl std::fmt::Display) -> CliError {
        CliError::Compute(e.to_string())
    }

    /// The JSON document written to stderr.
    pub fn to_json(&self) -> Value {
        match self {
            CliError::Json {
                source_name,
                line,
                column,
                message,
            } => json!({
                "error": "json",
                "source": source_name,
                "line": line,
                "column": column,
                "message": message,
            }),
            CliError::Io(m) => json!({ "error": "io", "message": m }),
            CliError::Config(m) => json!({ "error": "config", "message": m }),
            CliError::Usage(m) => json!({ "error": "usage", "message": m }),
            CliError::Compute(m) => json!({ "error": "compute", "message": m }),
        }
    }
}

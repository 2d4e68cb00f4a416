use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Flags that do not apply to the chosen experiment, or bad values.
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qriopt_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

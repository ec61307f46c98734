use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] diaggate::Error),

    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("parse error: {0}")]
    Parse(String),

    /// A numerical check ran to completion and failed.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed(_) => 1,
            _ => 2,
        }
    }
}

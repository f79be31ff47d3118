use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("property check failed: {0}")]
    Propcheck(String),

    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Propcheck(_) => 1,
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
        }
    }

    pub fn config(e: impl ToString) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn solver(e: impl ToString) -> Self {
        CliError::Solver(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

use std::io;
use std::path::PathBuf;

use chua_sync_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const UNCERTIFIED: u8 = 1;
    pub const INPUT: u8 = 2;
    pub const NUMERICAL: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: io::Error },
    #[error("cannot parse config: {0}")]
    ConfigParse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigRead { .. } | CliError::ConfigParse(_) | CliError::Validation(_) => {
                exit::INPUT
            }
            CliError::Core(e) => match e {
                CoreError::EigensolverFailure { .. }
                | CoreError::NonFiniteState { .. }
                | CoreError::DegenerateWindow
                | CoreError::NonFiniteInput => exit::NUMERICAL,
                _ => exit::INPUT,
            },
            CliError::Output { .. } | CliError::Csv(_) => exit::NUMERICAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

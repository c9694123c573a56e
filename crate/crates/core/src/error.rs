use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: line {line}: {message}")]
    Validation {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Budget(#[from] BudgetExhausted),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// The call meter refused a recommender invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("recommender budget exhausted after {calls_used} calls")]
pub struct BudgetExhausted {
    pub calls_used: u64,
}

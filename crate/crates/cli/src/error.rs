//! CLI error type and the exit-code contract: 0 success, 1 any failed row or
//! runtime failure, 2 configuration errors (including argument parsing,
//! which clap already exits 2 on).

use siolab_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("{0} sweep row(s) failed")]
    RowFailures(usize),

    #[error("zero denominator in ratio (norm below 1e-12)")]
    ZeroDenominator,

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

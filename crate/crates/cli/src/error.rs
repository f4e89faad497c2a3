use thiserror::Error;

use crate::scenario::ScenarioError;

pub const EXIT_IO: u8 = 1;

/// Errors that stop a command before it produces a result. Gate and
/// numerical failures are reported through `Outcome::code` instead, since
/// their output is still written.
#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        EXIT_IO
    }
}

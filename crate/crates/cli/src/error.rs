use std::path::PathBuf;

use kwh_core::kframe::KFrameError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("missing operand: {0}")]
    MissingOperand(String),
    #[error("unknown demo `{0}` (expected block-basis, douglas or sandwich)")]
    UnknownDemo(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] KFrameError),
}

impl CliError {
    /// Every error is an input or configuration problem.
    pub fn exit_code(&self) -> i32 {
        2
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<kwh_core::gabor::GaborError> for CliError {
    fn from(e: kwh_core::gabor::GaborError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<kwh_core::operators::OperatorError> for CliError {
    fn from(e: kwh_core::operators::OperatorError) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

//! Std companion to the core library: on-disk formats and the command
//! implementations behind the `smtm` binary.

pub mod formats;
pub mod ops;

use smtm_core::sampler::ChainError;

/// Errors carry their process exit code: 2 usage or configuration, 3 data,
/// 4 internal consistency fault. Success is 0.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    pub fn usage(msg: impl Into<String>) -> CliError {
        CliError::Usage(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> CliError {
        CliError::Data(msg.into())
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> CliError {
        match e {
            // A sampler fault means our own bookkeeping broke, not the input.
            ChainError::Fault(f) => CliError::Internal(f.to_string()),
            ChainError::Promotion(p) => CliError::Data(p.to_string()),
            ChainError::VectorsRequired => CliError::Usage(e.to_string()),
        }
    }
}

/// Missing paths are the caller pointing at nothing (usage); everything else
/// that goes wrong while touching `path` is a data problem.
pub fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    if e.kind() == std::io::ErrorKind::NotFound {
        CliError::Usage(format!("{}: file not found", path.display()))
    } else {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use neurasim::engine::SimError;
use neurasim::isa::IsaError;
use neurasim::mapping::MappingError;
use neurasim::matio::MatrixError;
use neurasim::oracle::OracleError;
use neurasim::smash::SmashError;
use neurasim::uarch::UarchError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A result disagreed with its oracle or a run broke an invariant.
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verify(_) => 1,
            Self::Usage(_) => 2,
            Self::Io(_) => 3,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Io(_) | MatrixError::Parse { .. } => Self::Io(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(_) | SimError::Mapping(_) | SimError::Oracle(_) => Self::Usage(e.to_string()),
            SimError::Uarch(UarchError::Config(_)) => Self::Usage(e.to_string()),
            SimError::Isa(IsaError::TagOverflow { .. }) => Self::Usage(e.to_string()),
            _ => Self::Verify(e.to_string()),
        }
    }
}

impl From<UarchError> for CliError {
    fn from(e: UarchError) -> Self {
        SimError::from(e).into()
    }
}

impl From<IsaError> for CliError {
    fn from(e: IsaError) -> Self {
        match e {
            IsaError::TraceVersion { .. } | IsaError::TraceTruncated { .. } | IsaError::TraceCorrupt { .. } => {
                Self::Io(e.to_string())
            }
            IsaError::Replay(_) | IsaError::MemoryFault { .. } => Self::Verify(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<MappingError> for CliError {
    fn from(e: MappingError) -> Self {
        Self::Usage(e.to_string())
    }
}

impl From<SmashError> for CliError {
    fn from(e: SmashError) -> Self {
        match e {
            SmashError::Overflow { .. } => Self::Verify(e.to_string()),
            _ => Self::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

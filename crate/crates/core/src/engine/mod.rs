// SPDX-License-Identifier: Apache-2.0

//! Cycle-driven simulation: dispatcher, DRAM channel model, the main loop
//! and its statistics.

mod channel;
mod dispatch;
mod sim;
mod stats;

pub use self::channel::{ChannelParams, ChannelStats, Completion, MemChannelModel};
pub use self::dispatch::Dispatcher;
pub use self::sim::{default_window_budget, lower_for_chip, simulate, SimOptions, SimResult, SimRun};
pub use self::stats::{
    CpiHistogram, LoadSummary, Loads, MemorySystemStats, NetworkStats, Sample, SimStats,
    StallStats, TimeSeries,
};

use thiserror::Error;

use crate::isa::IsaError;
use crate::mapping::MappingError;
use crate::oracle::OracleError;
use crate::uarch::UarchError;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Uarch(#[from] UarchError),
    #[error(transparent)]
    Isa(#[from] IsaError),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no progress for too long at cycle {cycle}\n{dump}")]
    Deadlock { cycle: u64, dump: String },
    #[error("simulation exceeded {cycles} cycles")]
    Timeout { cycles: u64 },
    #[error("conservation check failed: {0}")]
    Conservation(String),
}

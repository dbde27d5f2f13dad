// SPDX-License-Identifier: Apache-2.0

//! Structural models: multiplier cores, hash-accumulator memories, torus
//! routers and memory controllers, composed into a chip.
//!
//! Every component is a plain state machine stepped once per cycle by the
//! engine. Components talk only through packet queues the engine moves.

mod chip;
mod config;
mod core;
mod mem;
mod memctrl;
pub mod packet;
pub mod router;
pub mod topology;

use thiserror::Error;

pub use self::chip::{build_chip, Chip, NetStep};
pub use self::config::{
    ChannelConfig, ChipConfig, ChipTotals, CoreConfig, Latencies, MemConfig, WritebackPath,
    CONFIG_NAMES,
};
pub use self::core::{resident_issue_latency, CoreStats, Mmh4Job, NeuraCore};
pub use self::mem::{fmix32, EvictionMode, HashLine, MemStats, NeuraMem, WritebackRoute};
pub use self::memctrl::{output_granule, McStats, MemController};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UarchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(
        "HashPad overflow in memory {mem}, engine {engine}, tag {tag:#010x}: no free line on the probe sequence (window sized too large for the pad)"
    )]
    HashPadOverflow { mem: usize, engine: usize, tag: u32 },
    #[error("memory {mem}: HACC for tag {tag:#010x} arrived after its counter reached zero")]
    Counter { mem: usize, tag: u32 },
}

// SPDX-License-Identifier: Apache-2.0

//! Assignment of HACC instructions to hash memories and MMH4 instructions to
//! cores, with load statistics and heat maps.

mod heatmap;
mod mapper;
mod stats;

pub use heatmap::{map_program, Heatmap, MappingRun};
pub use mapper::{
    drhm_high, drhm_low, gamma_for_epoch, modular, GammaState, Mapper, MapperConfig, Reseed,
    Strategy, MODULAR_PRIME,
};
pub use stats::{load_stats, LoadHistogram};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MappingError {
    #[error("load statistics need at least one item")]
    Empty,
    #[error("invalid mapper configuration: {0}")]
    Config(String),
    #[error("malformed heat map: {0}")]
    Parse(String),
}

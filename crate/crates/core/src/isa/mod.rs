// SPDX-License-Identifier: Apache-2.0

//! The two-instruction accelerator ISA.
//!
//! `MMH4` multiplies up to four elements of one A column against up to four
//! elements of the matching B row and dispatches one `HACC` per product.
//! `HACC` carries `(TAG, DATA, COUNTER)` to a hash-accumulator memory, where
//! the counter tells the memory how many further contributions to expect
//! for that output element.

mod instr;
mod lower;
mod memory;
mod replay;
mod tag;
mod trace;

pub use instr::{HaccInstr, Instr, Mmh4Instr, OPCODE_BARRIER, OPCODE_HACC, OPCODE_MMH4};
pub use lower::{expand_mmh4, lower_spgemm, LowerParams, Program};
pub use memory::{MemoryImage, Region, RegionInfo};
pub use replay::{replay, ReplayOutput};
pub use tag::TagLayout;
pub use trace::{decode_binary, encode_binary, read_trace, write_trace, TRACE_VERSION};

use thiserror::Error;

use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IsaError {
    #[error("({row}, {col}) does not fit tag layout {row_bits}/{col_bits}; use a wider layout")]
    TagOverflow {
        row: usize,
        col: usize,
        row_bits: u32,
        col_bits: u32,
    },
    #[error("invalid tag layout: {0}")]
    Layout(String),
    #[error("memory fault at address {addr:#x}")]
    MemoryFault { addr: u64 },
    #[error("trace version {found} is not supported (expected {expected})")]
    TraceVersion { found: u32, expected: u32 },
    #[error("trace truncated: header declares {expected} records, found {found}")]
    TraceTruncated { expected: usize, found: usize },
    #[error("trace record {record}: {msg}")]
    TraceCorrupt { record: usize, msg: String },
    #[error("replay error: {0}")]
    Replay(String),
    #[error(transparent)]
    Plan(#[from] OracleError),
}

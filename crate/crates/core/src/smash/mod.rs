// SPDX-License-Identifier: Apache-2.0

//! Multithreaded hash-based SpGEMM on the host.
//!
//! Output rows are grouped into windows whose hashtables fit a scratchpad
//! budget. Each window runs three phases: prefetch (allocate and clear the
//! row tables, stage the A rows), hash (accumulate every partial product) and
//! write-back (drain the tables into sorted CSR rows). The versions differ in
//! how hash work is split across workers and whether phases overlap.

mod kernel;
mod table;

pub use kernel::{
    run_pipelined, run_tokenized_window, smash_spgemm, Half, PhaseLedger, PhaseUnits, ProbeStats,
    SmashConfig, SmashOutput, SmashReport, SmashVersion, StepRecord, Token, TokenAudit,
};
pub use table::{pack_tag, unpack_tag, ProbeOutcome, ScratchpadHashTable, TableFull, EMPTY_TAG};

use thiserror::Error;

use crate::oracle::OracleError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmashError {
    #[error("hashtable overflow in window {window}, row {row}")]
    Overflow { window: usize, row: usize },
    #[error(transparent)]
    Plan(#[from] OracleError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

pub const OPCODE_MMH4: u8 = 0x01;
pub const OPCODE_HACC: u8 = 0x02;
pub const OPCODE_BARRIER: u8 = 0x03;

/// Multiply a tile of up to four A-column elements by up to four B-row
/// elements.
///
/// The four operand addresses are byte offsets from `base_addr`: `n_a` A
/// values, `n_b` B column indices, `n_b` B values and 16 roll counters
/// (lane `i*4 + j`), all 8-byte words. The remaining fields are lowering
/// metadata: the A row of each A lane, the A column `k` and the column group
/// used for core assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mmh4Instr {
    pub opcode: u8,
    pub base_addr: u64,
    pub a_data_addr: u64,
    pub b_col_ind_addr: u64,
    pub b_data_addr: u64,
    pub roll_counter_addr: u64,
    pub n_a: u8,
    pub n_b: u8,
    pub a_col: u32,
    pub group: u32,
    pub a_rows: [u32; 4],
}

impl Mmh4Instr {
    pub fn hacc_count(&self) -> usize {
        self.n_a as usize * self.n_b as usize
    }

    /// `(absolute address, bytes)` of the four operand reads.
    pub fn operand_reads(&self) -> [(u64, u64); 4] {
        [
            (self.base_addr + self.a_data_addr, 8 * self.n_a as u64),
            (self.base_addr + self.b_col_ind_addr, 8 * self.n_b as u64),
            (self.base_addr + self.b_data_addr, 8 * self.n_b as u64),
            (self.base_addr + self.roll_counter_addr, 8 * 16),
        ]
    }
}

/// Hash-accumulate one partial product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaccInstr<T> {
    pub tag: u32,
    pub data: T,
    /// Contributions still expected after this one is merged.
    pub counter: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instr<T> {
    Mmh4(Mmh4Instr),
    Hacc(HaccInstr<T>),
    /// End of an output-row window; all accumulation state is flushed.
    Barrier { window: u32 },
}

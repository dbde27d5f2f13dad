// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::IsaError;

/// Split of the 32-bit TAG into a row field (high bits) and a column field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagLayout {
    pub row_bits: u32,
    pub col_bits: u32,
}

impl Default for TagLayout {
    fn default() -> Self {
        Self::DEFAULT
    }
}

fn bits_for(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

impl TagLayout {
    pub const DEFAULT: TagLayout = TagLayout {
        row_bits: 16,
        col_bits: 16,
    };

    pub fn new(row_bits: u32, col_bits: u32) -> Result<Self, IsaError> {
        if row_bits + col_bits != 32 {
            return Err(IsaError::Layout(format!("{row_bits}+{col_bits} bits is not 32")));
        }
        Ok(Self { row_bits, col_bits })
    }

    /// The default 16/16 split when it fits, otherwise the narrowest column
    /// field that holds `n_cols` with the rest for rows.
    pub fn fit(n_rows: usize, n_cols: usize) -> Result<Self, IsaError> {
        if Self::DEFAULT.fits(n_rows, n_cols) {
            return Ok(Self::DEFAULT);
        }
        let col_bits = bits_for(n_cols).max(1);
        let layout = Self {
            row_bits: 32u32.saturating_sub(col_bits),
            col_bits,
        };
        if col_bits >= 32 || !layout.fits(n_rows, n_cols) {
            return Err(IsaError::Layout(format!(
                "a {n_rows}x{n_cols} problem does not fit a 32-bit tag"
            )));
        }
        Ok(layout)
    }

    pub fn fits(&self, n_rows: usize, n_cols: usize) -> bool {
        (n_rows as u64) <= 1u64 << self.row_bits && (n_cols as u64) <= 1u64 << self.col_bits
    }

    pub fn encode(&self, row: usize, col: usize) -> Result<u32, IsaError> {
        if (row as u64) >> self.row_bits != 0 || (col as u64) >> self.col_bits != 0 {
            return Err(IsaError::TagOverflow {
                row,
                col,
                row_bits: self.row_bits,
                col_bits: self.col_bits,
            });
        }
        Ok((((row as u64) << self.col_bits) | col as u64) as u32)
    }

    pub fn decode(&self, tag: u32) -> (usize, usize) {
        let col_mask = ((1u64 << self.col_bits) - 1) as u32;
        ((((tag as u64) >> self.col_bits) as usize), (tag & col_mask) as usize)
    }
}

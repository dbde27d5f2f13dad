// SPDX-License-Identifier: Apache-2.0

//! Matrix ingestion, generation and storage formats.

mod coo;
mod csr;
mod dense;
mod mapcsr;
mod mtx;
mod rmat;

pub use coo::CooMatrix;
pub use csr::{CscMatrix, CsrMatrix, SparseRows};
pub use dense::DenseMatrix;
pub use mapcsr::{MapCsrMatrix, DEFAULT_BANK_WIDTH, NO_REPLICA};
pub use mtx::{parse_matrix_market, read_matrix_market, write_matrix_market, MtxField, MtxSymmetry};
pub use rmat::{generate_rmat, randomize_values, RmatParams};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("entry ({row}, {col}) outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("replication ratio undefined for a matrix with no nonzeros")]
    UndefinedRatio,
    #[error("dimension {0} does not fit 32-bit indices")]
    TooLarge(usize),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Checks that a dimension fits the 32-bit index space used by all formats.
pub(crate) fn check_dim(n: usize) -> Result<(), MatrixError> {
    if n > u32::MAX as usize {
        Err(MatrixError::TooLarge(n))
    } else {
        Ok(())
    }
}

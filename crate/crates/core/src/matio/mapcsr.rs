// SPDX-License-Identifier: Apache-2.0

//! Memory-aligned parallel CSR.
//!
//! Five arrays instead of three: per-row element counts, offsets to each row's
//! primary copy, offsets to an optional replica, and the backing column/value
//! arrays. Rows may be stored in any order, every row starts on a
//! `bank_width` boundary (gaps are filled with explicit zero padding) and
//! selected rows are stored twice.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{CsrMatrix, MatrixError, SparseRows};
use crate::Scalar;

/// Replica offset of a row that has no replica.
pub const NO_REPLICA: usize = usize::MAX;

/// Default alignment: one 64-byte line of 32-bit index + 32-bit value pairs.
pub const DEFAULT_BANK_WIDTH: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    elems_per_row: Vec<u32>,
    row_offsets: Vec<usize>,
    replica_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<T>,
    pad_count: usize,
    replica_nnz: usize,
    bank_width: usize,
}

impl<T: Scalar> MapCsrMatrix<T> {
    /// Storage order used when the caller has no placement policy: every row
    /// in index order, followed by the replicas in index order.
    pub fn default_placement(n_rows: usize, replicate_rows: &BTreeSet<usize>) -> Vec<usize> {
        (0..n_rows).chain(replicate_rows.iter().copied()).collect()
    }

    /// Lays out `m` following `placement`, a storage-order list in which every
    /// row appears once and every replicated row exactly twice. The first
    /// occurrence is the primary copy.
    pub fn build(
        m: &CsrMatrix<T>,
        bank_width: usize,
        replicate_rows: &BTreeSet<usize>,
        placement: &[usize],
    ) -> Result<Self, MatrixError> {
        let n = m.n_rows();
        if bank_width == 0 {
            return Err(MatrixError::Config("bank_width must be positive".into()));
        }
        if let Some(&r) = replicate_rows.iter().next_back().filter(|&&r| r >= n) {
            return Err(MatrixError::Config(format!("replicated row {r} out of range")));
        }
        let mut seen = vec![0u8; n];
        for &r in placement {
            if r >= n {
                return Err(MatrixError::Config(format!("placement names row {r} out of range")));
            }
            seen[r] += 1;
        }
        for (r, &count) in seen.iter().enumerate() {
            let want = if replicate_rows.contains(&r) { 2 } else { 1 };
            if count != want {
                return Err(MatrixError::Config(format!(
                    "placement holds row {r} {count} times, expected {want}"
                )));
            }
        }

        let mut elems_per_row = vec![0u32; n];
        let mut row_offsets = vec![NO_REPLICA; n];
        let mut replica_offsets = vec![NO_REPLICA; n];
        let mut col_indices = Vec::with_capacity(m.nnz());
        let mut values = Vec::with_capacity(m.nnz());
        let mut pad_count = 0;
        let mut replica_nnz = 0;

        for &r in placement {
            let (cols, vals) = m.row(r);
            let aligned = col_indices.len().div_ceil(bank_width) * bank_width;
            if !cols.is_empty() {
                let pad = aligned - col_indices.len();
                col_indices.resize(aligned, 0);
                values.resize(aligned, T::zero());
                pad_count += pad;
                col_indices.extend_from_slice(cols);
                values.extend_from_slice(vals);
            }
            if row_offsets[r] == NO_REPLICA {
                row_offsets[r] = aligned;
                elems_per_row[r] = cols.len() as u32;
            } else {
                replica_offsets[r] = aligned;
                replica_nnz += cols.len();
            }
        }

        Ok(Self {
            n_rows: n,
            n_cols: m.n_cols(),
            elems_per_row,
            row_offsets,
            replica_offsets,
            col_indices,
            values,
            pad_count,
            replica_nnz,
            bank_width,
        })
    }

    /// `build` with [`Self::default_placement`].
    pub fn from_csr(
        m: &CsrMatrix<T>,
        bank_width: usize,
        replicate_rows: &BTreeSet<usize>,
    ) -> Result<Self, MatrixError> {
        let placement = Self::default_placement(m.n_rows(), replicate_rows);
        Self::build(m, bank_width, replicate_rows, &placement)
    }

    pub fn nnz(&self) -> usize {
        self.elems_per_row.iter().map(|&e| e as usize).sum()
    }
    pub fn pad_count(&self) -> usize {
        self.pad_count
    }
    pub fn replica_nnz(&self) -> usize {
        self.replica_nnz
    }
    pub fn bank_width(&self) -> usize {
        self.bank_width
    }
    pub fn elems_per_row(&self) -> &[u32] {
        &self.elems_per_row
    }
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
    pub fn replica_offsets(&self) -> &[usize] {
        &self.replica_offsets
    }
    pub fn storage_len(&self) -> usize {
        self.col_indices.len()
    }

    /// `(nnz + replicated nnz + padding) / nnz`.
    pub fn replication_ratio(&self) -> Result<f64, MatrixError> {
        let nnz = self.nnz();
        if nnz == 0 {
            return Err(MatrixError::UndefinedRatio);
        }
        Ok((nnz + self.replica_nnz + self.pad_count) as f64 / nnz as f64)
    }

    pub fn replica_row(&self, i: usize) -> Option<(&[u32], &[T])> {
        let off = self.replica_offsets[i];
        (off != NO_REPLICA).then(|| self.segment(off, self.elems_per_row[i] as usize))
    }

    fn segment(&self, off: usize, len: usize) -> (&[u32], &[T]) {
        if len == 0 {
            return (&[], &[]);
        }
        (&self.col_indices[off..off + len], &self.values[off..off + len])
    }

    /// Back to plain CSR, reading primary copies.
    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut offsets = Vec::with_capacity(self.n_rows + 1);
        let mut cols = Vec::with_capacity(self.nnz());
        let mut vals = Vec::with_capacity(self.nnz());
        offsets.push(0);
        for i in 0..self.n_rows {
            let (c, v) = self.row(i);
            cols.extend_from_slice(c);
            vals.extend_from_slice(v);
            offsets.push(cols.len());
        }
        CsrMatrix::from_parts_unchecked(self.n_rows, self.n_cols, offsets, cols, vals)
    }
}

impl<T: Scalar> SparseRows<T> for MapCsrMatrix<T> {
    fn n_rows(&self) -> usize {
        self.n_rows
    }
    fn n_cols(&self) -> usize {
        self.n_cols
    }
    fn row(&self, i: usize) -> (&[u32], &[T]) {
        self.segment(self.row_offsets[i], self.elems_per_row[i] as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::CooMatrix;

    fn rows_4_3_3() -> CsrMatrix<f64> {
        let mut e = Vec::new();
        for c in 0..4 {
            e.push((0, c, 1.0 + c as f64));
        }
        for c in 0..3 {
            e.push((1, c, 10.0 + c as f64));
            e.push((2, c + 1, 20.0 + c as f64));
        }
        CooMatrix::from_entries(3, 5, e).unwrap().to_csr()
    }

    #[test]
    fn unreplicated_unit_bank_ratio_is_one() {
        let m = rows_4_3_3();
        let map = MapCsrMatrix::from_csr(&m, 1, &BTreeSet::new()).unwrap();
        assert_eq!(map.replication_ratio().unwrap(), 1.0);
        assert_eq!(map.to_csr(), m);
    }

    #[test]
    fn worked_ratio_one_point_six() {
        // nnz 10, row 0 (4 nnz) replicated, two padding zeros at bank width 2.
        let m = rows_4_3_3();
        let rep: BTreeSet<usize> = [0].into();
        let map = MapCsrMatrix::build(&m, 2, &rep, &[0, 1, 2, 0]).unwrap();
        assert_eq!(map.nnz(), 10);
        assert_eq!(map.replica_nnz(), 4);
        assert_eq!(map.pad_count(), 2);
        assert_eq!(map.replication_ratio().unwrap(), 1.6);
        assert_eq!(map.replica_row(0).unwrap(), map.row(0));
        assert!(map.row_offsets().iter().all(|o| o % 2 == 0));
    }

    #[test]
    fn replica_may_precede_primary_rows() {
        let m = rows_4_3_3();
        let rep: BTreeSet<usize> = [2].into();
        let map = MapCsrMatrix::build(&m, 4, &rep, &[2, 1, 0, 2]).unwrap();
        assert_eq!(map.row_offsets()[2], 0);
        assert_eq!(map.replica_offsets()[2], 12);
        assert_eq!(map.replica_offsets()[0], NO_REPLICA);
        assert_eq!(map.to_csr(), m);
    }

    #[test]
    fn bad_placement_is_config_error() {
        let m = rows_4_3_3();
        let rep: BTreeSet<usize> = [0].into();
        assert!(matches!(
            MapCsrMatrix::build(&m, 1, &rep, &[0, 1, 2]),
            Err(MatrixError::Config(_))
        ));
        assert!(matches!(
            MapCsrMatrix::build(&m, 1, &BTreeSet::new(), &[0, 1, 1, 2]),
            Err(MatrixError::Config(_))
        ));
        let out_of_range: BTreeSet<usize> = [7].into();
        assert!(MapCsrMatrix::from_csr(&m, 1, &out_of_range).is_err());
    }

    #[test]
    fn empty_matrix_ratio_undefined() {
        let m = CsrMatrix::<f64>::from_coo(&CooMatrix::new(3, 3).unwrap());
        let map = MapCsrMatrix::from_csr(&m, 16, &BTreeSet::new()).unwrap();
        assert_eq!(map.replication_ratio(), Err(MatrixError::UndefinedRatio));
    }
}

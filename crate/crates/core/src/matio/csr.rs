// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{CooMatrix, DenseMatrix, MatrixError};
use crate::Scalar;

/// Read access to a row-compressed matrix. Implemented by CSR and MAP-CSR so
/// kernels can consume either.
pub trait SparseRows<T> {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// Column indices and values of row `i`, columns strictly increasing.
    fn row(&self, i: usize) -> (&[u32], &[T]);

    fn row_nnz(&self, i: usize) -> usize {
        self.row(i).0.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    values: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CscMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    col_offsets: Vec<usize>,
    row_indices: Vec<u32>,
    values: Vec<T>,
}

/// Validates one compressed axis: offsets monotone from 0 to nnz, and indices
/// strictly increasing and in range within every segment.
fn check_compressed(
    offsets: &[usize],
    indices: &[u32],
    n_values: usize,
    n_major: usize,
    n_minor: usize,
) -> Result<(), MatrixError> {
    let bad = |msg: String| Err(MatrixError::Config(msg));
    if offsets.len() != n_major + 1 {
        return bad(format!("expected {} offsets, got {}", n_major + 1, offsets.len()));
    }
    if offsets[0] != 0 || offsets[n_major] != indices.len() || indices.len() != n_values {
        return bad("offsets must start at 0 and end at nnz".into());
    }
    for (seg, w) in offsets.windows(2).enumerate() {
        if w[0] > w[1] {
            return bad(format!("offsets decrease at segment {seg}"));
        }
        let idx = &indices[w[0]..w[1]];
        if idx.windows(2).any(|p| p[0] >= p[1]) {
            return bad(format!("indices not strictly increasing in segment {seg}"));
        }
        if idx.last().is_some_and(|&i| i as usize >= n_minor) {
            return bad(format!("index out of range in segment {seg}"));
        }
    }
    Ok(())
}

/// Counting-sort compression of normalized triples along the chosen axis.
fn compress<T: Scalar>(
    n_major: usize,
    triples: impl Iterator<Item = (u32, u32, T)> + Clone,
) -> (Vec<usize>, Vec<u32>, Vec<T>) {
    let mut offsets = vec![0usize; n_major + 1];
    for (major, _, _) in triples.clone() {
        offsets[major as usize + 1] += 1;
    }
    for i in 0..n_major {
        offsets[i + 1] += offsets[i];
    }
    let nnz = offsets[n_major];
    let mut cursor = offsets.clone();
    let mut indices = vec![0u32; nnz];
    let mut values = vec![T::zero(); nnz];
    for (major, minor, v) in triples {
        let slot = cursor[major as usize];
        indices[slot] = minor;
        values[slot] = v;
        cursor[major as usize] += 1;
    }
    (offsets, indices, values)
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        values: Vec<T>,
    ) -> Result<Self, MatrixError> {
        check_compressed(&row_offsets, &col_indices, values.len(), n_rows, n_cols)?;
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub(crate) fn from_parts_unchecked(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<u32>,
        values: Vec<T>,
    ) -> Self {
        debug_assert!(check_compressed(&row_offsets, &col_indices, values.len(), n_rows, n_cols).is_ok());
        Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Expects a normalized COO (sorted, no duplicates).
    pub fn from_coo(m: &CooMatrix<T>) -> Self {
        debug_assert!(m.is_normalized());
        let (row_offsets, col_indices, values) = compress(m.n_rows, m.entries.iter().copied());
        Self {
            n_rows: m.n_rows,
            n_cols: m.n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_coo(&CooMatrix::identity(n))
    }

    pub fn from_dense(d: &DenseMatrix<T>) -> Self {
        let mut offsets = Vec::with_capacity(d.rows() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        offsets.push(0);
        for i in 0..d.rows() {
            for (j, &v) in d.row(i).iter().enumerate() {
                if v != T::zero() {
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        Self::from_parts_unchecked(d.rows(), d.cols(), offsets, cols, vals)
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }
    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&(j as u32)).ok().map(|p| vals[p])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, T)> + Clone + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c as usize, v))
        })
    }

    pub fn to_coo(&self) -> CooMatrix<T> {
        CooMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.iter().map(|(i, j, v)| (i as u32, j as u32, v)).collect(),
        }
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.iter() {
            *d.get_mut(i, j) = v;
        }
        d
    }

    pub fn to_csc(&self) -> CscMatrix<T> {
        let (col_offsets, row_indices, values) = compress(
            self.n_cols,
            self.iter().map(|(i, j, v)| (j as u32, i as u32, v)),
        );
        CscMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            col_offsets,
            row_indices,
            values,
        }
    }

    pub fn transpose(&self) -> Self {
        let csc = self.to_csc();
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets: csc.col_offsets,
            col_indices: csc.row_indices,
            values: csc.values,
        }
    }

    pub fn map_values<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Same sparsity pattern and column order in every row.
    pub fn same_pattern<U>(&self, other: &CsrMatrix<U>) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }
}

impl<T: Scalar> SparseRows<T> for CsrMatrix<T> {
    fn n_rows(&self) -> usize {
        self.n_rows
    }
    fn n_cols(&self) -> usize {
        self.n_cols
    }
    fn row(&self, i: usize) -> (&[u32], &[T]) {
        let (s, e) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[s..e], &self.values[s..e])
    }
}

impl<T: Scalar> CscMatrix<T> {
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        col_offsets: Vec<usize>,
        row_indices: Vec<u32>,
        values: Vec<T>,
    ) -> Result<Self, MatrixError> {
        check_compressed(&col_offsets, &row_indices, values.len(), n_cols, n_rows)?;
        Ok(Self {
            n_rows,
            n_cols,
            col_offsets,
            row_indices,
            values,
        })
    }

    pub fn from_coo(m: &CooMatrix<T>) -> Self {
        debug_assert!(m.is_normalized());
        // Row-major input, so each column segment receives rows in increasing order.
        let (col_offsets, row_indices, values) =
            compress(m.n_cols, m.entries.iter().map(|&(r, c, v)| (c, r, v)));
        Self {
            n_rows: m.n_rows,
            n_cols: m.n_cols,
            col_offsets,
            row_indices,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }
    pub fn nnz(&self) -> usize {
        self.row_indices.len()
    }
    pub fn col_offsets(&self) -> &[usize] {
        &self.col_offsets
    }
    pub fn row_indices(&self) -> &[u32] {
        &self.row_indices
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn col(&self, j: usize) -> (&[u32], &[T]) {
        let (s, e) = (self.col_offsets[j], self.col_offsets[j + 1]);
        (&self.row_indices[s..e], &self.values[s..e])
    }

    pub fn to_coo(&self) -> CooMatrix<T> {
        let mut m = CooMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: (0..self.n_cols)
                .flat_map(|j| {
                    let (rows, vals) = self.col(j);
                    rows.iter().zip(vals).map(move |(&r, &v)| (r, j as u32, v))
                })
                .collect(),
        };
        m.normalize();
        m
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for j in 0..self.n_cols {
            let (rows, vals) = self.col(j);
            for (&r, &v) in rows.iter().zip(vals) {
                *d.get_mut(r as usize, j) = v;
            }
        }
        d
    }
}

// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{check_dim, CscMatrix, CsrMatrix, DenseMatrix, MatrixError};
use crate::Scalar;

/// Coordinate-list matrix. After [`CooMatrix::normalize`] entries are sorted
/// row-major with no duplicate coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooMatrix<T> {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(u32, u32, T)>,
}

impl<T: Scalar> CooMatrix<T> {
    pub fn new(n_rows: usize, n_cols: usize) -> Result<Self, MatrixError> {
        check_dim(n_rows)?;
        check_dim(n_cols)?;
        Ok(Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        })
    }

    /// Builds and normalizes from raw triples, rejecting out-of-range indices.
    pub fn from_entries(
        n_rows: usize,
        n_cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self, MatrixError> {
        let mut m = Self::new(n_rows, n_cols)?;
        for (r, c, v) in entries {
            m.push(r, c, v)?;
        }
        m.normalize();
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            entries: (0..n as u32).map(|i| (i, i, T::one())).collect(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) -> Result<(), MatrixError> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(MatrixError::IndexOutOfBounds {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        self.entries.push((row as u32, col as u32, value));
        Ok(())
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Sorts row-major and sums duplicate coordinates.
    pub fn normalize(&mut self) {
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut out: Vec<(u32, u32, T)> = Vec::with_capacity(self.entries.len());
        for (r, c, v) in self.entries.drain(..) {
            match out.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => out.push((r, c, v)),
            }
        }
        self.entries = out;
    }

    pub fn is_normalized(&self) -> bool {
        self.entries
            .windows(2)
            .all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            entries: self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect(),
        };
        t.normalize();
        t
    }

    /// Converts every value with `f`, keeping the pattern.
    pub fn map_values<U: Scalar>(&self, mut f: impl FnMut(T) -> U) -> CooMatrix<U> {
        CooMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, f(v))).collect(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix<T> {
        CsrMatrix::from_coo(self)
    }

    pub fn to_csc(&self) -> CscMatrix<T> {
        CscMatrix::from_coo(self)
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for &(r, c, v) in &self.entries {
            let cell = d.get_mut(r as usize, c as usize);
            *cell += v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_sums_duplicates() {
        let m = CooMatrix::from_entries(2, 2, [(1, 0, 1.0), (0, 1, 2.0), (1, 0, 3.0)]).unwrap();
        assert_eq!(m.entries, vec![(0, 1, 2.0), (1, 0, 4.0)]);
        assert!(m.is_normalized());
    }

    #[test]
    fn rejects_out_of_range() {
        let err = CooMatrix::from_entries(2, 2, [(2, 0, 1.0f64)]).unwrap_err();
        assert!(matches!(err, MatrixError::IndexOutOfBounds { row: 2, .. }));
    }

    #[test]
    fn transpose_twice_is_identity() {
        let m = CooMatrix::from_entries(3, 2, [(0, 1, 1i64), (2, 0, 5)]).unwrap();
        assert_eq!(m.transpose().transpose(), m);
    }
}

// SPDX-License-Identifier: Apache-2.0

use rayon::prelude::*;

use super::{check_inner, OracleError};
use crate::matio::{CsrMatrix, SparseRows};
use crate::Scalar;

/// Row-wise product `C[i,:] = sum_k A[i,k] * B[k,:]` with a dense
/// accumulator per row. Any coordinate that receives a partial product is a
/// structural nonzero, even if the values cancel to zero.
pub fn spgemm_gustavson<T: Scalar, A: SparseRows<T> + Sync>(
    a: &A,
    b: &CsrMatrix<T>,
) -> Result<CsrMatrix<T>, OracleError> {
    check_inner((a.n_rows(), a.n_cols()), (b.n_rows(), b.n_cols()))?;
    let n = b.n_cols();
    let rows: Vec<(Vec<u32>, Vec<T>)> = (0..a.n_rows())
        .into_par_iter()
        .map_init(
            || (vec![T::zero(); n], vec![false; n]),
            |(acc, hit), i| {
                let mut cols = Vec::new();
                let (acols, avals) = a.row(i);
                for (&k, &av) in acols.iter().zip(avals) {
                    let (bcols, bvals) = b.row(k as usize);
                    for (&j, &bv) in bcols.iter().zip(bvals) {
                        let j = j as usize;
                        if !hit[j] {
                            hit[j] = true;
                            cols.push(j as u32);
                        }
                        acc[j] += av * bv;
                    }
                }
                cols.sort_unstable();
                let vals = cols
                    .iter()
                    .map(|&j| {
                        let j = j as usize;
                        hit[j] = false;
                        std::mem::replace(&mut acc[j], T::zero())
                    })
                    .collect();
                (cols, vals)
            },
        )
        .collect();

    let mut offsets = Vec::with_capacity(a.n_rows() + 1);
    offsets.push(0);
    let total: usize = rows.iter().map(|r| r.0.len()).sum();
    let mut cols = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    for (c, v) in rows {
        cols.extend(c);
        vals.extend(v);
        offsets.push(cols.len());
    }
    Ok(CsrMatrix::from_parts_unchecked(a.n_rows(), n, offsets, cols, vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::CooMatrix;

    #[test]
    fn identity_left_is_b() {
        let b = CooMatrix::from_entries(3, 4, [(0, 1, 2.0), (1, 3, -1.0), (2, 0, 4.0)])
            .unwrap()
            .to_csr();
        assert_eq!(spgemm_gustavson(&CsrMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn one_by_one() {
        let a = CooMatrix::from_entries(1, 1, [(0, 0, 2i64)]).unwrap().to_csr();
        let b = CooMatrix::from_entries(1, 1, [(0, 0, 3i64)]).unwrap().to_csr();
        assert_eq!(spgemm_gustavson(&a, &b).unwrap().get(0, 0), Some(6));
    }

    #[test]
    fn cancellation_keeps_structural_zero() {
        let a = CooMatrix::from_entries(1, 2, [(0, 0, 1.0), (0, 1, 1.0)]).unwrap().to_csr();
        let b = CooMatrix::from_entries(2, 1, [(0, 0, 2.0), (1, 0, -2.0)]).unwrap().to_csr();
        let c = spgemm_gustavson(&a, &b).unwrap();
        assert_eq!(c.nnz(), 1);
        assert_eq!(c.get(0, 0), Some(0.0));
    }
}

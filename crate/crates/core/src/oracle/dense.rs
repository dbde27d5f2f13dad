// SPDX-License-Identifier: Apache-2.0

use super::{check_inner, OracleError};
use crate::matio::DenseMatrix;
use crate::Scalar;

/// Textbook triple loop, accumulating each `C[i][j]` in increasing `k`.
pub fn spgemm_dense_oracle<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>, OracleError> {
    check_inner((a.rows(), a.cols()), (b.rows(), b.cols()))?;
    let mut c = DenseMatrix::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for j in 0..b.cols() {
            let mut acc = T::zero();
            for k in 0..a.cols() {
                acc += a.get(i, k) * b.get(k, j);
            }
            *c.get_mut(i, j) = acc;
        }
    }
    Ok(c)
}

/// Dense GEMM in i-k-j order, skipping zero left operands. Same sums as the
/// triple loop, faster on wide matrices.
pub fn dense_gemm<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
) -> Result<DenseMatrix<T>, OracleError> {
    check_inner((a.rows(), a.cols()), (b.rows(), b.cols()))?;
    let n = b.cols();
    let mut out = vec![T::zero(); a.rows() * n];
    for (i, crow) in out.chunks_mut(n.max(1)).enumerate().take(a.rows()) {
        for (k, &av) in a.row(i).iter().enumerate() {
            if av == T::zero() {
                continue;
            }
            for (c, &bv) in crow.iter_mut().zip(b.row(k)) {
                *c += av * bv;
            }
        }
    }
    Ok(DenseMatrix::from_vec(a.rows(), n, out).expect("shape"))
}

// SPDX-License-Identifier: Apache-2.0

use neurasim::matio::{CsrMatrix, SparseRows};
use neurasim::Scalar;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub row: usize,
    pub col: usize,
    pub expected: String,
    pub got: String,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}): expected {}, got {}", self.row, self.col, self.expected, self.got)
    }
}

/// First coordinate in row-major order where `got` differs from `want`,
/// absent entries reading as zero. Exact scalars must match bit for bit;
/// floats may differ by `tol` times the largest reference magnitude.
pub fn first_divergence<T: Scalar>(want: &CsrMatrix<T>, got: &CsrMatrix<T>, tol: f64) -> Option<Divergence> {
    if (want.n_rows(), want.n_cols()) != (got.n_rows(), got.n_cols()) {
        return Some(Divergence {
            row: want.n_rows().min(got.n_rows()),
            col: 0,
            expected: format!("{}x{}", want.n_rows(), want.n_cols()),
            got: format!("{}x{}", got.n_rows(), got.n_cols()),
        });
    }
    let scale = want.values().iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
    let same = |a: T, b: T| {
        if T::EXACT {
            a == b
        } else {
            (a.to_f64() - b.to_f64()).abs() <= tol * scale
        }
    };
    for i in 0..want.n_rows() {
        let (wc, wv) = want.row(i);
        let (gc, gv) = got.row(i);
        let (mut p, mut q) = (0, 0);
        while p < wc.len() || q < gc.len() {
            let (col, a, b) = match (wc.get(p), gc.get(q)) {
                (Some(&x), Some(&y)) if x == y => {
                    p += 1;
                    q += 1;
                    (x, wv[p - 1], gv[q - 1])
                }
                (Some(&x), Some(&y)) if x < y => {
                    p += 1;
                    (x, wv[p - 1], T::zero())
                }
                (Some(&x), None) => {
                    p += 1;
                    (x, wv[p - 1], T::zero())
                }
                (_, Some(&y)) => {
                    q += 1;
                    (y, T::zero(), gv[q - 1])
                }
                (None, None) => unreachable!("loop condition"),
            };
            if !same(a, b) {
                return Some(Divergence {
                    row: i,
                    col: col as usize,
                    expected: a.to_token(),
                    got: b.to_token(),
                });
            }
        }
    }
    None
}

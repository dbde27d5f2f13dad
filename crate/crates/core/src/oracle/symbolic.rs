// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_inner, OracleError};
use crate::matio::{CsrMatrix, SparseRows};
use crate::Scalar;

/// Structure-only first pass of Gustavson's algorithm.
///
/// The contribution counters are kept in CSR shape: row `i` owns
/// `contrib_cols[contrib_offsets[i]..contrib_offsets[i+1]]` (sorted) with the
/// matching `contrib_counts`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicPlan {
    pub n_rows: usize,
    pub n_cols: usize,
    pub fma_per_row: Vec<u64>,
    pub out_nnz_per_row: Vec<u64>,
    pub contrib_offsets: Vec<usize>,
    pub contrib_cols: Vec<u32>,
    pub contrib_counts: Vec<u32>,
    pub total_fma: u64,
    pub total_out_nnz: u64,
}

impl SymbolicPlan {
    /// Number of `k` with `A[i,k] != 0` and `B[k,j] != 0`, or `None` when
    /// `(i, j)` receives nothing.
    pub fn contrib_counter(&self, i: usize, j: usize) -> Option<u32> {
        let (cols, counts) = self.row_contribs(i);
        cols.binary_search(&(j as u32)).ok().map(|p| counts[p])
    }

    pub fn row_contribs(&self, i: usize) -> (&[u32], &[u32]) {
        let (s, e) = (self.contrib_offsets[i], self.contrib_offsets[i + 1]);
        (&self.contrib_cols[s..e], &self.contrib_counts[s..e])
    }

    pub fn iter_contribs(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, counts) = self.row_contribs(i);
            cols.iter().zip(counts).map(move |(&j, &n)| ((i, j as usize), n))
        })
    }

    pub fn contrib_map(&self) -> BTreeMap<(usize, usize), u32> {
        self.iter_contribs().collect()
    }
}

/// Counts per-row FMAs, output nonzeros and per-output contributions.
/// Rows are processed in parallel; the result does not depend on scheduling.
pub fn symbolic_pass<T: Scalar, A: SparseRows<T> + Sync>(
    a: &A,
    b: &CsrMatrix<T>,
) -> Result<SymbolicPlan, OracleError> {
    check_inner((a.n_rows(), a.n_cols()), (b.n_rows(), b.n_cols()))?;
    let n = b.n_cols();
    let rows: Vec<(u64, Vec<u32>, Vec<u32>)> = (0..a.n_rows())
        .into_par_iter()
        .map_init(
            || vec![0u32; n],
            |count, i| {
                let mut cols = Vec::new();
                let mut fma = 0u64;
                for &k in a.row(i).0 {
                    let bcols = b.row(k as usize).0;
                    fma += bcols.len() as u64;
                    for &j in bcols {
                        if count[j as usize] == 0 {
                            cols.push(j);
                        }
                        count[j as usize] += 1;
                    }
                }
                cols.sort_unstable();
                let counts = cols
                    .iter()
                    .map(|&j| std::mem::take(&mut count[j as usize]))
                    .collect();
                (fma, cols, counts)
            },
        )
        .collect();

    let total_out: usize = rows.iter().map(|r| r.1.len()).sum();
    let mut plan = SymbolicPlan {
        n_rows: a.n_rows(),
        n_cols: n,
        fma_per_row: Vec::with_capacity(a.n_rows()),
        out_nnz_per_row: Vec::with_capacity(a.n_rows()),
        contrib_offsets: Vec::with_capacity(a.n_rows() + 1),
        contrib_cols: Vec::with_capacity(total_out),
        contrib_counts: Vec::with_capacity(total_out),
        total_fma: 0,
        total_out_nnz: total_out as u64,
    };
    plan.contrib_offsets.push(0);
    for (fma, cols, counts) in rows {
        plan.total_fma += fma;
        plan.fma_per_row.push(fma);
        plan.out_nnz_per_row.push(cols.len() as u64);
        plan.contrib_cols.extend(cols);
        plan.contrib_counts.extend(counts);
        plan.contrib_offsets.push(plan.contrib_cols.len());
    }
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::{generate_rmat, CooMatrix, RmatParams};
    use proptest::prelude::*;

    #[test]
    fn identity_counts_each_nonzero_once() {
        let b: CsrMatrix<f64> = generate_rmat(&RmatParams::graph500(5, 4, 2)).unwrap().to_csr();
        let plan = symbolic_pass(&CsrMatrix::identity(32), &b).unwrap();
        assert_eq!(plan.total_fma, b.nnz() as u64);
        assert!(plan.iter_contribs().all(|(_, n)| n == 1));
        assert_eq!(plan.contrib_map().len(), b.nnz());
    }

    #[test]
    fn hand_counted_two_by_two() {
        let a = CooMatrix::from_entries(2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)])
            .unwrap()
            .to_csr();
        let b = CooMatrix::from_entries(2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
            .unwrap()
            .to_csr();
        let plan = symbolic_pass(&a, &b).unwrap();
        assert_eq!(plan.fma_per_row, vec![4, 2]);
        let want: BTreeMap<_, _> = [((0, 0), 2), ((0, 1), 2), ((1, 0), 1), ((1, 1), 1)].into();
        assert_eq!(plan.contrib_map(), want);
    }

    fn random_pair(n: usize, m: usize, p: usize, density: f64, seed: u64) -> (CsrMatrix<f64>, CsrMatrix<f64>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut gen = |r: usize, c: usize| {
            let mut e = Vec::new();
            for i in 0..r {
                for j in 0..c {
                    if rng.gen_bool(density) {
                        e.push((i, j, 1.0));
                    }
                }
            }
            CooMatrix::from_entries(r, c, e).unwrap().to_csr()
        };
        (gen(n, m), gen(m, p))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn matches_brute_force_double_loop(
            n in 1usize..40, m in 1usize..40, p in 1usize..40,
            density in 0.0f64..0.4, seed in any::<u64>(),
        ) {
            let (a, b) = random_pair(n, m, p, density, seed);
            let plan = symbolic_pass(&a, &b).unwrap();
            let (da, db) = (a.to_dense(), b.to_dense());
            let mut brute = BTreeMap::new();
            for i in 0..n {
                for j in 0..p {
                    let c = (0..m).filter(|&k| da.get(i, k) != 0.0 && db.get(k, j) != 0.0).count();
                    if c > 0 {
                        brute.insert((i, j), c as u32);
                    }
                }
            }
            prop_assert_eq!(plan.contrib_map(), brute);
            let sum: u64 = plan.contrib_counts.iter().map(|&c| c as u64).sum();
            prop_assert_eq!(sum, plan.total_fma);
            prop_assert_eq!(plan.contrib_cols.len() as u64, plan.total_out_nnz);
            for i in 0..n {
                let row_sum: u64 = plan.row_contribs(i).1.iter().map(|&c| c as u64).sum();
                prop_assert_eq!(row_sum, plan.fma_per_row[i]);
            }
        }
    }
}

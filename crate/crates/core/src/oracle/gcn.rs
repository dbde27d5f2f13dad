// SPDX-License-Identifier: Apache-2.0

//! Single GCN layer `relu(A * X * W)` split into an SpGEMM aggregation job
//! and a dense combination job.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_inner, dense_gemm, OracleError};
use crate::matio::{CooMatrix, CsrMatrix, DenseMatrix, SparseRows};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GcnInstance<T> {
    pub adj: CsrMatrix<T>,
    pub x: DenseMatrix<T>,
    pub w: DenseMatrix<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnWorkload<T> {
    /// Left operand of the aggregation SpGEMM (the adjacency matrix).
    pub agg_a: CsrMatrix<T>,
    /// Right operand of the aggregation SpGEMM (features in CSR form).
    pub agg_b: CsrMatrix<T>,
    /// Weights applied to the aggregation result.
    pub w: DenseMatrix<T>,
    /// `relu(A * (X * W))`, associated the other way round from the jobs.
    pub reference: DenseMatrix<T>,
}

impl<T: Scalar> GcnWorkload<T> {
    /// Runs the combination job on an aggregation result.
    pub fn combine(&self, aggregated: &CsrMatrix<T>) -> Result<DenseMatrix<T>, OracleError> {
        Ok(dense_gemm(&aggregated.to_dense(), &self.w)?.map(Scalar::relu))
    }

    /// Max-norm relative error of `out` against the reference.
    pub fn error(&self, out: &DenseMatrix<T>) -> f64 {
        self.reference.max_norm_rel_diff(out)
    }
}

pub fn gcn_layer_workload<T: Scalar>(
    adj: &CsrMatrix<T>,
    x: &DenseMatrix<T>,
    w: &DenseMatrix<T>,
) -> Result<GcnWorkload<T>, OracleError> {
    if adj.n_rows() != adj.n_cols() {
        return Err(OracleError::DimensionMismatch(format!(
            "adjacency is {}x{}",
            adj.n_rows(),
            adj.n_cols()
        )));
    }
    check_inner((adj.n_rows(), adj.n_cols()), (x.rows(), x.cols()))?;
    check_inner((x.rows(), x.cols()), (w.rows(), w.cols()))?;
    let xw = dense_gemm(x, w)?;
    let h = w.cols();
    let mut out = vec![T::zero(); adj.n_rows() * h];
    for (i, orow) in out.chunks_mut(h.max(1)).enumerate().take(adj.n_rows()) {
        let (cols, vals) = adj.row(i);
        for (&k, &a) in cols.iter().zip(vals) {
            for (o, &v) in orow.iter_mut().zip(xw.row(k as usize)) {
                *o += a * v;
            }
        }
    }
    let reference = DenseMatrix::from_vec(adj.n_rows(), h, out)
        .expect("shape")
        .map(Scalar::relu);
    Ok(GcnWorkload {
        agg_a: adj.clone(),
        agg_b: CsrMatrix::from_dense(x),
        w: w.clone(),
        reference,
    })
}

/// Random undirected graph without self-loops (about `avg_degree` neighbours
/// per node, unit weights), features with the given density and uniform
/// values in [-1, 1], and uniform weights in [-1, 1].
pub fn random_gcn_instance(
    n: usize,
    f: usize,
    h: usize,
    avg_degree: f64,
    feature_density: f64,
    seed: u64,
) -> GcnInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coo = CooMatrix::new(n, n).expect("dimension fits");
    let edges = (n as f64 * avg_degree / 2.0).round() as usize;
    if n > 1 {
        for _ in 0..edges {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n - 1);
            let v = if v >= u { v + 1 } else { v };
            coo.entries.push((u as u32, v as u32, 1.0));
            coo.entries.push((v as u32, u as u32, 1.0));
        }
    }
    coo.entries.sort_unstable_by_key(|e| (e.0, e.1));
    coo.entries.dedup_by_key(|e| (e.0, e.1));
    let x = (0..n * f)
        .map(|_| {
            if rng.gen_bool(feature_density) {
                rng.gen_range(-1.0..=1.0)
            } else {
                0.0
            }
        })
        .collect();
    let w = (0..f * h).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    GcnInstance {
        adj: coo.to_csr(),
        x: DenseMatrix::from_vec(n, f, x).expect("shape"),
        w: DenseMatrix::from_vec(f, h, w).expect("shape"),
    }
}

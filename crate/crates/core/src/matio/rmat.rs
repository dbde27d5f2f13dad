// SPDX-License-Identifier: Apache-2.0

//! Recursive-matrix (R-MAT) synthetic graphs with power-law degree skew.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CooMatrix, MatrixError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmatParams {
    /// log2 of the matrix dimension.
    pub scale: u32,
    /// Edges drawn per node before duplicate merging.
    pub edge_factor: u32,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub seed: u64,
}

impl RmatParams {
    /// Graph500 quadrant probabilities.
    pub fn graph500(scale: u32, edge_factor: u32, seed: u64) -> Self {
        Self {
            scale,
            edge_factor,
            a: 0.57,
            b: 0.19,
            c: 0.19,
            d: 0.05,
            seed,
        }
    }

    pub fn uniform(scale: u32, edge_factor: u32, seed: u64) -> Self {
        Self {
            scale,
            edge_factor,
            a: 0.25,
            b: 0.25,
            c: 0.25,
            d: 0.25,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), MatrixError> {
        if self.scale == 0 || self.scale > 31 {
            return Err(MatrixError::Config(format!("rmat scale {} outside 1..=31", self.scale)));
        }
        let probs = [self.a, self.b, self.c, self.d];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(MatrixError::Config("rmat probabilities must lie in [0, 1]".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(MatrixError::Config(format!("rmat probabilities sum to {sum}, not 1")));
        }
        Ok(())
    }
}

/// Standard recursive quadrant descent with fixed probabilities per level.
/// Every nonzero has value one; repeated coordinates collapse to one entry.
pub fn generate_rmat<T: Scalar>(p: &RmatParams) -> Result<CooMatrix<T>, MatrixError> {
    p.validate()?;
    let n = 1usize << p.scale;
    let n_edges = n * p.edge_factor as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let (ab, abc) = (p.a + p.b, p.a + p.b + p.c);
    let mut entries = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let (mut row, mut col) = (0u32, 0u32);
        for _ in 0..p.scale {
            let r: f64 = rng.gen();
            let (rb, cb) = if r < p.a {
                (0, 0)
            } else if r < ab {
                (0, 1)
            } else if r < abc {
                (1, 0)
            } else {
                (1, 1)
            };
            row = (row << 1) | rb;
            col = (col << 1) | cb;
        }
        entries.push((row, col, T::one()));
    }
    entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
    entries.dedup_by_key(|e| (e.0, e.1));
    Ok(CooMatrix {
        n_rows: n,
        n_cols: n,
        entries,
    })
}

/// Replaces every value by a uniform integer draw from `lo..=hi`, expressed in
/// `T`. Integer-valued inputs keep every kernel's result exact.
pub fn randomize_values<T: Scalar>(m: &mut CooMatrix<T>, lo: i64, hi: i64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for e in &mut m.entries {
        e.2 = T::from_f64(rng.gen_range(lo..=hi) as f64);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_seed() {
        let p = RmatParams::graph500(3, 2, 7);
        let a: CooMatrix<f64> = generate_rmat(&p).unwrap();
        let b: CooMatrix<f64> = generate_rmat(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n_rows, 8);
        assert!(a.is_normalized());
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut p = RmatParams::uniform(4, 2, 1);
        p.d = 0.3;
        assert!(generate_rmat::<f64>(&p).is_err());
        let mut p = RmatParams::uniform(4, 2, 1);
        p.scale = 0;
        assert!(generate_rmat::<f64>(&p).is_err());
    }

    #[test]
    fn uniform_quadrants_within_four_sigma() {
        let m: CooMatrix<f64> = generate_rmat(&RmatParams::uniform(8, 8, 11)).unwrap();
        let half = 128u32;
        let mut q = [0usize; 4];
        for &(r, c, _) in &m.entries {
            q[((r >= half) as usize) * 2 + (c >= half) as usize] += 1;
        }
        let n = m.nnz() as f64;
        let sigma = (n * 0.25 * 0.75).sqrt();
        for count in q {
            assert!((count as f64 - n / 4.0).abs() <= 4.0 * sigma, "{q:?}");
        }
    }

    #[test]
    fn graph500_rows_are_skewed() {
        let m: CooMatrix<f64> = generate_rmat(&RmatParams::graph500(10, 8, 3)).unwrap();
        let mut deg = vec![0usize; m.n_rows];
        for &(r, _, _) in &m.entries {
            deg[r as usize] += 1;
        }
        let mean = m.nnz() as f64 / m.n_rows as f64;
        let max = *deg.iter().max().unwrap() as f64;
        assert!(max / mean > 5.0, "max {max} mean {mean}");
    }

    #[test]
    fn randomized_values_are_integral_in_range() {
        let mut m: CooMatrix<f64> = generate_rmat(&RmatParams::graph500(5, 4, 1)).unwrap();
        randomize_values(&mut m, 1, 9, 5);
        assert!(m.entries.iter().all(|e| e.2.fract() == 0.0 && (1.0..=9.0).contains(&e.2)));
    }
}

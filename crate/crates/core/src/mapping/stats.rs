// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::MappingError;

/// Per-target tallies with their coefficient of variation (population
/// standard deviation over mean) and max/mean ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadHistogram {
    pub counts: Vec<u64>,
    pub cv: f64,
    pub max_over_mean: f64,
}

impl LoadHistogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self, MappingError> {
        let total: u64 = counts.iter().sum();
        if counts.is_empty() || total == 0 {
            return Err(MappingError::Empty);
        }
        let n = counts.len() as f64;
        let mean = total as f64 / n;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / n;
        let max = *counts.iter().max().expect("nonempty") as f64;
        Ok(Self {
            cv: var.sqrt() / mean,
            max_over_mean: max / mean,
            counts,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Tallies target indices in `[0, n_targets)`.
pub fn load_stats(assignments: &[usize], n_targets: usize) -> Result<LoadHistogram, MappingError> {
    let mut counts = vec![0u64; n_targets];
    for &a in assignments {
        *counts
            .get_mut(a)
            .ok_or_else(|| MappingError::Config(format!("target {a} out of range")))? += 1;
    }
    LoadHistogram::from_counts(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_on_one_target() {
        let h = load_stats(&[2, 2, 2, 2], 4).unwrap();
        assert!((h.cv - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.max_over_mean, 4.0);
    }

    #[test]
    fn uniform_has_zero_cv() {
        let a: Vec<usize> = (0..1000).map(|i| i % 8).collect();
        let h = load_stats(&a, 8).unwrap();
        assert_eq!(h.cv, 0.0);
        assert_eq!(h.total(), 1000);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(load_stats(&[], 4), Err(MappingError::Empty));
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Grouping of output rows into scratchpad-sized windows.

use serde::{Deserialize, Serialize};

use super::{next_prime, OracleError, SymbolicPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum RowClass {
    /// Accumulated with a direct column-indexed table.
    Dense,
    /// Accumulated in a prime-sized hashtable.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub cf: f64,
    pub ef: f64,
    pub threshold: u64,
    pub spad_budget: usize,
}

impl WindowParams {
    pub const DEFAULT_CF: f64 = 4.0;
    pub const DEFAULT_EF: f64 = 1.5;

    /// Defaults for a scratchpad of `spad_budget` lines: CF 4, EF 1.5 and a
    /// dense threshold of one 64th of the scratchpad.
    pub fn for_budget(spad_budget: usize) -> Self {
        Self {
            cf: Self::DEFAULT_CF,
            ef: Self::DEFAULT_EF,
            threshold: (spad_budget / 64) as u64,
            spad_budget,
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        if !(self.cf > 0.0) {
            return Err(OracleError::Config(format!("cf must be positive, got {}", self.cf)));
        }
        if !(self.ef >= 1.0) {
            return Err(OracleError::Config(format!("ef must be at least 1, got {}", self.ef)));
        }
        if self.spad_budget == 0 {
            return Err(OracleError::Config("scratchpad budget must be positive".into()));
        }
        Ok(())
    }

    /// Classification and table size for one row.
    pub fn row_capacity(&self, row: usize, fma: u64, n_cols: usize) -> Result<(RowClass, usize), OracleError> {
        if fma == 0 {
            return Ok((RowClass::Sparse, 0));
        }
        let (class, cap) = if fma as f64 / self.cf > self.threshold as f64 {
            (RowClass::Dense, n_cols)
        } else {
            // The epsilon absorbs products such as 10 * 1.2 = 12.000000000000002.
            let target = (fma as f64 * self.ef - 1e-9).ceil().max(1.0) as u64;
            if target > self.spad_budget as u64 {
                return Err(OracleError::Capacity {
                    row,
                    required: target as usize,
                    budget: self.spad_budget,
                });
            }
            (RowClass::Sparse, next_prime(target) as usize)
        };
        if cap > self.spad_budget {
            return Err(OracleError::Capacity {
                row,
                required: cap,
                budget: self.spad_budget,
            });
        }
        Ok((class, cap))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub rows: Vec<u32>,
    pub class: Vec<RowClass>,
    pub hash_capacity: Vec<usize>,
}

impl Window {
    pub fn total_capacity(&self) -> usize {
        self.hash_capacity.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowPlan {
    pub windows: Vec<Window>,
    pub cf: f64,
    pub ef: f64,
    pub threshold: u64,
    pub spad_budget: usize,
}

impl WindowPlan {
    /// Window index of every row.
    pub fn window_of_row(&self, n_rows: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n_rows];
        for (w, win) in self.windows.iter().enumerate() {
            for &r in &win.rows {
                out[r as usize] = w;
            }
        }
        out
    }
}

/// Row order that spreads dense rows evenly among sparse ones: each class
/// keeps index order and the two are merged by fractional position.
pub fn interleave_order(classes: &[RowClass]) -> Vec<u32> {
    let dense: Vec<u32> = (0..classes.len() as u32)
        .filter(|&r| classes[r as usize] == RowClass::Dense)
        .collect();
    let sparse: Vec<u32> = (0..classes.len() as u32)
        .filter(|&r| classes[r as usize] == RowClass::Sparse)
        .collect();
    let (nd, ns) = (dense.len() as u128, sparse.len() as u128);
    let mut out = Vec::with_capacity(classes.len());
    let (mut di, mut si) = (0usize, 0usize);
    while di < dense.len() || si < sparse.len() {
        // Compare (2di+1)/2nd with (2si+1)/2ns without floats.
        let take_dense = si == sparse.len()
            || (di < dense.len() && (2 * di as u128 + 1) * ns <= (2 * si as u128 + 1) * nd);
        if take_dense {
            out.push(dense[di]);
            di += 1;
        } else {
            out.push(sparse[si]);
            si += 1;
        }
    }
    out
}

/// Classifies rows, interleaves dense and sparse rows and packs them first-fit.
pub fn plan_windows(plan: &SymbolicPlan, params: &WindowParams) -> Result<WindowPlan, OracleError> {
    params.validate()?;
    let mut classes = Vec::with_capacity(plan.n_rows);
    for (r, &fma) in plan.fma_per_row.iter().enumerate() {
        classes.push(params.row_capacity(r, fma, plan.n_cols)?.0);
    }
    let order = interleave_order(&classes);
    plan_windows_ordered(plan, params, &order, false)
}

/// Packs rows in the given order. With `contiguous` each row goes to the
/// last open window or a new one (next-fit), otherwise to the first window
/// with room (first-fit).
pub fn plan_windows_ordered(
    plan: &SymbolicPlan,
    params: &WindowParams,
    order: &[u32],
    contiguous: bool,
) -> Result<WindowPlan, OracleError> {
    params.validate()?;
    let mut seen = vec![false; plan.n_rows];
    for &r in order {
        let r = r as usize;
        if r >= plan.n_rows || std::mem::replace(&mut seen[r], true) {
            return Err(OracleError::Config(format!("row order repeats or overruns at row {r}")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(OracleError::Config("row order does not cover every row".into()));
    }

    let mut windows: Vec<Window> = Vec::new();
    let mut used: Vec<usize> = Vec::new();
    for &r in order {
        let (class, cap) = params.row_capacity(r as usize, plan.fma_per_row[r as usize], plan.n_cols)?;
        let slot = if contiguous {
            windows.len().checked_sub(1).filter(|&w| used[w] + cap <= params.spad_budget)
        } else {
            used.iter().position(|&u| u + cap <= params.spad_budget)
        };
        let w = slot.unwrap_or_else(|| {
            windows.push(Window {
                rows: Vec::new(),
                class: Vec::new(),
                hash_capacity: Vec::new(),
            });
            used.push(0);
            windows.len() - 1
        });
        windows[w].rows.push(r);
        windows[w].class.push(class);
        windows[w].hash_capacity.push(cap);
        used[w] += cap;
    }
    Ok(WindowPlan {
        windows,
        cf: params.cf,
        ef: params.ef,
        threshold: params.threshold,
        spad_budget: params.spad_budget,
    })
}

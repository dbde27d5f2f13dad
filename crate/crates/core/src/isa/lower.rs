// SPDX-License-Identifier: Apache-2.0

//! Tiled Gustavson lowering: every A column `k` is multiplied against B row
//! `k` in 4x4 tiles, one MMH4 per tile, windows separated by barriers.

use serde::{Deserialize, Serialize};

use super::{HaccInstr, Instr, IsaError, MemoryImage, Mmh4Instr, TagLayout, OPCODE_MMH4};
use crate::matio::{CscMatrix, CsrMatrix, SparseRows};
use crate::oracle::{plan_windows_ordered, OracleError, SymbolicPlan, WindowParams, WindowPlan};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerParams {
    /// `None` picks [`TagLayout::fit`].
    pub layout: Option<TagLayout>,
    /// Accumulator lines available to one window of output rows.
    pub window_budget: usize,
    /// Sizing slack per row: a row reserves `next_prime(ceil(fma * ef))`.
    pub ef: f64,
}

impl LowerParams {
    pub fn new(window_budget: usize) -> Self {
        Self {
            layout: None,
            window_budget,
            ef: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program<T> {
    pub layout: TagLayout,
    pub n_rows: usize,
    pub n_cols: usize,
    /// MMH4 instructions with a barrier after every window.
    pub instrs: Vec<Instr<T>>,
    pub image: MemoryImage,
    pub windows: WindowPlan,
    pub n_groups: u32,
}

impl<T: Scalar> Program<T> {
    pub fn mmh4s(&self) -> impl Iterator<Item = &Mmh4Instr> {
        self.instrs.iter().filter_map(|i| match i {
            Instr::Mmh4(m) => Some(m),
            _ => None,
        })
    }

    pub fn mmh4_count(&self) -> usize {
        self.mmh4s().count()
    }

    /// HACCs the program will dispatch: explicit ones plus every MMH4 lane.
    pub fn hacc_count(&self) -> u64 {
        self.instrs
            .iter()
            .map(|i| match i {
                Instr::Mmh4(m) => m.hacc_count() as u64,
                Instr::Hacc(_) => 1,
                Instr::Barrier { .. } => 0,
            })
            .sum()
    }
}

fn plan_mismatch(msg: String) -> IsaError {
    IsaError::Plan(OracleError::DimensionMismatch(msg))
}

pub fn lower_spgemm<T: Scalar>(
    a: &CscMatrix<T>,
    b: &CsrMatrix<T>,
    plan: &SymbolicPlan,
    params: &LowerParams,
) -> Result<Program<T>, IsaError> {
    if a.n_cols() != b.n_rows() {
        return Err(plan_mismatch(format!(
            "{}x{} times {}x{}",
            a.n_rows(),
            a.n_cols(),
            b.n_rows(),
            b.n_cols()
        )));
    }
    if plan.n_rows != a.n_rows() || plan.n_cols != b.n_cols() {
        return Err(plan_mismatch("symbolic plan does not match the operands".into()));
    }
    let layout = match params.layout {
        Some(l) => l,
        None => TagLayout::fit(a.n_rows(), b.n_cols())?,
    };
    if !layout.fits(a.n_rows(), b.n_cols()) {
        // Surface the first coordinate that overflows.
        layout.encode(a.n_rows() - 1, b.n_cols().saturating_sub(1))?;
        layout.encode(a.n_rows().saturating_sub(1), b.n_cols() - 1)?;
    }

    let wparams = WindowParams {
        cf: 1.0,
        ef: params.ef,
        threshold: u64::MAX,
        spad_budget: params.window_budget,
    };
    let order: Vec<u32> = (0..a.n_rows() as u32).collect();
    let windows = plan_windows_ordered(plan, &wparams, &order, true)?;

    let mut image = MemoryImage::new();
    let a_base = image.push("a_data", a.values().iter().map(|v| v.to_bits64()).collect());
    let bc_base = image.push("b_col_ind", b.col_indices().iter().map(|&c| c as u64).collect());
    let bd_base = image.push("b_data", b.values().iter().map(|v| v.to_bits64()).collect());
    let base = MemoryImage::BASE;

    let mut instrs = Vec::new();
    let mut counters: Vec<u64> = Vec::new();
    let mut group = 0u32;
    for (w, win) in windows.windows.iter().enumerate() {
        let (r0, r1) = match (win.rows.first(), win.rows.last()) {
            (Some(&f), Some(&l)) => (f, l + 1),
            _ => continue,
        };
        for k in 0..a.n_cols() {
            let (rows, _) = a.col(k);
            let lo = rows.partition_point(|&r| r < r0);
            let hi = rows.partition_point(|&r| r < r1);
            let b_start = b.row_offsets()[k];
            let b_len = b.row_nnz(k);
            if lo == hi || b_len == 0 {
                continue;
            }
            let a_off = a.col_offsets()[k];
            for ai in (lo..hi).step_by(4) {
                let n_a = (hi - ai).min(4);
                let mut a_rows = [0u32; 4];
                a_rows[..n_a].copy_from_slice(&rows[ai..ai + n_a]);
                for bj in (0..b_len).step_by(4) {
                    let n_b = (b_len - bj).min(4);
                    let rc_off = 8 * counters.len() as u64;
                    let bcols = &b.col_indices()[b_start + bj..b_start + bj + n_b];
                    for lane in 0..16 {
                        let (i, j) = (lane / 4, lane % 4);
                        let c = if i < n_a && j < n_b {
                            let (r, c) = (a_rows[i] as usize, bcols[j] as usize);
                            let n = plan.contrib_counter(r, c).ok_or_else(|| {
                                plan_mismatch(format!("plan has no contribution for ({r}, {c})"))
                            })?;
                            n as u64 - 1
                        } else {
                            0
                        };
                        counters.push(c);
                    }
                    instrs.push(Instr::Mmh4(Mmh4Instr {
                        opcode: OPCODE_MMH4,
                        base_addr: base,
                        a_data_addr: a_base - base + 8 * (a_off + ai) as u64,
                        b_col_ind_addr: bc_base - base + 8 * (b_start + bj) as u64,
                        b_data_addr: bd_base - base + 8 * (b_start + bj) as u64,
                        roll_counter_addr: rc_off,
                        n_a: n_a as u8,
                        n_b: n_b as u8,
                        a_col: k as u32,
                        group,
                        a_rows,
                    }));
                }
            }
            group += 1;
        }
        instrs.push(Instr::Barrier { window: w as u32 });
    }
    let rc_base = image.push("roll_counters", counters);
    for i in &mut instrs {
        if let Instr::Mmh4(m) = i {
            m.roll_counter_addr += rc_base - base;
        }
    }
    Ok(Program {
        layout,
        n_rows: a.n_rows(),
        n_cols: b.n_cols(),
        instrs,
        image,
        windows,
        n_groups: group,
    })
}

/// Functional semantics of one MMH4: the HACCs it dispatches, lane order
/// `i*4 + j`, masked lanes omitted.
pub fn expand_mmh4<T: Scalar>(
    m: &Mmh4Instr,
    mem: &MemoryImage,
    layout: TagLayout,
) -> Result<Vec<HaccInstr<T>>, IsaError> {
    let (n_a, n_b) = (m.n_a as usize, m.n_b as usize);
    if n_a > 4 || n_b > 4 {
        return Err(IsaError::Replay(format!("tile {n_a}x{n_b} exceeds 4x4")));
    }
    let base = m.base_addr;
    let av = mem.read_words(base + m.a_data_addr, n_a)?;
    let bc = mem.read_words(base + m.b_col_ind_addr, n_b)?;
    let bv = mem.read_words(base + m.b_data_addr, n_b)?;
    let rc = mem.read_words(base + m.roll_counter_addr, 16)?;
    let mut out = Vec::with_capacity(n_a * n_b);
    for i in 0..n_a {
        for j in 0..n_b {
            out.push(HaccInstr {
                tag: layout.encode(m.a_rows[i] as usize, bc[j] as usize)?,
                data: T::from_bits64(av[i]) * T::from_bits64(bv[j]),
                counter: rc[i * 4 + j] as u32,
            });
        }
    }
    Ok(out)
}

// SPDX-License-Identifier: Apache-2.0

//! Timing-free interpreter: one accumulator table, rolling evictions,
//! barrier flushes.

use std::collections::HashMap;

use super::{expand_mmh4, HaccInstr, Instr, IsaError, Program};
use crate::matio::CsrMatrix;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayOutput<T> {
    pub c: CsrMatrix<T>,
    pub haccs: u64,
    /// Lines freed because their counter reached zero.
    pub evictions: u64,
    /// Lines still live at a barrier (zero for a consistent program).
    pub barrier_flushes: u64,
    pub peak_occupancy: usize,
}

struct Pad<T> {
    lines: HashMap<u32, (T, u32)>,
    out: Vec<(u32, T)>,
    evictions: u64,
    peak: usize,
}

impl<T: Scalar> Pad<T> {
    fn hacc(&mut self, h: &HaccInstr<T>) {
        match self.lines.get_mut(&h.tag) {
            None if h.counter == 0 => {
                self.out.push((h.tag, h.data));
                self.evictions += 1;
            }
            None => {
                self.lines.insert(h.tag, (h.data, h.counter));
                self.peak = self.peak.max(self.lines.len());
            }
            Some(line) => {
                line.0 += h.data;
                line.1 -= 1;
                if line.1 == 0 {
                    let (v, _) = self.lines.remove(&h.tag).expect("present");
                    self.out.push((h.tag, v));
                    self.evictions += 1;
                }
            }
        }
    }
}

pub fn replay<T: Scalar>(p: &Program<T>) -> Result<ReplayOutput<T>, IsaError> {
    let mut pad = Pad {
        lines: HashMap::new(),
        out: Vec::new(),
        evictions: 0,
        peak: 0,
    };
    let mut haccs = 0u64;
    let mut flushes = 0u64;
    let flush = |pad: &mut Pad<T>, flushes: &mut u64| {
        let mut rest: Vec<(u32, T)> = pad.lines.drain().map(|(t, (v, _))| (t, v)).collect();
        rest.sort_unstable_by_key(|e| e.0);
        *flushes += rest.len() as u64;
        pad.out.extend(rest);
    };
    for ins in &p.instrs {
        match ins {
            Instr::Mmh4(m) => {
                for h in expand_mmh4(m, &p.image, p.layout)? {
                    haccs += 1;
                    pad.hacc(&h);
                }
            }
            Instr::Hacc(h) => {
                haccs += 1;
                pad.hacc(h);
            }
            Instr::Barrier { .. } => flush(&mut pad, &mut flushes),
        }
    }
    flush(&mut pad, &mut flushes);

    let mut entries: Vec<(u32, u32, T)> = pad
        .out
        .into_iter()
        .map(|(t, v)| {
            let (i, j) = p.layout.decode(t);
            (i as u32, j as u32, v)
        })
        .collect();
    entries.sort_unstable_by_key(|e| (e.0, e.1));
    if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
        return Err(IsaError::Replay(format!("output ({}, {}) written twice", w[0].0, w[0].1)));
    }
    if let Some(e) = entries
        .iter()
        .find(|e| e.0 as usize >= p.n_rows || e.1 as usize >= p.n_cols)
    {
        return Err(IsaError::Replay(format!("output ({}, {}) outside the matrix", e.0, e.1)));
    }
    let coo = crate::matio::CooMatrix {
        n_rows: p.n_rows,
        n_cols: p.n_cols,
        entries,
    };
    Ok(ReplayOutput {
        c: coo.to_csr(),
        haccs,
        evictions: pad.evictions,
        barrier_flushes: flushes,
        peak_occupancy: pad.peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{lower_spgemm, LowerParams};
    use crate::matio::{generate_rmat, randomize_values, CooMatrix, RmatParams};
    use crate::oracle::{spgemm_gustavson, symbolic_pass};

    #[test]
    fn identity_replays_to_identity() {
        let i = CsrMatrix::<i64>::identity(4);
        let plan = symbolic_pass(&i, &i).unwrap();
        let p = lower_spgemm(&i.to_csc(), &i, &plan, &LowerParams::new(64)).unwrap();
        let r = replay(&p).unwrap();
        assert_eq!(r.c, i);
        assert_eq!(r.evictions, 4);
        assert_eq!(r.barrier_flushes, 0);
    }

    #[test]
    fn rmat_integer_replay_exact_with_many_windows() {
        let mut m: CooMatrix<i64> = generate_rmat(&RmatParams::graph500(6, 6, 4)).unwrap();
        randomize_values(&mut m, -3, 7, 1);
        let a = m.to_csr();
        let plan = symbolic_pass(&a, &a).unwrap();
        let p = lower_spgemm(&a.to_csc(), &a, &plan, &LowerParams::new(600)).unwrap();
        assert!(p.windows.windows.len() > 1);
        let r = replay(&p).unwrap();
        assert_eq!(r.c, spgemm_gustavson(&a, &a).unwrap());
        assert_eq!(r.haccs, plan.total_fma);
        assert_eq!(r.evictions, plan.total_out_nnz);
        assert_eq!(r.barrier_flushes, 0);
    }
}

// SPDX-License-Identifier: Apache-2.0

//! MMH4 dispatcher.
//!
//! A program is split into windows at its barriers and each window into
//! column groups (consecutive MMH4s sharing `group`). A group is bound to
//! one core when its first MMH4 is issued and streams to that core in
//! program order. Each cycle the dispatcher walks the cores round-robin
//! from a rotating pointer and hands one MMH4 to every core with buffer
//! space, up to the dispatch width.

use std::ops::Range;

use super::SimError;
use crate::isa::{expand_mmh4, Instr, Mmh4Instr, Program};
use crate::mapping::{Heatmap, Mapper};
use crate::uarch::{Chip, Mmh4Job};
use crate::Scalar;

/// Instruction ranges of the groups of each window.
pub(crate) fn split_windows<T>(instrs: &[Instr<T>]) -> Result<Vec<Vec<Range<usize>>>, SimError> {
    let mut windows = Vec::new();
    let mut cur: Vec<Range<usize>> = Vec::new();
    let mut last_group = None;
    for (i, ins) in instrs.iter().enumerate() {
        match ins {
            Instr::Mmh4(m) => {
                match cur.last_mut() {
                    Some(r) if last_group == Some(m.group) && r.end == i => r.end = i + 1,
                    _ => cur.push(i..i + 1),
                }
                last_group = Some(m.group);
            }
            Instr::Barrier { .. } => {
                windows.push(std::mem::take(&mut cur));
                last_group = None;
            }
            Instr::Hacc(_) => {
                return Err(SimError::Config(format!(
                    "instruction {i}: stand-alone HACCs are produced by MMH4s, not dispatched"
                )))
            }
        }
    }
    if !cur.is_empty() {
        windows.push(cur);
    }
    Ok(windows)
}

/// Granules touched by `bytes` bytes at `addr`.
pub(crate) fn granules(addr: u64, bytes: u64, granule: u64) -> Range<u64> {
    if bytes == 0 {
        return 0..0;
    }
    addr / granule..(addr + bytes - 1) / granule + 1
}

#[derive(Debug, Clone)]
pub struct Dispatcher {
    windows: Vec<Vec<Range<usize>>>,
    window: usize,
    next_group: usize,
    /// Per core: the rest of its bound group.
    active: Vec<Range<usize>>,
    rr: usize,
    width: usize,
    granule_bytes: u64,
    pub dispatched: u64,
    pub haccs_dispatched: u64,
    /// Core of every dispatched MMH4, in dispatch order.
    pub assignment_log: Vec<(u64, u32)>,
    /// Cycles a core with buffer space found no work while a window was
    /// still issuing, or every core was full.
    pub stall_cycles: u64,
}

impl Dispatcher {
    pub fn new<T>(program: &Program<T>, n_cores: usize, width: usize, granule_bytes: u64) -> Result<Self, SimError> {
        Ok(Self {
            windows: split_windows(&program.instrs)?,
            window: 0,
            next_group: 0,
            active: vec![0..0; n_cores],
            rr: 0,
            width,
            granule_bytes,
            dispatched: 0,
            haccs_dispatched: 0,
            assignment_log: Vec::new(),
            stall_cycles: 0,
        })
    }

    pub fn n_windows(&self) -> usize {
        self.windows.len()
    }

    pub fn current_window(&self) -> usize {
        self.window
    }

    pub fn finished(&self) -> bool {
        self.window >= self.windows.len()
    }

    /// Every MMH4 of the current window has been handed to a core.
    pub fn window_issued(&self) -> bool {
        self.finished()
            || (self.next_group >= self.windows[self.window].len() && self.active.iter().all(|r| r.is_empty()))
    }

    /// Moves past the current window once the engine has drained it.
    pub fn advance_window(&mut self) {
        debug_assert!(self.window_issued());
        self.window += 1;
        self.next_group = 0;
    }

    fn job<T: Scalar>(
        &mut self,
        m: &Mmh4Instr,
        index: u64,
        core: usize,
        program: &Program<T>,
        mapper: &mut Mapper,
        heatmap: &mut Heatmap,
        n_mcs: u64,
    ) -> Result<Mmh4Job<T>, SimError> {
        let haccs = expand_mmh4::<T>(m, &program.image, program.layout)?
            .into_iter()
            .map(|h| {
                let mem = mapper.map_target(h.tag);
                heatmap.add(core, mem);
                (h.tag, h.data, h.counter, mem as u32)
            })
            .collect::<Vec<_>>();
        let reads = m
            .operand_reads()
            .iter()
            .flat_map(|&(addr, bytes)| granules(addr, bytes, self.granule_bytes))
            .map(|g| (g, (g % n_mcs) as u32))
            .collect();
        Ok(Mmh4Job {
            index,
            full: haccs.len() == 16,
            reads,
            haccs,
        })
    }

    /// Issues up to the dispatch width of MMH4s. Returns how many.
    pub fn step<T: Scalar>(
        &mut self,
        chip: &mut Chip<T>,
        program: &Program<T>,
        mapper: &mut Mapper,
        heatmap: &mut Heatmap,
    ) -> Result<usize, SimError> {
        if self.window_issued() {
            return Ok(0);
        }
        let n = chip.cores.len();
        let n_mcs = chip.mcs.len() as u64;
        let w = self.window;
        let mut issued = 0;
        let mut last = None;
        for step in 0..n {
            if issued == self.width {
                break;
            }
            let c = (self.rr + step) % n;
            if chip.cores[c].buffer_free() == 0 {
                continue;
            }
            if self.active[c].is_empty() {
                if self.next_group >= self.windows[w].len() {
                    continue;
                }
                self.active[c] = self.windows[w][self.next_group].clone();
                self.next_group += 1;
            }
            let i = self.active[c].start;
            self.active[c].start += 1;
            let Instr::Mmh4(m) = &program.instrs[i] else {
                unreachable!("groups hold MMH4s only")
            };
            let index = self.dispatched;
            let job = self.job(m, index, c, program, mapper, heatmap, n_mcs)?;
            self.haccs_dispatched += job.haccs.len() as u64;
            chip.cores[c].buffer.push_back(job);
            self.assignment_log.push((index, c as u32));
            self.dispatched += 1;
            issued += 1;
            last = Some(c);
        }
        if issued == 0 {
            self.stall_cycles += 1;
        }
        if let Some(c) = last {
            self.rr = (c + 1) % n;
        }
        Ok(issued)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{HaccInstr, OPCODE_MMH4};

    fn mmh4(group: u32) -> Instr<f64> {
        Instr::Mmh4(Mmh4Instr {
            opcode: OPCODE_MMH4,
            base_addr: 0,
            a_data_addr: 0,
            b_col_ind_addr: 0,
            b_data_addr: 0,
            roll_counter_addr: 0,
            n_a: 1,
            n_b: 1,
            a_col: 0,
            group,
            a_rows: [0; 4],
        })
    }

    #[test]
    fn windows_and_groups() {
        let prog = vec![
            mmh4(0),
            mmh4(0),
            mmh4(1),
            Instr::Barrier { window: 0 },
            mmh4(2),
            Instr::Barrier { window: 1 },
        ];
        let w = split_windows(&prog).unwrap();
        assert_eq!(w, vec![vec![0..2, 2..3], vec![4..5]]);
    }

    #[test]
    fn explicit_hacc_rejected() {
        let prog = vec![Instr::Hacc(HaccInstr { tag: 0, data: 1.0, counter: 0 })];
        assert!(matches!(split_windows(&prog), Err(SimError::Config(_))));
    }

    #[test]
    fn granule_ranges() {
        assert_eq!(granules(0, 8, 64), 0..1);
        assert_eq!(granules(56, 16, 64), 0..2);
        assert_eq!(granules(128, 128, 64), 2..4);
        assert_eq!(granules(10, 0, 64), 0..0);
    }
}

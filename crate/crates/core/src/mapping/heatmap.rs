// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{LoadHistogram, Mapper, MapperConfig, MappingError};
use crate::isa::{expand_mmh4, Instr, IsaError, Program};
use crate::Scalar;

/// Core-to-memory HACC traffic. CSV layout: a header `core,m0,...,m{N-1}`
/// then one line per core with its index and N tallies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmap {
    pub cores: usize,
    pub mems: usize,
    pub cells: Vec<u64>,
}

impl Heatmap {
    pub fn new(cores: usize, mems: usize) -> Self {
        Self {
            cores,
            mems,
            cells: vec![0; cores * mems],
        }
    }

    pub fn add(&mut self, core: usize, mem: usize) {
        self.cells[core * self.mems + mem] += 1;
    }

    pub fn get(&self, core: usize, mem: usize) -> u64 {
        self.cells[core * self.mems + mem]
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn core_loads(&self) -> Vec<u64> {
        self.cells.chunks(self.mems.max(1)).map(|r| r.iter().sum()).collect()
    }

    pub fn mem_loads(&self) -> Vec<u64> {
        (0..self.mems)
            .map(|m| (0..self.cores).map(|c| self.get(c, m)).sum())
            .collect()
    }

    /// Uniformity over every (core, memory) cell.
    pub fn cell_stats(&self) -> Result<LoadHistogram, MappingError> {
        LoadHistogram::from_counts(self.cells.clone())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("core");
        for m in 0..self.mems {
            write!(s, ",m{m}").expect("string write");
        }
        s.push('\n');
        for c in 0..self.cores {
            write!(s, "{c}").expect("string write");
            for m in 0..self.mems {
                write!(s, ",{}", self.get(c, m)).expect("string write");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, MappingError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| MappingError::Parse("empty".into()))?;
        let mems = header.split(',').count().saturating_sub(1);
        if !header.starts_with("core") {
            return Err(MappingError::Parse("missing header".into()));
        }
        let mut cells = Vec::new();
        let mut cores = 0;
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != mems + 1 || f[0].parse::<usize>().ok() != Some(n) {
                return Err(MappingError::Parse(format!("bad row {n}")));
            }
            for v in &f[1..] {
                cells.push(v.parse().map_err(|_| MappingError::Parse(format!("bad cell in row {n}")))?);
            }
            cores += 1;
        }
        Ok(Self { cores, mems, cells })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingRun {
    pub heatmap: Heatmap,
    pub haccs: u64,
    pub seed_log_len: usize,
}

/// Timing-free mapping pass over a program: MMH4s go to core
/// `group mod n_cores`, their HACCs in program and lane order through the
/// mapper.
pub fn map_program<T: Scalar>(
    p: &Program<T>,
    cfg: MapperConfig,
    n_cores: usize,
) -> Result<MappingRun, IsaError> {
    let mut mapper = Mapper::new(cfg, p.layout).map_err(|e| IsaError::Replay(e.to_string()))?;
    let mut hm = Heatmap::new(n_cores, cfg.n_targets);
    let mut haccs = 0;
    for ins in &p.instrs {
        if let Instr::Mmh4(m) = ins {
            let core = m.group as usize % n_cores;
            for h in expand_mmh4::<T>(m, &p.image, p.layout)? {
                hm.add(core, mapper.map_target(h.tag));
                haccs += 1;
            }
        }
    }
    Ok(MappingRun {
        heatmap: hm,
        haccs,
        seed_log_len: mapper.gamma_state().seed_log.len(),
    })
}

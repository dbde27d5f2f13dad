// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::mapping::LoadHistogram;
use crate::uarch::EvictionMode;

/// CPI histogram of one instruction kind: cycles -> instructions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CpiHistogram {
    pub count: u64,
    pub mean: f64,
    pub min: u64,
    pub max: u64,
    pub buckets: BTreeMap<u64, u64>,
}

impl CpiHistogram {
    pub fn from_buckets(buckets: BTreeMap<u64, u64>) -> Self {
        let count: u64 = buckets.values().sum();
        let total: u64 = buckets.iter().map(|(c, n)| c * n).sum();
        Self {
            count,
            mean: if count == 0 { 0.0 } else { total as f64 / count as f64 },
            min: buckets.keys().next().copied().unwrap_or(0),
            max: buckets.keys().next_back().copied().unwrap_or(0),
            buckets,
        }
    }

    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a BTreeMap<u64, u64>>) -> Self {
        let mut b = BTreeMap::new();
        for p in parts {
            for (&c, &n) in p {
                *b.entry(c).or_insert(0) += n;
            }
        }
        Self::from_buckets(b)
    }

    /// `cycles,count` rows in ascending cycle order.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycles,count\n");
        for (c, n) in &self.buckets {
            writeln!(s, "{c},{n}").expect("string write");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StallStats {
    /// Pipeline-cycles waiting for a free operand register.
    pub reg: u64,
    /// Pipeline-cycles whose oldest register waited for operands.
    pub operand: u64,
    /// Cycles a core could not push into a full port.
    pub port: u64,
    /// Cycles the dispatcher issued nothing while work remained.
    pub dispatch: u64,
    /// Engine-cycles blocked by a full write-back queue.
    pub writeback: u64,
    /// Cycles spent waiting at window barriers.
    pub barrier: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub link_moves: u64,
    pub delivered: u64,
    pub hops: u64,
    pub mean_hops: f64,
    pub peak_flits: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorySystemStats {
    pub read_requests: u64,
    pub read_transactions: u64,
    pub write_transactions: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub channel_busy_cycles: u64,
    /// Largest byte count any channel started in one 1000-cycle window.
    pub peak_window_bytes: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadSummary {
    pub cv: f64,
    pub max_over_mean: f64,
}

impl From<&LoadHistogram> for LoadSummary {
    fn from(h: &LoadHistogram) -> Self {
        Self {
            cv: h.cv,
            max_over_mean: h.max_over_mean,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Loads {
    pub core_mmh4: Vec<u64>,
    pub mem_hacc: Vec<u64>,
    pub core: LoadSummary,
    pub mem: LoadSummary,
    pub cell: LoadSummary,
}

/// Everything a run reports. Pure function of the inputs: no wall-clock
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub config: String,
    pub mapper: String,
    pub eviction: EvictionMode,
    pub seed: u64,
    pub cycles: u64,
    pub windows: usize,
    pub mmh4_retired: u64,
    pub haccs: u64,
    pub outputs: u64,
    pub rolling_evictions: u64,
    pub barrier_evictions: u64,
    pub hashpad_peak_occupancy: usize,
    /// Lines still held when the run ended.
    pub hashpad_final_occupancy: usize,
    pub hashpad_peak_per_mem: usize,
    pub probes: u64,
    pub stalls: StallStats,
    pub network: NetworkStats,
    pub memory: MemorySystemStats,
    pub cpi: BTreeMap<String, CpiHistogram>,
    pub loads: Loads,
}

impl SimStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialise")
    }

    pub fn hacc_kind(mode: EvictionMode) -> &'static str {
        match mode {
            EvictionMode::Rolling => "hacc_re",
            EvictionMode::Barrier => "hacc_be",
        }
    }

    pub fn hacc_cpi(&self) -> &CpiHistogram {
        &self.cpi[Self::hacc_kind(self.eviction)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub cycle: u64,
    pub inflight_reads: usize,
    pub hashpad_occupancy: usize,
    pub flits: usize,
    pub mmh4_retired: u64,
    pub haccs_done: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub samples: Vec<Sample>,
}

impl TimeSeries {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cycle,inflight_reads,hashpad_occupancy,flits,mmh4_retired,haccs_done\n");
        for x in &self.samples {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                x.cycle, x.inflight_reads, x.hashpad_occupancy, x.flits, x.mmh4_retired, x.haccs_done
            )
            .expect("string write");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_summary() {
        let h = CpiHistogram::merge([&BTreeMap::from([(5, 2), (7, 1)]), &BTreeMap::from([(5, 1)])]);
        assert_eq!(h.count, 4);
        assert_eq!((h.min, h.max), (5, 7));
        assert!((h.mean - 5.5).abs() < 1e-12);
        assert_eq!(h.to_csv(), "cycles,count\n5,3\n7,1\n");
        assert_eq!(CpiHistogram::from_buckets(BTreeMap::new()).mean, 0.0);
    }
}

// SPDX-License-Identifier: Apache-2.0

//! The cycle loop.
//!
//! Each cycle runs three phases in a fixed order: the dispatcher, every
//! endpoint (cores, memories, controllers) and the network. Endpoints and
//! routers may step on several host threads, but they only read state from
//! the previous phase and their effects are applied in component-id order,
//! so results do not depend on the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dispatch::Dispatcher;
use super::stats::{
    CpiHistogram, LoadSummary, Loads, MemorySystemStats, NetworkStats, Sample, SimStats,
    StallStats, TimeSeries,
};
use super::SimError;
use crate::isa::{lower_spgemm, LowerParams, Program};
use crate::mapping::{Heatmap, LoadHistogram, Mapper, MapperConfig};
use crate::matio::{CooMatrix, CsrMatrix};
use crate::oracle::symbolic_pass;
use crate::uarch::{build_chip, Chip, ChipConfig, EvictionMode};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    pub mode: EvictionMode,
    /// Time-series sampling period in cycles; 0 disables sampling.
    pub sample_every: u64,
    /// Abort after this many cycles.
    pub max_cycles: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            mode: EvictionMode::Rolling,
            sample_every: 100,
            max_cycles: 50_000_000,
        }
    }
}

/// Accumulator lines one window may claim: a quarter of the chip's
/// HashPad lines, which keeps probe sequences short under uneven mapping.
pub fn default_window_budget(cfg: &ChipConfig) -> usize {
    (cfg.totals().hashlines / 4).max(1)
}

/// Symbolic pass plus lowering of `A * B` sized for `cfg`.
pub fn lower_for_chip<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &CsrMatrix<T>,
    cfg: &ChipConfig,
) -> Result<Program<T>, SimError> {
    let plan = symbolic_pass(a, b)?;
    Ok(lower_spgemm(&a.to_csc(), b, &plan, &LowerParams::new(default_window_budget(cfg)))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Issue,
    /// Waiting for every HACC of the window to reach its memory.
    Quiesce,
    /// Memories evicting what the window left behind.
    Flush,
    /// All windows done; controllers draining.
    Drain,
    Done,
}

#[derive(Debug, Clone)]
pub struct SimResult<T> {
    pub c: CsrMatrix<T>,
    pub stats: SimStats,
    pub heatmap: Heatmap,
    pub timeseries: TimeSeries,
    pub assignment_log: Vec<(u64, u32)>,
}

pub struct SimRun<'p, T> {
    pub chip: Chip<T>,
    pub program: &'p Program<T>,
    pub mapper: Mapper,
    pub mapper_cfg: MapperConfig,
    pub cycle: u64,
    pub rng_seed: u64,
    opts: SimOptions,
    dispatcher: Dispatcher,
    heatmap: Heatmap,
    phase: Phase,
    last_progress: u64,
    threshold: u64,
    net: NetworkStats,
    barrier_cycles: u64,
    peak_occupancy: usize,
    timeseries: TimeSeries,
}

impl<'p, T: Scalar> SimRun<'p, T> {
    /// The mapper's target count is set to the chip's memory count.
    pub fn new(
        cfg: &ChipConfig,
        program: &'p Program<T>,
        mut mapper_cfg: MapperConfig,
        opts: SimOptions,
    ) -> Result<Self, SimError> {
        let chip = build_chip::<T>(cfg, opts.mode, program.layout)?;
        mapper_cfg.n_targets = chip.mems.len();
        let mapper = Mapper::new(mapper_cfg, program.layout)?;
        let dispatcher = Dispatcher::new(
            program,
            chip.cores.len(),
            cfg.dispatch_width,
            cfg.channel.granule_bytes,
        )?;
        let heatmap = Heatmap::new(chip.cores.len(), chip.mems.len());
        Ok(Self {
            threshold: cfg.deadlock_threshold(),
            chip,
            program,
            mapper,
            mapper_cfg,
            cycle: 0,
            rng_seed: mapper_cfg.rng_seed,
            opts,
            dispatcher,
            heatmap,
            phase: Phase::Issue,
            last_progress: 0,
            net: NetworkStats::default(),
            barrier_cycles: 0,
            peak_occupancy: 0,
            timeseries: TimeSeries::default(),
        })
    }

    fn haccs_done(&self) -> u64 {
        self.chip.mems.iter().map(|m| m.stats.haccs).sum()
    }

    fn retired(&self) -> u64 {
        self.chip.cores.iter().map(|c| c.stats.retired).sum()
    }

    fn window_drained(&self) -> bool {
        self.retired() == self.dispatcher.dispatched
            && self.haccs_done() == self.dispatcher.haccs_dispatched
            && self.chip.cores.iter().all(|c| c.is_idle())
            && self.chip.mems.iter().all(|m| m.is_quiet())
    }

    fn all_idle(&self) -> bool {
        self.chip.cores.iter().all(|c| c.is_idle())
            && self.chip.mems.iter().all(|m| m.is_quiet() && m.occupancy() == 0)
            && self.chip.mcs.iter().all(|m| m.is_idle())
            && self.chip.flits_in_network() == 0
    }

    /// Advances the phase machine; true if it moved.
    fn control(&mut self) -> bool {
        match self.phase {
            Phase::Issue if self.dispatcher.finished() => {
                self.phase = Phase::Drain;
                for mc in &mut self.chip.mcs {
                    mc.draining = true;
                }
                true
            }
            Phase::Issue if self.dispatcher.window_issued() => {
                self.phase = Phase::Quiesce;
                true
            }
            Phase::Quiesce if self.window_drained() => {
                for m in &mut self.chip.mems {
                    m.flushing = true;
                }
                self.phase = Phase::Flush;
                true
            }
            Phase::Flush if self.chip.mems.iter().all(|m| !m.flushing && m.is_quiet()) => {
                self.dispatcher.advance_window();
                self.phase = Phase::Issue;
                true
            }
            Phase::Drain if self.all_idle() => {
                self.phase = Phase::Done;
                true
            }
            _ => false,
        }
    }

    pub fn is_done(&self) -> bool {
        self.phase == Phase::Done
    }

    /// One cycle.
    pub fn step(&mut self) -> Result<(), SimError> {
        let now = self.cycle;
        let mut progress = self.control();
        if matches!(self.phase, Phase::Quiesce | Phase::Flush) {
            self.barrier_cycles += 1;
        }
        if self.phase == Phase::Issue {
            let n = self
                .dispatcher
                .step(&mut self.chip, self.program, &mut self.mapper, &mut self.heatmap)?;
            progress |= n > 0;
        }
        progress |= self.chip.step_endpoints(now)?;
        let ns = self.chip.step_network(now);
        progress |= ns.link_moves + ns.ejected > 0;
        self.net.link_moves += ns.link_moves;
        self.net.delivered += ns.ejected;
        self.net.hops += ns.hops_delivered;
        self.net.peak_flits = self.net.peak_flits.max(self.chip.flits_in_network());
        self.peak_occupancy = self.peak_occupancy.max(self.chip.hashpad_occupancy());

        if self.opts.sample_every > 0 && now.is_multiple_of(self.opts.sample_every) {
            self.timeseries.samples.push(Sample {
                cycle: now,
                inflight_reads: self.chip.mcs.iter().map(|m| m.outstanding()).sum(),
                hashpad_occupancy: self.chip.hashpad_occupancy(),
                flits: self.chip.flits_in_network(),
                mmh4_retired: self.retired(),
                haccs_done: self.haccs_done(),
            });
        }

        if progress {
            self.last_progress = now;
        } else if now - self.last_progress > self.threshold {
            return Err(SimError::Deadlock {
                cycle: now,
                dump: self.dump(),
            });
        }
        self.cycle += 1;
        if self.cycle >= self.opts.max_cycles && !self.is_done() {
            return Err(SimError::Timeout { cycles: self.cycle });
        }
        Ok(())
    }

    /// Queue occupancies and the oldest blocked work, for deadlock reports.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "cycle {} phase {:?} window {}/{} dispatched {} retired {} haccs {}/{}",
            self.cycle,
            self.phase,
            self.dispatcher.current_window(),
            self.dispatcher.n_windows(),
            self.dispatcher.dispatched,
            self.retired(),
            self.haccs_done(),
            self.dispatcher.haccs_dispatched
        );
        for c in self.chip.cores.iter().filter(|c| !c.is_idle()) {
            let _ = writeln!(
                s,
                "core {}: buffer {} regs {} inbox {} ports {:?}",
                c.id,
                c.buffer.len(),
                c.live_regs(),
                c.inbox.len(),
                c.ports.iter().map(|q| q.len()).collect::<Vec<_>>()
            );
        }
        for m in self.chip.mems.iter().filter(|m| !m.is_quiet() || m.occupancy() > 0) {
            let _ = writeln!(
                s,
                "mem {}: inbox {} occupancy {} flushing {} ports {:?}",
                m.id,
                m.inbox.len(),
                m.occupancy(),
                m.flushing,
                m.ports.iter().map(|q| q.len()).collect::<Vec<_>>()
            );
        }
        for m in self.chip.mcs.iter().filter(|m| !m.is_idle()) {
            let _ = writeln!(s, "mc {}: inbox {} outstanding {}", m.id, m.inbox.len(), m.outstanding());
        }
        let _ = writeln!(s, "flits in network {}", self.chip.flits_in_network());
        s
    }

    pub fn run_to_completion(mut self) -> Result<SimResult<T>, SimError> {
        while !self.is_done() {
            self.step()?;
        }
        self.finish()
    }

    fn finish(self) -> Result<SimResult<T>, SimError> {
        let chip = &self.chip;
        let expect_haccs = self.program.hacc_count();
        let expect_mmh4 = self.program.mmh4_count() as u64;
        let fail = |msg: String| Err(SimError::Conservation(msg));

        let emitted: u64 = chip.cores.iter().map(|c| c.stats.haccs_emitted).sum();
        let consumed = self.haccs_done();
        if emitted != expect_haccs || consumed != expect_haccs || self.heatmap.total() != expect_haccs {
            return fail(format!(
                "HACCs: program {expect_haccs}, emitted {emitted}, consumed {consumed}, mapped {}",
                self.heatmap.total()
            ));
        }
        let retired = self.retired();
        if retired != expect_mmh4 {
            return fail(format!("MMH4s: program {expect_mmh4}, retired {retired}"));
        }
        let rolling: u64 = chip.mems.iter().map(|m| m.stats.evictions).sum();
        let flushed: u64 = chip.mems.iter().map(|m| m.stats.flush_evictions).sum();
        let mut entries: Vec<(u32, u32, T)> = chip.mcs.iter().flat_map(|m| m.outputs.iter().copied()).collect();
        if rolling + flushed != entries.len() as u64 {
            return fail(format!(
                "evictions {} but {} outputs reached the controllers",
                rolling + flushed,
                entries.len()
            ));
        }
        entries.sort_unstable_by_key(|e| (e.0, e.1));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return fail(format!("output ({}, {}) written twice", w[0].0, w[0].1));
        }
        if !self.all_idle() {
            return fail(format!("state left behind at exit:\n{}", self.dump()));
        }
        let max_window = self
            .program
            .windows
            .windows
            .iter()
            .map(|w| w.total_capacity())
            .max()
            .unwrap_or(0);
        if self.peak_occupancy > max_window {
            return fail(format!(
                "HashPad occupancy {} above the largest window capacity {max_window}",
                self.peak_occupancy
            ));
        }

        let hist = |f: &dyn Fn(&crate::uarch::CoreStats) -> &BTreeMap<u64, u64>| {
            CpiHistogram::merge(chip.cores.iter().map(|c| f(&c.stats)))
        };
        let mut cpi = BTreeMap::new();
        cpi.insert("mmh4_full".to_string(), hist(&|s| &s.cpi_full));
        cpi.insert("mmh4_partial".to_string(), hist(&|s| &s.cpi_partial));
        let hacc = CpiHistogram::merge(chip.mems.iter().map(|m| &m.stats.hacc_cpi));
        if hacc.count != expect_haccs {
            return fail(format!("HACC CPI mass {} for {expect_haccs} HACCs", hacc.count));
        }
        cpi.insert(SimStats::hacc_kind(self.opts.mode).to_string(), hacc);

        let sum = |f: &dyn Fn(&crate::uarch::CoreStats) -> u64| chip.cores.iter().map(|c| f(&c.stats)).sum::<u64>();
        let stalls = StallStats {
            reg: sum(&|s| s.stall_reg),
            operand: sum(&|s| s.stall_operand),
            port: sum(&|s| s.stall_port),
            dispatch: self.dispatcher.stall_cycles,
            writeback: chip.mems.iter().map(|m| m.stats.writeback_stalls).sum(),
            barrier: self.barrier_cycles,
        };
        let mut memory = MemorySystemStats::default();
        for mc in &chip.mcs {
            memory.read_requests += mc.stats.read_requests;
            memory.read_transactions += mc.stats.read_transactions;
            memory.write_transactions += mc.stats.write_transactions;
            memory.bytes_read += mc.stats.bytes_read;
            memory.bytes_written += mc.stats.bytes_written;
            let ch = mc.channel().stats();
            memory.channel_busy_cycles += ch.busy_cycles;
            memory.peak_window_bytes = memory.peak_window_bytes.max(ch.peak_window_bytes);
        }
        let mut net = self.net;
        net.mean_hops = if net.delivered == 0 {
            0.0
        } else {
            net.hops as f64 / net.delivered as f64
        };
        let summary = |counts: Vec<u64>| {
            LoadHistogram::from_counts(counts)
                .map(|h| LoadSummary::from(&h))
                .unwrap_or_default()
        };
        let core_mmh4: Vec<u64> = chip.cores.iter().map(|c| c.stats.retired).collect();
        let mem_hacc: Vec<u64> = chip.mems.iter().map(|m| m.stats.haccs).collect();
        let loads = Loads {
            core: summary(core_mmh4.clone()),
            mem: summary(mem_hacc.clone()),
            cell: summary(self.heatmap.cells.clone()),
            core_mmh4,
            mem_hacc,
        };

        let stats = SimStats {
            config: chip.cfg.name.clone(),
            mapper: self.mapper_cfg.strategy.name().to_string(),
            eviction: self.opts.mode,
            seed: self.rng_seed,
            cycles: self.cycle,
            windows: self.dispatcher.n_windows(),
            mmh4_retired: retired,
            haccs: consumed,
            outputs: entries.len() as u64,
            rolling_evictions: rolling,
            barrier_evictions: flushed,
            hashpad_peak_occupancy: self.peak_occupancy,
            hashpad_final_occupancy: chip.mems.iter().map(|m| m.occupancy()).sum(),
            hashpad_peak_per_mem: chip.mems.iter().map(|m| m.stats.peak_occupancy).max().unwrap_or(0),
            probes: chip.mems.iter().map(|m| m.stats.probes).sum(),
            stalls,
            network: net,
            memory,
            cpi,
            loads,
        };
        let c = CooMatrix {
            n_rows: self.program.n_rows,
            n_cols: self.program.n_cols,
            entries,
        }
        .to_csr();
        Ok(SimResult {
            c,
            stats,
            heatmap: self.heatmap,
            timeseries: self.timeseries,
            assignment_log: self.dispatcher.assignment_log,
        })
    }
}

/// Builds and runs a simulation of `program` on `cfg`.
pub fn simulate<T: Scalar>(
    cfg: &ChipConfig,
    program: &Program<T>,
    mapper: MapperConfig,
    opts: SimOptions,
) -> Result<SimResult<T>, SimError> {
    SimRun::new(cfg, program, mapper, opts)?.run_to_completion()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::Strategy;
    use crate::matio::{generate_rmat, randomize_values, RmatParams};
    use crate::oracle::spgemm_gustavson;

    fn mapper() -> MapperConfig {
        MapperConfig::new(Strategy::DrhmLow, 1)
    }

    fn rmat(scale: u32, ef: u32, seed: u64) -> CsrMatrix<i64> {
        let mut m: CooMatrix<i64> = generate_rmat(&RmatParams::graph500(scale, ef, seed)).unwrap();
        randomize_values(&mut m, -4, 9, seed);
        m.to_csr()
    }

    #[test]
    fn empty_program_drains_quickly() {
        let cfg = ChipConfig::tile4();
        let z = CooMatrix::<i64>::new(8, 8).unwrap().to_csr();
        let p = lower_for_chip(&z, &z, &cfg).unwrap();
        let r = simulate(&cfg, &p, mapper(), SimOptions::default()).unwrap();
        assert_eq!(r.stats.mmh4_retired, 0);
        assert_eq!(r.stats.haccs, 0);
        assert!(r.stats.cycles < 10, "{} cycles", r.stats.cycles);
        assert_eq!(r.c.nnz(), 0);
    }

    #[test]
    fn identity_64_on_tile4() {
        let cfg = ChipConfig::tile4();
        let i = CsrMatrix::<i64>::identity(64);
        let p = lower_for_chip(&i, &i, &cfg).unwrap();
        let r = simulate(&cfg, &p, mapper(), SimOptions::default()).unwrap();
        assert_eq!(r.c, i);
        assert_eq!(r.stats.rolling_evictions + r.stats.barrier_evictions, 64);
        assert_eq!(r.stats.hacc_cpi().count, 64);
    }

    /// One HACC into an empty pad: port out, the hops, port in, one compare
    /// step, one accumulate.
    #[test]
    fn single_hacc_cpi_is_path_latency() {
        let cfg = ChipConfig::tile4();
        let a = CooMatrix::from_entries(1, 1, [(0, 0, 3i64)]).unwrap().to_csr();
        let p = lower_for_chip(&a, &a, &cfg).unwrap();
        let r = simulate(&cfg, &p, mapper(), SimOptions::default()).unwrap();
        assert_eq!(r.c.values(), &[9]);
        let core = r.assignment_log[0].1 as usize;
        let mem = r.heatmap.mem_loads().iter().position(|&n| n == 1).unwrap();
        let chip = build_chip::<i64>(&cfg, EvictionMode::Rolling, p.layout).unwrap();
        let hops = chip.topo.distance(chip.topo.core_router[core], chip.topo.mem_router[mem]) as u64;
        let l = cfg.latencies;
        let want = l.port + hops * l.hop + l.port + l.compare + l.accumulate;
        assert_eq!(r.stats.hacc_cpi().buckets, BTreeMap::from([(want, 1)]));
    }

    #[test]
    fn rmat_matches_oracle_both_modes() {
        let cfg = ChipConfig::tile4();
        let a = rmat(6, 4, 3);
        let want = spgemm_gustavson(&a, &a).unwrap();
        let p = lower_for_chip(&a, &a, &cfg).unwrap();
        let mut cpi = Vec::new();
        for mode in [EvictionMode::Rolling, EvictionMode::Barrier] {
            let opts = SimOptions { mode, ..SimOptions::default() };
            let r = simulate(&cfg, &p, mapper(), opts).unwrap();
            assert_eq!(r.c, want, "{mode:?}");
            assert_eq!(r.stats.haccs, p.hacc_count());
            assert_eq!(r.stats.outputs as usize, want.nnz());
            let mass: u64 = ["mmh4_full", "mmh4_partial"].iter().map(|k| r.stats.cpi[*k].count).sum();
            assert_eq!(mass, p.mmh4_count() as u64);
            cpi.push((r.stats.hacc_cpi().mean, r.stats.hashpad_peak_occupancy));
        }
        assert!(cpi[0].0 <= cpi[1].0, "{cpi:?}");
        assert!(cpi[0].1 <= cpi[1].1, "{cpi:?}");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = ChipConfig::tile16();
        let a = rmat(6, 4, 11);
        let p = lower_for_chip(&a, &a, &cfg).unwrap();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&cfg, &p, mapper(), SimOptions::default()).unwrap())
        };
        let (one, four) = (run(1), run(4));
        assert_eq!(one.stats.to_json(), four.stats.to_json());
        assert_eq!(one.assignment_log, four.assignment_log);
        assert_eq!(one.timeseries, four.timeseries);
        assert_eq!(one.c, four.c);
    }

    #[test]
    fn dedicated_writeback_path_is_equivalent() {
        let mut cfg = ChipConfig::tile4();
        cfg.writeback_path = crate::uarch::WritebackPath::Dedicated;
        let a = rmat(5, 4, 2);
        let p = lower_for_chip(&a, &a, &cfg).unwrap();
        let r = simulate(&cfg, &p, mapper(), SimOptions::default()).unwrap();
        assert_eq!(r.c, spgemm_gustavson(&a, &a).unwrap());
    }
}

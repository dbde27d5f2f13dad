// SPDX-License-Identifier: Apache-2.0

//! Accumulation unit: hash engines over a shared HashPad.
//!
//! Each engine owns an equal slice of the lines. A HACC goes to engine
//! `fmix32(tag) mod E`; inside the slice the home line is `tag mod P`, `P`
//! the largest prime not above the slice length, with quadratic probing.
//! Comparing one probe sequence costs `ceil(probes / comparators)` compare
//! steps, or one step in full-parallel mode.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::memctrl::{output_granule, shortest};
use super::packet::{Endpoint, Packet, Payload};
use super::{Latencies, MemConfig, UarchError};
use crate::isa::TagLayout;
use crate::oracle::prev_prime;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvictionMode {
    /// Free a line as soon as its counter reaches zero.
    Rolling,
    /// Keep every line until the window's barrier.
    Barrier,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashLine<T> {
    pub tag: u32,
    pub data: T,
    /// Contributions still expected.
    pub counter: u32,
    pub occupied: bool,
    /// Freed since the last barrier; probing continues past it.
    pub tombstone: bool,
}

/// Murmur3 finaliser.
pub fn fmix32(mut h: u32) -> u32 {
    h ^= h >> 16;
    h = h.wrapping_mul(0x85eb_ca6b);
    h ^= h >> 13;
    h = h.wrapping_mul(0xc2b2_ae35);
    h ^ (h >> 16)
}

#[derive(Debug, Clone, Copy)]
struct Job<T> {
    tag: u32,
    data: T,
    counter: u32,
    emitted: u64,
    slot: usize,
    hit: bool,
    done_at: u64,
}

#[derive(Debug, Clone)]
struct EngineState<T> {
    start: usize,
    modulus: usize,
    job: Option<Job<T>>,
    flush_cursor: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MemStats {
    pub haccs: u64,
    pub inserts: u64,
    pub updates: u64,
    pub evictions: u64,
    pub flush_evictions: u64,
    pub probes: u64,
    pub compare_cycles: u64,
    pub writeback_stalls: u64,
    pub peak_occupancy: usize,
    /// HACC cycles from emission at the core to write-back of its line.
    pub hacc_cpi: BTreeMap<u64, u64>,
}

/// Where evicted outputs go.
#[derive(Debug, Clone)]
pub struct WritebackRoute {
    pub mc_routers: Arc<Vec<u32>>,
    pub words_per_granule: u32,
}

impl WritebackRoute {
    pub fn mc_of(&self, row: u32, col: u32) -> usize {
        (output_granule(row, col, self.words_per_granule) % self.mc_routers.len() as u64) as usize
    }
}

#[derive(Debug, Clone)]
pub struct NeuraMem<T> {
    pub id: usize,
    pub router: u32,
    cfg: MemConfig,
    lat: Latencies,
    full_parallel: bool,
    mode: EvictionMode,
    layout: TagLayout,
    pub inbox: VecDeque<Packet<T>>,
    lines: Vec<HashLine<T>>,
    line_emits: Vec<Vec<u64>>,
    engines: Vec<EngineState<T>>,
    occupancy: usize,
    backlog: VecDeque<Packet<T>>,
    backlog_cap: usize,
    pub ports: Vec<VecDeque<Packet<T>>>,
    port_depth: usize,
    /// Write-backs handed straight to the controllers when the dedicated
    /// path is configured.
    pub direct: Option<VecDeque<(usize, Packet<T>)>>,
    route: WritebackRoute,
    /// Set by the dispatcher at a barrier; cleared once the pad is empty.
    pub flushing: bool,
    pub stats: MemStats,
}

impl<T: Scalar> NeuraMem<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: usize,
        router: u32,
        cfg: MemConfig,
        lat: Latencies,
        full_parallel: bool,
        mode: EvictionMode,
        layout: TagLayout,
        port_depth: usize,
        route: WritebackRoute,
        dedicated: bool,
    ) -> Result<Self, UarchError> {
        let region = cfg.hashlines / cfg.hash_engines;
        let modulus = prev_prime(region as u64)
            .ok_or_else(|| UarchError::Config(format!("engine slice of {region} lines")))?
            as usize;
        let engines = (0..cfg.hash_engines)
            .map(|e| EngineState {
                start: e * region,
                modulus,
                job: None,
                flush_cursor: 0,
            })
            .collect();
        let empty = HashLine {
            tag: 0,
            data: T::zero(),
            counter: 0,
            occupied: false,
            tombstone: false,
        };
        Ok(Self {
            id,
            router,
            cfg,
            lat,
            full_parallel,
            mode,
            layout,
            inbox: VecDeque::new(),
            lines: vec![empty; cfg.hashlines],
            line_emits: vec![Vec::new(); cfg.hashlines],
            engines,
            occupancy: 0,
            backlog: VecDeque::new(),
            backlog_cap: cfg.n_ports * port_depth,
            ports: vec![VecDeque::new(); cfg.n_ports],
            port_depth,
            direct: dedicated.then(VecDeque::new),
            route,
            flushing: false,
            stats: MemStats::default(),
        })
    }

    pub fn accept_free(&self) -> usize {
        self.cfg.instr_buffer - self.inbox.len()
    }

    pub fn occupancy(&self) -> usize {
        self.occupancy
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn hashpad_bytes(&self) -> usize {
        self.lines.len() * self.cfg.line_bytes
    }

    pub fn n_engines(&self) -> usize {
        self.engines.len()
    }

    pub fn line(&self, slot: usize) -> &HashLine<T> {
        &self.lines[slot]
    }

    pub fn engine_of(&self, tag: u32) -> usize {
        fmix32(tag) as usize % self.engines.len()
    }

    pub fn engines_idle(&self) -> bool {
        self.engines.iter().all(|e| e.job.is_none())
    }

    /// No HACC waiting or in flight and nothing left to send.
    pub fn is_quiet(&self) -> bool {
        self.inbox.is_empty()
            && self.engines_idle()
            && self.backlog.is_empty()
            && self.ports.iter().all(VecDeque::is_empty)
            && self.direct.as_ref().is_none_or(VecDeque::is_empty)
    }

    /// Probe sequence for `tag` in engine `e`: the matching line, or the
    /// first reusable one, and the number of lines compared.
    fn probe(&self, e: usize, tag: u32) -> Option<(usize, bool, u64)> {
        let eng = &self.engines[e];
        let p = eng.modulus;
        let home = tag as usize % p;
        let mut reuse = None;
        for i in 0..p {
            let slot = eng.start + (home + i * i) % p;
            let line = &self.lines[slot];
            if line.occupied {
                if line.tag == tag {
                    return Some((slot, true, i as u64 + 1));
                }
            } else if line.tombstone {
                reuse.get_or_insert(slot);
            } else {
                return Some((reuse.unwrap_or(slot), false, i as u64 + 1));
            }
        }
        reuse.map(|slot| (slot, false, p as u64))
    }

    fn compare_cycles(&self, probes: u64) -> u64 {
        if self.full_parallel {
            self.lat.compare
        } else {
            self.lat.compare * probes.div_ceil(self.cfg.tag_comparators_per_engine as u64)
        }
    }

    fn writeback(&mut self, tag: u32, value: T, now: u64) {
        let (row, col) = self.layout.decode(tag);
        let (row, col) = (row as u32, col as u32);
        let mc = self.route.mc_of(row, col);
        self.backlog.push_back(Packet {
            dst: Endpoint::Mc(mc as u32),
            dst_router: self.route.mc_routers[mc],
            ready_at: now + self.lat.port,
            hops: 0,
            payload: Payload::WriteBack { row, col, value },
        });
    }

    fn record_cpi(&mut self, emitted: u64, now: u64) {
        *self.stats.hacc_cpi.entry(now - emitted).or_insert(0) += 1;
    }

    fn evict(&mut self, slot: usize, now: u64) {
        let line = self.lines[slot];
        self.lines[slot].occupied = false;
        self.lines[slot].tombstone = true;
        self.occupancy -= 1;
        for e in std::mem::take(&mut self.line_emits[slot]) {
            self.record_cpi(e, now);
        }
        self.writeback(line.tag, line.data, now);
    }

    fn finish(&mut self, j: Job<T>, now: u64) -> Result<(), UarchError> {
        if j.hit {
            let line = &mut self.lines[j.slot];
            if line.counter == 0 {
                return Err(UarchError::Counter {
                    mem: self.id,
                    tag: j.tag,
                });
            }
            line.data += j.data;
            line.counter -= 1;
            self.line_emits[j.slot].push(j.emitted);
            self.stats.updates += 1;
            if line.counter == 0 && self.mode == EvictionMode::Rolling {
                self.stats.evictions += 1;
                self.evict(j.slot, now);
            }
        } else if j.counter == 0 && self.mode == EvictionMode::Rolling {
            // Sole contribution: straight through.
            self.stats.inserts += 1;
            self.stats.evictions += 1;
            self.record_cpi(j.emitted, now);
            self.writeback(j.tag, j.data, now);
        } else {
            self.lines[j.slot] = HashLine {
                tag: j.tag,
                data: j.data,
                counter: j.counter,
                occupied: true,
                tombstone: false,
            };
            self.line_emits[j.slot].push(j.emitted);
            self.occupancy += 1;
            self.stats.peak_occupancy = self.stats.peak_occupancy.max(self.occupancy);
            self.stats.inserts += 1;
        }
        self.stats.haccs += 1;
        Ok(())
    }

    /// One cycle. Returns whether anything changed.
    pub fn step(&mut self, now: u64) -> Result<bool, UarchError> {
        let mut progress = false;
        for e in 0..self.engines.len() {
            let Some(j) = self.engines[e].job else { continue };
            if j.done_at > now {
                continue;
            }
            if self.backlog.len() >= self.backlog_cap {
                self.stats.writeback_stalls += 1;
                continue;
            }
            self.engines[e].job = None;
            self.finish(j, now)?;
            progress = true;
        }

        for e in 0..self.engines.len() {
            if self.engines[e].job.is_some() {
                continue;
            }
            let pos = self.inbox.iter().position(|p| match p.payload {
                Payload::Hacc { tag, .. } => p.ready_at <= now && self.engine_of(tag) == e,
                _ => false,
            });
            if let Some(pos) = pos {
                let p = self.inbox.remove(pos).expect("position in range");
                let Payload::Hacc {
                    tag,
                    data,
                    counter,
                    emitted,
                    ..
                } = p.payload
                else {
                    unreachable!("filtered above")
                };
                let (slot, hit, probes) =
                    self.probe(e, tag).ok_or(UarchError::HashPadOverflow {
                        mem: self.id,
                        engine: e,
                        tag,
                    })?;
                let cmp = self.compare_cycles(probes);
                self.stats.probes += probes;
                self.stats.compare_cycles += cmp;
                self.engines[e].job = Some(Job {
                    tag,
                    data,
                    counter,
                    emitted,
                    slot,
                    hit,
                    done_at: now + cmp + self.lat.accumulate,
                });
                progress = true;
            } else if self.flushing && self.backlog.len() < self.backlog_cap {
                // One line per engine per cycle.
                let (start, len) = (self.engines[e].start, self.cfg.hashlines / self.engines.len());
                let mut cur = self.engines[e].flush_cursor;
                while cur < len && !self.lines[start + cur].occupied {
                    cur += 1;
                }
                self.engines[e].flush_cursor = cur;
                if cur < len {
                    self.stats.flush_evictions += 1;
                    self.evict(start + cur, now);
                    progress = true;
                }
            }
        }
        if self.flushing && self.occupancy == 0 && self.engines_idle() {
            self.flushing = false;
            for eng in &mut self.engines {
                eng.flush_cursor = 0;
            }
            for l in &mut self.lines {
                l.tombstone = false;
            }
        }

        while let Some(p) = self.backlog.front() {
            if let Some(direct) = &mut self.direct {
                if direct.len() >= self.backlog_cap {
                    break;
                }
                let Payload::WriteBack { row, col, .. } = p.payload else {
                    unreachable!("backlog holds write-backs")
                };
                let mc = self.route.mc_of(row, col);
                direct.push_back((mc, self.backlog.pop_front().expect("front")));
                progress = true;
                continue;
            }
            let Some(q) = shortest(&self.ports).filter(|&q| self.ports[q].len() < self.port_depth)
            else {
                break;
            };
            self.ports[q].push_back(self.backlog.pop_front().expect("front"));
            progress = true;
        }
        Ok(progress)
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Multiplier core: in-order pipelines with dynamically allocated operand
//! registers and a per-register scoreboard.
//!
//! Stages per pipeline: decode, register allocation, address generation
//! (shared generators), operand wait, multiply, HACC emission. A register
//! stays allocated from allocation until its last HACC has left through a
//! port; only the oldest register of a pipeline may multiply, so
//! instructions retire in acceptance order.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::packet::{Endpoint, Packet, Payload, ReadTicket};
use super::{CoreConfig, Latencies};

/// A dispatched MMH4 with its memory reads and HACCs resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Mmh4Job<T> {
    pub index: u64,
    pub full: bool,
    /// `(granule, controller)` reads gating execution.
    pub reads: Vec<(u64, u32)>,
    /// `(tag, data, counter, target memory)` in lane order.
    pub haccs: Vec<(u32, T, u32, u32)>,
}

#[derive(Debug, Clone)]
struct Reg<T> {
    job: Mmh4Job<T>,
    seq: u64,
    accepted: u64,
    issued: usize,
    outstanding: u32,
    ready_at: u64,
    mult_done: Option<u64>,
    emitted: usize,
}

#[derive(Debug, Clone)]
struct Latch<T> {
    job: Mmh4Job<T>,
    seq: u64,
    accepted: u64,
    ready_at: u64,
}

#[derive(Debug, Clone)]
struct Pipe<T> {
    decode: Option<Latch<T>>,
    alloc: Option<Latch<T>>,
    regs: VecDeque<Reg<T>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoreStats {
    pub accepted: u64,
    pub retired: u64,
    pub reads_issued: u64,
    pub haccs_emitted: u64,
    pub stall_reg: u64,
    pub stall_operand: u64,
    pub stall_port: u64,
    pub peak_regs: usize,
    pub cpi_full: BTreeMap<u64, u64>,
    pub cpi_partial: BTreeMap<u64, u64>,
    /// Dispatch index of every retired MMH4, in retirement order per
    /// pipeline.
    pub retire_log: Vec<Vec<u64>>,
}

#[derive(Debug, Clone)]
pub struct NeuraCore<T> {
    pub id: usize,
    pub router: u32,
    cfg: CoreConfig,
    lat: Latencies,
    /// Dispatched MMH4s not yet in a pipeline.
    pub buffer: VecDeque<Mmh4Job<T>>,
    pipes: Vec<Pipe<T>>,
    rr: usize,
    next_seq: u64,
    pub inbox: VecDeque<Packet<T>>,
    pub ports: Vec<VecDeque<Packet<T>>>,
    port_depth: usize,
    mem_routers: Arc<Vec<u32>>,
    mc_routers: Arc<Vec<u32>>,
    pub stats: CoreStats,
}

impl<T: Copy> NeuraCore<T> {
    pub fn new(
        id: usize,
        router: u32,
        cfg: CoreConfig,
        lat: Latencies,
        port_depth: usize,
        mem_routers: Arc<Vec<u32>>,
        mc_routers: Arc<Vec<u32>>,
    ) -> Self {
        let pipes = (0..cfg.n_pipelines)
            .map(|_| Pipe {
                decode: None,
                alloc: None,
                regs: VecDeque::new(),
            })
            .collect();
        Self {
            id,
            router,
            cfg,
            lat,
            buffer: VecDeque::new(),
            pipes,
            rr: 0,
            next_seq: 0,
            inbox: VecDeque::new(),
            ports: vec![VecDeque::new(); cfg.n_ports],
            port_depth,
            mem_routers,
            mc_routers,
            stats: CoreStats {
                retire_log: vec![Vec::new(); cfg.n_pipelines],
                ..CoreStats::default()
            },
        }
    }

    pub fn buffer_free(&self) -> usize {
        self.cfg.instr_buffer - self.buffer.len()
    }

    /// Registers allocated across pipelines.
    pub fn live_regs(&self) -> usize {
        self.pipes.iter().map(|p| p.regs.len()).sum()
    }

    pub fn n_pipelines(&self) -> usize {
        self.pipes.len()
    }

    /// Nothing buffered, in a pipeline or waiting in a port.
    pub fn is_idle(&self) -> bool {
        self.buffer.is_empty()
            && self.inbox.is_empty()
            && self
                .pipes
                .iter()
                .all(|p| p.decode.is_none() && p.alloc.is_none() && p.regs.is_empty())
            && self.ports.iter().all(VecDeque::is_empty)
    }

    /// `used` is a bit mask of ports already written this cycle.
    fn free_port(&self, used: u64) -> Option<usize> {
        (0..self.ports.len())
            .filter(|&q| used & (1 << q) == 0 && self.ports[q].len() < self.port_depth)
            .min_by_key(|&q| self.ports[q].len())
    }

    /// One cycle. Returns whether anything changed.
    pub fn step(&mut self, now: u64) -> bool {
        let mut progress = false;
        let mut port_used = 0u64;

        for p in self.inbox.drain(..) {
            let Payload::ReadResp { ticket } = p.payload else {
                unreachable!("cores only receive read replies")
            };
            let reg = self.pipes[ticket.pipe as usize]
                .regs
                .iter_mut()
                .find(|r| r.seq == ticket.seq)
                .expect("reply for a live register");
            reg.outstanding -= 1;
            progress = true;
        }

        // Execute and emit: oldest register of each pipeline.
        for pi in 0..self.pipes.len() {
            let Some(reg) = self.pipes[pi].regs.front() else { continue };
            match reg.mult_done {
                Some(done) if done <= now => {
                    let mut blocked = false;
                    while self.pipes[pi].regs[0].emitted < self.pipes[pi].regs[0].job.haccs.len() {
                        let Some(q) = self.free_port(port_used) else {
                            blocked = true;
                            break;
                        };
                        let reg = &mut self.pipes[pi].regs[0];
                        let (tag, data, counter, mem) = reg.job.haccs[reg.emitted];
                        reg.emitted += 1;
                        port_used |= 1 << q;
                        self.ports[q].push_back(Packet {
                            dst: Endpoint::Mem(mem),
                            dst_router: self.mem_routers[mem as usize],
                            ready_at: now + self.lat.port,
                            hops: 0,
                            payload: Payload::Hacc {
                                tag,
                                data,
                                counter,
                                core: self.id as u32,
                                emitted: now,
                            },
                        });
                        self.stats.haccs_emitted += 1;
                        progress = true;
                    }
                    if blocked {
                        self.stats.stall_port += 1;
                    } else {
                        let reg = self.pipes[pi].regs.pop_front().expect("front");
                        let cpi = now - reg.accepted;
                        let h = if reg.job.full {
                            &mut self.stats.cpi_full
                        } else {
                            &mut self.stats.cpi_partial
                        };
                        *h.entry(cpi).or_insert(0) += 1;
                        self.stats.retired += 1;
                        self.stats.retire_log[pi].push(reg.job.index);
                        progress = true;
                    }
                }
                Some(_) => {}
                None => {
                    let complete =
                        reg.issued == reg.job.reads.len() && reg.outstanding == 0 && reg.ready_at <= now;
                    if complete {
                        self.pipes[pi].regs[0].mult_done = Some(now + self.lat.multiply);
                        progress = true;
                    } else {
                        self.stats.stall_operand += 1;
                    }
                }
            }
        }

        // Address generation, oldest register first.
        let mut budget = self.cfg.n_addr_generators;
        while budget > 0 {
            let next = self
                .pipes
                .iter()
                .enumerate()
                .flat_map(|(pi, p)| p.regs.iter().enumerate().map(move |(ri, r)| (pi, ri, r)))
                .filter(|(_, _, r)| r.issued < r.job.reads.len())
                .min_by_key(|(_, _, r)| r.seq)
                .map(|(pi, ri, _)| (pi, ri));
            let Some((pi, ri)) = next else { break };
            let Some(q) = self.free_port(port_used) else {
                self.stats.stall_port += 1;
                break;
            };
            let reg = &mut self.pipes[pi].regs[ri];
            let (granule, mc) = reg.job.reads[reg.issued];
            reg.issued += 1;
            reg.outstanding += 1;
            let ticket = ReadTicket {
                core: self.id as u32,
                pipe: pi as u16,
                seq: reg.seq,
            };
            port_used |= 1 << q;
            self.ports[q].push_back(Packet {
                dst: Endpoint::Mc(mc),
                dst_router: self.mc_routers[mc as usize],
                ready_at: now + self.lat.port,
                hops: 0,
                payload: Payload::Read { ticket, granule },
            });
            self.stats.reads_issued += 1;
            budget -= 1;
            progress = true;
        }

        // Register allocation.
        for pi in 0..self.pipes.len() {
            let pipe = &mut self.pipes[pi];
            if !pipe.alloc.as_ref().is_some_and(|l| l.ready_at <= now) {
                continue;
            }
            if pipe.regs.len() >= self.cfg.regs_per_pipeline {
                self.stats.stall_reg += 1;
                continue;
            }
            let l = pipe.alloc.take().expect("checked");
            pipe.regs.push_back(Reg {
                job: l.job,
                seq: l.seq,
                accepted: l.accepted,
                issued: 0,
                outstanding: 0,
                ready_at: now + self.lat.addr_gen,
                mult_done: None,
                emitted: 0,
            });
            self.stats.peak_regs = self.stats.peak_regs.max(pipe.regs.len());
            progress = true;
        }

        // Decode.
        for pipe in &mut self.pipes {
            if pipe.alloc.is_some() || !pipe.decode.as_ref().is_some_and(|l| l.ready_at <= now) {
                continue;
            }
            let mut l = pipe.decode.take().expect("checked");
            l.ready_at = now + self.lat.reg_alloc;
            pipe.alloc = Some(l);
            progress = true;
        }

        // Accept one MMH4 into the next free pipeline in round-robin order.
        if !self.buffer.is_empty() {
            let n = self.pipes.len();
            if let Some(pi) = (0..n).map(|i| (self.rr + i) % n).find(|&pi| self.pipes[pi].decode.is_none()) {
                let job = self.buffer.pop_front().expect("nonempty");
                self.pipes[pi].decode = Some(Latch {
                    job,
                    seq: self.next_seq,
                    accepted: now,
                    ready_at: now + self.lat.decode,
                });
                self.next_seq += 1;
                self.rr = (pi + 1) % n;
                self.stats.accepted += 1;
                progress = true;
            }
        }
        progress
    }
}

/// Cycles from acceptance to the first HACC of an MMH4 whose operands need
/// no memory reads.
pub fn resident_issue_latency(l: &Latencies) -> u64 {
    l.decode + l.reg_alloc + l.addr_gen + l.multiply
}

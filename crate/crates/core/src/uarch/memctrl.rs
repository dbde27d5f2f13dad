// SPDX-License-Identifier: Apache-2.0

//! Per-tile memory controller: coalesces reads that touch one granule,
//! gathers evicted outputs in a write-combine buffer and feeds one DRAM
//! channel.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::packet::{Endpoint, Packet, Payload, ReadTicket};
use super::ChannelConfig;
use crate::engine::{ChannelParams, MemChannelModel};

#[derive(Debug, Clone)]
struct Txn {
    granule: u64,
    write: bool,
    waiters: Vec<(ReadTicket, u32)>,
}

#[derive(Debug, Clone, Copy)]
struct WcEntry {
    granule: u64,
    words: u32,
    opened: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct McStats {
    pub read_requests: u64,
    pub read_transactions: u64,
    pub write_transactions: u64,
    pub writebacks: u64,
    pub bytes_read: u64,
    pub bytes_written: u64,
}

#[derive(Debug, Clone)]
pub struct MemController<T> {
    pub id: usize,
    pub router: u32,
    cfg: ChannelConfig,
    pub inbox: VecDeque<Packet<T>>,
    inbox_depth: usize,
    pub ports: Vec<VecDeque<Packet<T>>>,
    port_depth: usize,
    pending: VecDeque<u64>,
    txns: Vec<Option<Txn>>,
    free_ids: Vec<u64>,
    replies: VecDeque<Packet<T>>,
    wc: Vec<WcEntry>,
    channel: MemChannelModel,
    /// `(row, col, value)` of every output written back through this tile.
    pub outputs: Vec<(u32, u32, T)>,
    /// Flush the write-combine buffer without waiting for timeouts.
    pub draining: bool,
    pub stats: McStats,
    port_latency: u64,
    /// Routers of the cores, indexed by core id, for reply addressing.
    core_routers: std::sync::Arc<Vec<u32>>,
}

impl<T: Copy> MemController<T> {
    pub fn new(
        id: usize,
        router: u32,
        cfg: ChannelConfig,
        n_ports: usize,
        port_depth: usize,
        port_latency: u64,
        core_routers: std::sync::Arc<Vec<u32>>,
    ) -> Self {
        Self {
            id,
            router,
            cfg,
            inbox: VecDeque::new(),
            inbox_depth: cfg.queue_depth,
            ports: vec![VecDeque::new(); n_ports],
            port_depth,
            pending: VecDeque::new(),
            txns: Vec::new(),
            free_ids: Vec::new(),
            replies: VecDeque::new(),
            wc: Vec::new(),
            channel: MemChannelModel::new(ChannelParams {
                peak_bytes_per_cycle: cfg.peak_bytes_per_cycle,
                fixed_latency: cfg.fixed_latency,
                queue_depth: cfg.queue_depth,
            }),
            outputs: Vec::new(),
            draining: false,
            stats: McStats::default(),
            port_latency,
            core_routers,
        }
    }

    pub fn accept_free(&self) -> usize {
        self.inbox_depth - self.inbox.len()
    }

    pub fn channel(&self) -> &MemChannelModel {
        &self.channel
    }

    /// Reads queued or in DRAM.
    pub fn outstanding(&self) -> usize {
        self.pending.len() + self.channel.outstanding()
    }

    pub fn is_idle(&self) -> bool {
        self.inbox.is_empty()
            && self.pending.is_empty()
            && self.channel.is_idle()
            && self.replies.is_empty()
            && self.wc.is_empty()
            && self.ports.iter().all(VecDeque::is_empty)
    }

    fn new_txn(&mut self, t: Txn) -> u64 {
        match self.free_ids.pop() {
            Some(id) => {
                self.txns[id as usize] = Some(t);
                id
            }
            None => {
                self.txns.push(Some(t));
                self.txns.len() as u64 - 1
            }
        }
    }

    fn words_per_granule(&self) -> u32 {
        (self.cfg.granule_bytes / 8) as u32
    }

    fn flush_wc(&mut self, idx: usize) {
        let e = self.wc.remove(idx);
        let id = self.new_txn(Txn {
            granule: e.granule,
            write: true,
            waiters: Vec::new(),
        });
        self.pending.push_back(id);
    }

    /// One cycle. Returns true if anything changed.
    pub fn step(&mut self, now: u64) -> bool {
        let mut progress = false;
        for done in self.channel.tick(now) {
            progress = true;
            let t = self.txns[done.id as usize].take().expect("live transaction");
            self.free_ids.push(done.id);
            for (ticket, n) in t.waiters {
                for _ in 0..n {
                    self.replies.push_back(Packet {
                        dst: Endpoint::Core(ticket.core),
                        dst_router: self.core_routers[ticket.core as usize],
                        ready_at: now,
                        hops: 0,
                        payload: Payload::ReadResp { ticket },
                    });
                }
            }
        }

        // Replies leave through the shortest port queue.
        while let Some(mut p) = self.replies.pop_front() {
            let Some(q) = shortest(&self.ports).filter(|&q| self.ports[q].len() < self.port_depth)
            else {
                self.replies.push_front(p);
                break;
            };
            p.ready_at = now + self.port_latency;
            self.ports[q].push_back(p);
            progress = true;
        }

        let window = self.cfg.reorder_window;
        while self.pending.len() < self.cfg.queue_depth {
            let Some(p) = self.inbox.pop_front() else { break };
            progress = true;
            match p.payload {
                Payload::Read { ticket, granule } => {
                    self.stats.read_requests += 1;
                    let hit = self.pending.iter().take(window).copied().find(|&id| {
                        let t = self.txns[id as usize].as_ref().expect("pending");
                        !t.write && t.granule == granule
                    });
                    match hit {
                        Some(id) => {
                            let t = self.txns[id as usize].as_mut().expect("pending");
                            match t.waiters.iter_mut().find(|w| w.0 == ticket) {
                                Some(w) => w.1 += 1,
                                None => t.waiters.push((ticket, 1)),
                            }
                        }
                        None => {
                            let id = self.new_txn(Txn {
                                granule,
                                write: false,
                                waiters: vec![(ticket, 1)],
                            });
                            self.pending.push_back(id);
                        }
                    }
                }
                Payload::WriteBack { row, col, value } => {
                    self.stats.writebacks += 1;
                    self.outputs.push((row, col, value));
                    let granule = output_granule(row, col, self.words_per_granule());
                    match self.wc.iter().position(|e| e.granule == granule) {
                        Some(i) => self.wc[i].words += 1,
                        None => {
                            if self.wc.len() == self.cfg.write_combine_entries {
                                self.flush_wc(0);
                            }
                            self.wc.push(WcEntry {
                                granule,
                                words: 1,
                                opened: now,
                            });
                        }
                    }
                }
                _ => unreachable!("controllers only receive reads and write-backs"),
            }
        }

        let wpg = self.words_per_granule();
        let mut i = 0;
        while i < self.wc.len() && self.pending.len() < self.cfg.queue_depth {
            let e = self.wc[i];
            if self.draining || e.words >= wpg || now >= e.opened + self.cfg.write_combine_timeout {
                self.flush_wc(i);
                progress = true;
            } else {
                i += 1;
            }
        }

        // The bus queue is kept empty so waiting requests stay mergeable.
        while self.channel.can_submit() && self.channel.queued() == 0 {
            let Some(id) = self.pending.pop_front() else { break };
            let t = self.txns[id as usize].as_ref().expect("pending");
            if t.write {
                self.stats.write_transactions += 1;
                self.stats.bytes_written += self.cfg.granule_bytes;
            } else {
                self.stats.read_transactions += 1;
                self.stats.bytes_read += self.cfg.granule_bytes;
            }
            self.channel.submit(id, self.cfg.granule_bytes, now);
            progress = true;
        }
        progress
    }
}

/// Granule of output element `(row, col)` in a row-major output image.
pub fn output_granule(row: u32, col: u32, words_per_granule: u32) -> u64 {
    ((row as u64) << 32 | col as u64) / words_per_granule as u64
}

pub(crate) fn shortest<T>(ports: &[VecDeque<T>]) -> Option<usize> {
    (0..ports.len()).min_by_key(|&i| ports[i].len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn mc() -> MemController<f64> {
        MemController::new(0, 0, ChannelConfig::default(), 4, 64, 1, Arc::new(vec![5, 6]))
    }

    fn read(core: u32, seq: u64, granule: u64) -> Packet<f64> {
        Packet {
            dst: Endpoint::Mc(0),
            dst_router: 0,
            ready_at: 0,
            hops: 0,
            payload: Payload::Read {
                ticket: ReadTicket { core, pipe: 0, seq },
                granule,
            },
        }
    }

    fn run(m: &mut MemController<f64>, cycles: u64) -> usize {
        let mut replies = 0;
        for t in 0..cycles {
            m.step(t);
            for q in &mut m.ports {
                replies += q.len();
                q.clear();
            }
        }
        replies
    }

    #[test]
    fn four_words_one_granule_one_transaction() {
        let mut m = mc();
        for s in 0..4 {
            m.inbox.push_back(read(0, s, 0));
        }
        assert_eq!(run(&mut m, 300), 4);
        assert_eq!(m.stats.read_transactions, 1);
        assert!(m.is_idle());
    }

    #[test]
    fn repeated_granule_in_window_merges() {
        let mut m = mc();
        for (s, g) in [1u64, 2, 1].into_iter().enumerate() {
            m.inbox.push_back(read(1, s as u64, g));
        }
        assert_eq!(run(&mut m, 300), 3);
        assert_eq!(m.stats.read_transactions, 2);
    }

    #[test]
    fn write_combine_full_granule() {
        let mut m = mc();
        for c in 0..8 {
            m.inbox.push_back(Packet {
                dst: Endpoint::Mc(0),
                dst_router: 0,
                ready_at: 0,
                hops: 0,
                payload: Payload::WriteBack {
                    row: 3,
                    col: c,
                    value: 1.0,
                },
            });
        }
        run(&mut m, 200);
        assert_eq!(m.stats.write_transactions, 1);
        assert_eq!(m.outputs.len(), 8);
        assert!(m.is_idle());
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Analytic DRAM channel: bounded FIFO, a bus that moves
//! `peak_bytes_per_cycle`, and a fixed access latency.
//!
//! A transaction that finds the bus idle when it is submitted completes
//! exactly `fixed_latency` cycles later. Transfers occupy the bus for
//! `ceil(bytes / peak)` cycles, so back-to-back transactions stream at the
//! peak rate.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub peak_bytes_per_cycle: u64,
    pub fixed_latency: u64,
    pub queue_depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completion {
    pub id: u64,
    pub bytes: u64,
    pub submitted: u64,
    pub done: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ChannelStats {
    pub transactions: u64,
    pub bytes: u64,
    pub busy_cycles: u64,
    /// Bytes whose transfer started in the busiest 1000-cycle aligned window.
    pub peak_window_bytes: u64,
}

#[derive(Debug, Clone)]
pub struct MemChannelModel {
    params: ChannelParams,
    queue: VecDeque<(u64, u64, u64)>,
    in_flight: VecDeque<Completion>,
    bus_free_at: u64,
    stats: ChannelStats,
    window: (u64, u64),
}

impl MemChannelModel {
    pub fn new(params: ChannelParams) -> Self {
        assert!(params.peak_bytes_per_cycle > 0 && params.queue_depth > 0);
        Self {
            params,
            queue: VecDeque::new(),
            in_flight: VecDeque::new(),
            bus_free_at: 0,
            stats: ChannelStats::default(),
            window: (0, 0),
        }
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    pub fn can_submit(&self) -> bool {
        self.queue.len() < self.params.queue_depth
    }

    /// Queues a transaction; `false` when the queue is full.
    pub fn submit(&mut self, id: u64, bytes: u64, now: u64) -> bool {
        if !self.can_submit() {
            return false;
        }
        self.queue.push_back((id, bytes, now));
        true
    }

    /// Transactions waiting for the bus.
    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Transactions queued or on the bus.
    pub fn outstanding(&self) -> usize {
        self.queue.len() + self.in_flight.len()
    }

    pub fn is_idle(&self) -> bool {
        self.outstanding() == 0
    }

    pub fn stats(&self) -> ChannelStats {
        self.stats
    }

    /// Starts every transaction the bus can take at `now` and returns those
    /// that complete at `now`, in submission order.
    pub fn tick(&mut self, now: u64) -> Vec<Completion> {
        while let Some(&(id, bytes, submitted)) = self.queue.front() {
            if self.bus_free_at > now {
                break;
            }
            self.queue.pop_front();
            let start = now;
            let transfer = bytes.div_ceil(self.params.peak_bytes_per_cycle).max(1);
            self.bus_free_at = start + transfer;
            self.stats.transactions += 1;
            self.stats.bytes += bytes;
            self.stats.busy_cycles += transfer;
            let w = start / 1000;
            if self.window.0 != w {
                self.window = (w, 0);
            }
            self.window.1 += bytes;
            self.stats.peak_window_bytes = self.stats.peak_window_bytes.max(self.window.1);
            let done = start + self.params.fixed_latency.max(transfer);
            self.in_flight.push_back(Completion {
                id,
                bytes,
                submitted,
                done,
            });
        }
        let mut out = Vec::new();
        while self.in_flight.front().is_some_and(|c| c.done <= now) {
            out.push(self.in_flight.pop_front().expect("checked"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chan() -> MemChannelModel {
        MemChannelModel::new(ChannelParams {
            peak_bytes_per_cycle: 16,
            fixed_latency: 100,
            queue_depth: 8,
        })
    }

    #[test]
    fn isolated_request_latency_is_fixed() {
        let mut c = chan();
        assert!(c.submit(7, 64, 10));
        for t in 10..110 {
            assert!(c.tick(t).is_empty(), "early completion at {t}");
        }
        let done = c.tick(110);
        assert_eq!(done.len(), 1);
        assert_eq!(done[0].done - done[0].submitted, 100);
    }

    #[test]
    fn saturated_stream_hits_peak() {
        let mut c = chan();
        let mut next = 0u64;
        let mut delivered = 0u64;
        let cycles = 20_000u64;
        for t in 0..cycles {
            while c.submit(next, 64, t) {
                next += 1;
            }
            delivered += c.tick(t).iter().map(|d| d.bytes).sum::<u64>();
        }
        // The first completions appear after the fixed latency.
        let rate = delivered as f64 / (cycles - 100) as f64;
        assert!((rate - 16.0).abs() / 16.0 < 0.01, "rate {rate}");
        assert!(c.stats().peak_window_bytes <= 16 * 1000);
    }

    #[test]
    fn queue_is_bounded() {
        let mut c = chan();
        for i in 0..8 {
            assert!(c.submit(i, 64, 0));
        }
        assert!(!c.submit(9, 64, 0));
        assert_eq!(c.outstanding(), 8);
    }
}

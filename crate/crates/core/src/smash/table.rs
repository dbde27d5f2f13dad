// SPDX-License-Identifier: Apache-2.0

use std::marker::PhantomData;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use crate::Scalar;

pub const EMPTY_TAG: u64 = u64::MAX;

/// Host-kernel tag: row in the high word, column in the low word.
pub fn pack_tag(i: usize, j: usize) -> u64 {
    ((i as u64) << 32) | j as u64
}

pub fn unpack_tag(tag: u64) -> (usize, usize) {
    ((tag >> 32) as usize, (tag & 0xFFFF_FFFF) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// Stored at the home slot.
    Inserted,
    /// Added into an existing cell with the same tag.
    Updated,
    /// Stored after `k` quadratic probe steps.
    Probed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableFull;

/// Lock-free accumulation table shared by the workers of one window.
///
/// Slots are claimed by compare-and-swap on the tag; values accumulate by a
/// compare-and-swap loop over their bit pattern. In direct mode the slot is
/// the column index and no probing happens.
#[derive(Debug)]
pub struct ScratchpadHashTable<T> {
    capacity: usize,
    probe_limit: usize,
    direct: bool,
    tags: Vec<AtomicU64>,
    vals: Vec<AtomicU64>,
    hits: Vec<AtomicU32>,
    _marker: PhantomData<T>,
}

impl<T: Scalar> ScratchpadHashTable<T> {
    /// Prime-modulo table with quadratic probing; probe limit = capacity.
    pub fn hashed(capacity: usize) -> Self {
        Self::build(capacity, false)
    }

    /// Column-indexed table for dense rows.
    pub fn direct(n_cols: usize) -> Self {
        Self::build(n_cols, true)
    }

    fn build(capacity: usize, direct: bool) -> Self {
        let zero = T::zero().to_bits64();
        Self {
            capacity,
            probe_limit: capacity,
            direct,
            tags: (0..capacity).map(|_| AtomicU64::new(EMPTY_TAG)).collect(),
            vals: (0..capacity).map(|_| AtomicU64::new(zero)).collect(),
            hits: (0..capacity).map(|_| AtomicU32::new(0)).collect(),
            _marker: PhantomData,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn probe_limit(&self) -> usize {
        self.probe_limit
    }

    pub fn is_direct(&self) -> bool {
        self.direct
    }

    /// Adds `value` under `tag`, claiming a slot if the tag is new. Probes
    /// `h + i^2 mod capacity` for `i = 1..=probe_limit`.
    pub fn insert(&self, tag: u64, value: T) -> Result<ProbeOutcome, TableFull> {
        if self.capacity == 0 {
            return Err(TableFull);
        }
        if self.direct {
            let slot = (tag & 0xFFFF_FFFF) as usize;
            if slot >= self.capacity {
                return Err(TableFull);
            }
            return Ok(match self.claim(slot, tag) {
                Some(true) => {
                    self.add(slot, value);
                    ProbeOutcome::Inserted
                }
                _ => {
                    self.add(slot, value);
                    ProbeOutcome::Updated
                }
            });
        }
        let cap = self.capacity as u64;
        let home = tag % cap;
        for i in 0..=self.probe_limit as u64 {
            let slot = ((home as u128 + (i as u128) * (i as u128)) % cap as u128) as usize;
            match self.claim(slot, tag) {
                Some(fresh) => {
                    self.add(slot, value);
                    return Ok(match (fresh, i) {
                        (false, _) => ProbeOutcome::Updated,
                        (true, 0) => ProbeOutcome::Inserted,
                        (true, k) => ProbeOutcome::Probed(k),
                    });
                }
                None => continue,
            }
        }
        Err(TableFull)
    }

    /// `Some(true)` if this call claimed the empty slot, `Some(false)` if the
    /// slot already holds `tag`, `None` if it holds another tag.
    fn claim(&self, slot: usize, tag: u64) -> Option<bool> {
        match self.tags[slot].compare_exchange(EMPTY_TAG, tag, Ordering::AcqRel, Ordering::Acquire) {
            Ok(_) => Some(true),
            Err(cur) if cur == tag => Some(false),
            Err(_) => None,
        }
    }

    fn add(&self, slot: usize, value: T) {
        self.hits[slot].fetch_add(1, Ordering::Relaxed);
        let cell = &self.vals[slot];
        let mut cur = cell.load(Ordering::Relaxed);
        loop {
            let next = (T::from_bits64(cur) + value).to_bits64();
            match cell.compare_exchange_weak(cur, next, Ordering::AcqRel, Ordering::Relaxed) {
                Ok(_) => return,
                Err(seen) => cur = seen,
            }
        }
    }

    pub fn occupancy(&self) -> usize {
        self.tags.iter().filter(|t| t.load(Ordering::Acquire) != EMPTY_TAG).count()
    }

    /// Live `(tag, value, contributions)` triples sorted by tag.
    pub fn drain_sorted(&self) -> Vec<(u64, T, u32)> {
        let mut out: Vec<(u64, T, u32)> = (0..self.capacity)
            .filter_map(|s| {
                let tag = self.tags[s].load(Ordering::Acquire);
                (tag != EMPTY_TAG).then(|| {
                    (
                        tag,
                        T::from_bits64(self.vals[s].load(Ordering::Acquire)),
                        self.hits[s].load(Ordering::Acquire),
                    )
                })
            })
            .collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn home_slot_insert() {
        let t = ScratchpadHashTable::<f64>::hashed(7);
        assert_eq!(t.insert(5, 1.0), Ok(ProbeOutcome::Inserted));
        assert_eq!(t.drain_sorted(), vec![(5, 1.0, 1)]);
    }

    #[test]
    fn same_tag_updates() {
        let t = ScratchpadHashTable::<f64>::hashed(7);
        t.insert(5, 2.0).unwrap();
        assert_eq!(t.insert(5, 3.0), Ok(ProbeOutcome::Updated));
        assert_eq!(t.drain_sorted(), vec![(5, 5.0, 2)]);
    }

    #[test]
    fn collision_probes_one_step() {
        let t = ScratchpadHashTable::<f64>::hashed(7);
        t.insert(3, 1.0).unwrap();
        assert_eq!(t.insert(10, 1.0), Ok(ProbeOutcome::Probed(1)));
        assert_eq!(t.tags[4].load(Ordering::Relaxed), 10);
    }

    #[test]
    fn overflow_is_reported() {
        let t = ScratchpadHashTable::<i64>::hashed(3);
        for tag in 0..3 {
            t.insert(tag, 1).unwrap();
        }
        assert_eq!(t.insert(99, 1), Err(TableFull));
        assert_eq!(t.occupancy(), 3);
    }

    #[test]
    fn direct_mode_uses_column() {
        let t = ScratchpadHashTable::<i64>::direct(8);
        assert_eq!(t.insert(pack_tag(4, 6), 2), Ok(ProbeOutcome::Inserted));
        assert_eq!(t.insert(pack_tag(4, 6), 2), Ok(ProbeOutcome::Updated));
        assert_eq!(t.tags[6].load(Ordering::Relaxed), pack_tag(4, 6));
    }

    #[test]
    fn concurrent_updates_are_atomic() {
        let t = ScratchpadHashTable::<i64>::hashed(13);
        std::thread::scope(|s| {
            for w in 0..8 {
                let t = &t;
                s.spawn(move || {
                    for n in 0..1000 {
                        t.insert((n % 5) as u64, w + 1).unwrap();
                    }
                });
            }
        });
        let d = t.drain_sorted();
        assert_eq!(d.len(), 5);
        assert_eq!(d.iter().map(|e| e.1).sum::<i64>(), 1000 * 36);
        assert_eq!(d.iter().map(|e| e.2).sum::<u32>(), 8000);
    }
}

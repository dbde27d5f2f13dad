// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::IsaError;

/// A named, contiguous run of 8-byte words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub base: u64,
    pub words: Vec<u64>,
}

/// Manifest entry describing where a region lives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionInfo {
    pub name: String,
    pub base: u64,
    pub bytes: u64,
}

/// Simulated flat memory made of non-overlapping regions, each aligned to a
/// 4 KiB page.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryImage {
    regions: Vec<Region>,
}

const PAGE: u64 = 4096;

impl MemoryImage {
    pub const BASE: u64 = 0x1000_0000;

    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a region after the last one and returns its base address.
    pub fn push(&mut self, name: &str, words: Vec<u64>) -> u64 {
        let base = self.regions.last().map_or(Self::BASE, |r| {
            (r.base + 8 * r.words.len() as u64).div_ceil(PAGE) * PAGE + PAGE
        });
        self.regions.push(Region {
            name: name.to_string(),
            base,
            words,
        });
        base
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region(&self, name: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.name == name)
    }

    pub fn read_word(&self, addr: u64) -> Result<u64, IsaError> {
        if !addr.is_multiple_of(8) {
            return Err(IsaError::MemoryFault { addr });
        }
        let idx = self.regions.partition_point(|r| r.base <= addr);
        let r = idx
            .checked_sub(1)
            .map(|i| &self.regions[i])
            .ok_or(IsaError::MemoryFault { addr })?;
        r.words
            .get(((addr - r.base) / 8) as usize)
            .copied()
            .ok_or(IsaError::MemoryFault { addr })
    }

    pub fn read_words(&self, addr: u64, n: usize) -> Result<Vec<u64>, IsaError> {
        (0..n as u64).map(|i| self.read_word(addr + 8 * i)).collect()
    }

    pub fn write_word(&mut self, addr: u64, value: u64) -> Result<(), IsaError> {
        if !addr.is_multiple_of(8) {
            return Err(IsaError::MemoryFault { addr });
        }
        let idx = self.regions.partition_point(|r| r.base <= addr);
        let r = idx
            .checked_sub(1)
            .map(|i| &mut self.regions[i])
            .ok_or(IsaError::MemoryFault { addr })?;
        let slot = r
            .words
            .get_mut(((addr - r.base) / 8) as usize)
            .ok_or(IsaError::MemoryFault { addr })?;
        *slot = value;
        Ok(())
    }

    pub fn manifest(&self) -> Vec<RegionInfo> {
        self.regions
            .iter()
            .map(|r| RegionInfo {
                name: r.name.clone(),
                base: r.base,
                bytes: 8 * r.words.len() as u64,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions_page_aligned_and_disjoint() {
        let mut m = MemoryImage::new();
        let a = m.push("a", vec![1, 2, 3]);
        let b = m.push("b", vec![9; 1000]);
        assert_eq!(a, MemoryImage::BASE);
        assert_eq!(b % PAGE, 0);
        assert!(b > a + 24);
        assert_eq!(m.read_word(a + 16).unwrap(), 3);
        assert_eq!(m.read_word(b + 8 * 999).unwrap(), 9);
        assert!(m.read_word(a + 24).is_err());
        assert!(m.read_word(a + 4).is_err());
        assert!(m.read_word(0).is_err());
        let man = m.manifest();
        assert_eq!(man[1].bytes, 8000);
    }
}

// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MappingError;
use crate::isa::TagLayout;

/// Multiplier of the modular strategy (Knuth's 32-bit golden-ratio prime).
pub const MODULAR_PRIME: u64 = 2_654_435_761;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Output rows dealt to targets round-robin in order of first arrival.
    Ring,
    /// `(tag * P) mod N`.
    Modular,
    /// `((tag << k) >> k) * gamma mod N`, gamma reseeded.
    DrhmLow,
    /// `((tag >> k) << k) * gamma mod N`, gamma reseeded.
    DrhmHigh,
    /// Uniform draw per distinct tag, remembered in a table.
    RandomTable,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Self::Ring,
        Self::Modular,
        Self::DrhmLow,
        Self::DrhmHigh,
        Self::RandomTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Ring => "ring",
            Self::Modular => "modular",
            Self::DrhmLow => "drhm-low",
            Self::DrhmHigh => "drhm-high",
            Self::RandomTable => "random",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| MappingError::Config(format!("unknown mapper '{s}'")))
    }
}

/// When gamma is redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reseed {
    /// On the first arrival of every new output row.
    PerRow,
    /// After this many mapped items.
    Every(u64),
    Never,
}

impl FromStr for Reseed {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "row" => Ok(Self::PerRow),
            "never" | "inf" => Ok(Self::Never),
            n => n
                .parse::<u64>()
                .ok()
                .filter(|&n| n > 0)
                .map(Self::Every)
                .ok_or_else(|| MappingError::Config(format!("bad reseed interval '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapperConfig {
    pub strategy: Strategy,
    pub n_targets: usize,
    pub k: u32,
    pub reseed: Reseed,
    pub rng_seed: u64,
}

impl MapperConfig {
    pub fn new(strategy: Strategy, n_targets: usize) -> Self {
        Self {
            strategy,
            n_targets,
            k: 16,
            reseed: Reseed::PerRow,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), MappingError> {
        if self.n_targets == 0 {
            return Err(MappingError::Config("at least one target is required".into()));
        }
        if self.k >= 32 {
            return Err(MappingError::Config(format!("shift k={} must be below 32", self.k)));
        }
        Ok(())
    }
}

pub fn modular(tag: u32, multiplier: u64, n: usize) -> usize {
    ((tag as u64 * multiplier) % n as u64) as usize
}

/// Keeps the low `32 - k` bits of the tag.
pub fn drhm_low(tag: u32, k: u32, gamma: u32, n: usize) -> usize {
    let masked = (tag << k) >> k;
    ((masked as u64 * gamma as u64) % n as u64) as usize
}

/// Clears the low `k` bits of the tag.
pub fn drhm_high(tag: u32, k: u32, gamma: u32, n: usize) -> usize {
    let masked = (tag >> k) << k;
    ((masked as u64 * gamma as u64) % n as u64) as usize
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based gamma: a pure function of `(seed, epoch)`, always odd.
pub fn gamma_for_epoch(seed: u64, epoch: u64) -> u32 {
    (splitmix64(splitmix64(seed) ^ epoch) as u32) | 1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaState {
    pub gamma: u32,
    pub epoch: u64,
    /// `(epoch, gamma)` for every epoch so far, starting with epoch 0.
    pub seed_log: Vec<(u64, u32)>,
}

impl GammaState {
    pub fn new(seed: u64) -> Self {
        let gamma = gamma_for_epoch(seed, 0);
        Self {
            gamma,
            epoch: 0,
            seed_log: vec![(0, gamma)],
        }
    }

    pub fn reseed(&mut self, seed: u64) {
        self.epoch += 1;
        self.gamma = gamma_for_epoch(seed, self.epoch);
        self.seed_log.push((self.epoch, self.gamma));
    }
}

/// Stateful mapper. Every tag of an output row is bound to the gamma (or
/// ring slot) current when that row first arrives, so all partial products
/// of one output element meet at the same target.
#[derive(Debug, Clone)]
pub struct Mapper {
    cfg: MapperConfig,
    layout: TagLayout,
    gamma: GammaState,
    row_gamma: HashMap<u32, u32>,
    row_slot: HashMap<u32, usize>,
    table: HashMap<u32, usize>,
    rng: ChaCha8Rng,
    items: u64,
    items_in_epoch: u64,
}

impl Mapper {
    pub fn new(cfg: MapperConfig, layout: TagLayout) -> Result<Self, MappingError> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            layout,
            gamma: GammaState::new(cfg.rng_seed),
            row_gamma: HashMap::new(),
            row_slot: HashMap::new(),
            table: HashMap::new(),
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            items: 0,
            items_in_epoch: 0,
        })
    }

    pub fn config(&self) -> &MapperConfig {
        &self.cfg
    }

    pub fn gamma_state(&self) -> &GammaState {
        &self.gamma
    }

    pub fn items_mapped(&self) -> u64 {
        self.items
    }

    /// Entries held by the random strategy's lookup table.
    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    fn row_gamma(&mut self, row: u32) -> u32 {
        if let Some(&g) = self.row_gamma.get(&row) {
            return g;
        }
        let reseed = match self.cfg.reseed {
            Reseed::PerRow => !self.row_gamma.is_empty(),
            Reseed::Every(n) => self.items_in_epoch >= n,
            Reseed::Never => false,
        };
        if reseed {
            self.gamma.reseed(self.cfg.rng_seed);
            self.items_in_epoch = 0;
        }
        self.row_gamma.insert(row, self.gamma.gamma);
        self.gamma.gamma
    }

    pub fn map_target(&mut self, tag: u32) -> usize {
        let n = self.cfg.n_targets;
        let row = self.layout.decode(tag).0 as u32;
        let t = match self.cfg.strategy {
            Strategy::Ring => {
                let next = self.row_slot.len();
                *self.row_slot.entry(row).or_insert(next % n)
            }
            Strategy::Modular => modular(tag, MODULAR_PRIME, n),
            Strategy::DrhmLow => {
                let g = self.row_gamma(row);
                drhm_low(tag, self.cfg.k, g, n)
            }
            Strategy::DrhmHigh => {
                let g = self.row_gamma(row);
                drhm_high(tag, self.cfg.k, g, n)
            }
            Strategy::RandomTable => {
                let rng = &mut self.rng;
                *self.table.entry(tag).or_insert_with(|| rng.gen_range(0..n))
            }
        };
        self.items += 1;
        self.items_in_epoch += 1;
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, proptest};

    const L: TagLayout = TagLayout::DEFAULT;

    #[test]
    fn worked_drhm_low() {
        assert_eq!(drhm_low(0xABCD_1234, 16, 7, 128), 108);
    }

    #[test]
    fn ring_deals_rows_in_arrival_order() {
        let mut m = Mapper::new(MapperConfig::new(Strategy::Ring, 4), L).unwrap();
        let tags: Vec<u32> = (0..5).map(|r| L.encode(r * 3, 1).unwrap()).collect();
        let got: Vec<usize> = tags.iter().map(|&t| m.map_target(t)).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 0]);
        assert_eq!(m.map_target(tags[2]), 2);
    }

    #[test]
    fn random_table_is_consistent() {
        let mut m = Mapper::new(MapperConfig::new(Strategy::RandomTable, 64), L).unwrap();
        let t = 0x0042_0007;
        let first = m.map_target(t);
        for _ in 0..10 {
            m.map_target(first as u32 + 1000);
        }
        assert_eq!(m.map_target(t), first);
        assert_eq!(m.table_len(), 2);
    }

    #[test]
    fn same_seed_same_log() {
        let run = || {
            let mut cfg = MapperConfig::new(Strategy::DrhmLow, 32);
            cfg.rng_seed = 99;
            let mut m = Mapper::new(cfg, L).unwrap();
            for r in 0..50 {
                m.map_target(L.encode(r, r).unwrap());
            }
            m.gamma_state().seed_log.clone()
        };
        let log = run();
        assert_eq!(log.len(), 50);
        assert_eq!(log, run());
    }

    #[test]
    fn thousand_reseeds_all_odd() {
        let mut g = GammaState::new(5);
        for _ in 0..1000 {
            g.reseed(5);
        }
        assert_eq!(g.seed_log.len(), 1001);
        assert!(g.seed_log.iter().all(|&(_, g)| g % 2 == 1));
        assert!(g.seed_log.iter().enumerate().all(|(i, &(e, _))| e == i as u64));
    }

    #[test]
    fn never_reseeding_is_modular_with_gamma0() {
        let mut cfg = MapperConfig::new(Strategy::DrhmLow, 37);
        cfg.k = 0;
        cfg.reseed = Reseed::Never;
        cfg.rng_seed = 3;
        let g0 = gamma_for_epoch(3, 0) as u64;
        let mut m = Mapper::new(cfg, L).unwrap();
        for t in [0u32, 1, 0xFFFF_FFFF, 0x1234_5678, 77] {
            assert_eq!(m.map_target(t), modular(t, g0, 37));
        }
        assert_eq!(drhm_low(0xDEAD_BEEF, 0, MODULAR_PRIME as u32, 32), modular(0xDEAD_BEEF, MODULAR_PRIME, 32));
    }

    #[test]
    fn fixed_interval_reseeds_new_rows_only() {
        let mut cfg = MapperConfig::new(Strategy::DrhmHigh, 16);
        cfg.reseed = Reseed::Every(3);
        let mut m = Mapper::new(cfg, L).unwrap();
        let t0 = L.encode(0, 5).unwrap();
        let first = m.map_target(t0);
        for j in 0..10 {
            m.map_target(L.encode(0, j).unwrap());
        }
        assert_eq!(m.gamma_state().epoch, 0);
        m.map_target(L.encode(1, 0).unwrap());
        assert_eq!(m.gamma_state().epoch, 1);
        assert_eq!(m.map_target(t0), first);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(Mapper::new(MapperConfig::new(Strategy::Ring, 0), L).is_err());
        let mut c = MapperConfig::new(Strategy::DrhmLow, 4);
        c.k = 32;
        assert!(Mapper::new(c, L).is_err());
        assert_eq!("row".parse::<Reseed>().unwrap(), Reseed::PerRow);
        assert_eq!("500".parse::<Reseed>().unwrap(), Reseed::Every(500));
        assert!("0".parse::<Reseed>().is_err());
    }

    proptest! {
        #[test]
        fn always_in_range(strategy in 0usize..5, n in 1usize..200, tags in prop::collection::vec(any::<u32>(), 1..100), k in 0u32..32) {
            let mut cfg = MapperConfig::new(Strategy::ALL[strategy], n);
            cfg.k = k;
            let mut m = Mapper::new(cfg, L).unwrap();
            let mut seen = HashMap::new();
            for &t in &tags {
                let x = m.map_target(t);
                prop_assert!(x < n);
                prop_assert_eq!(*seen.entry(t).or_insert(x), x);
            }
        }
    }
}

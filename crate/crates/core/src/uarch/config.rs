// SPDX-License-Identifier: Apache-2.0

//! Chip configurations: the three named tile sizes, the GNN variant and
//! user-supplied JSON files.

use serde::{Deserialize, Serialize};

use super::UarchError;

/// Per-stage latencies in cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Latencies {
    pub decode: u64,
    pub reg_alloc: u64,
    pub addr_gen: u64,
    pub multiply: u64,
    /// Cycles per comparator group during a tag compare.
    pub compare: u64,
    pub accumulate: u64,
    pub hop: u64,
    /// Cycles between entering a port queue and leaving it.
    pub port: u64,
}

impl Default for Latencies {
    fn default() -> Self {
        Self {
            decode: 1,
            reg_alloc: 1,
            addr_gen: 1,
            multiply: 2,
            compare: 1,
            accumulate: 1,
            hop: 1,
            port: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreConfig {
    pub n_pipelines: usize,
    pub regs_per_pipeline: usize,
    pub reg_bits_per_pipeline: usize,
    pub n_multipliers: usize,
    pub n_addr_generators: usize,
    pub n_ports: usize,
    /// Dispatched MMH4s waiting for a pipeline.
    pub instr_buffer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemConfig {
    pub hash_engines: usize,
    pub tag_comparators_per_engine: usize,
    pub hashlines: usize,
    pub line_bytes: usize,
    pub n_ports: usize,
    /// HACCs waiting for a hash engine.
    pub instr_buffer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub peak_bytes_per_cycle: u64,
    pub fixed_latency: u64,
    pub queue_depth: usize,
    pub granule_bytes: u64,
    /// Pending transactions a new read may merge into.
    pub reorder_window: usize,
    pub write_combine_entries: usize,
    /// Cycles a partially filled write-combine entry may wait.
    pub write_combine_timeout: u64,
}

impl Default for ChannelConfig {
    /// 16 B/cycle per channel, 128 B/cycle over eight channels.
    fn default() -> Self {
        Self {
            peak_bytes_per_cycle: 16,
            fixed_latency: 100,
            queue_depth: 64,
            granule_bytes: 64,
            reorder_window: 16,
            write_combine_entries: 16,
            write_combine_timeout: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WritebackPath {
    Torus,
    Dedicated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChipConfig {
    pub name: String,
    pub n_tiles: usize,
    /// Tiles are laid out as a `tile_rows x tile_cols` block grid.
    pub tile_rows: usize,
    pub tile_cols: usize,
    pub cores_per_tile: usize,
    pub mems_per_tile: usize,
    pub routers_per_tile: usize,
    /// Torus dimensions in routers.
    pub grid_width: usize,
    pub grid_height: usize,
    pub frequency_ghz: f64,
    pub port_buffer_depth: usize,
    /// MMH4s the dispatcher may hand out per cycle.
    pub dispatch_width: usize,
    pub writeback_path: WritebackPath,
    /// Compare every line of a probe sequence in one cycle.
    pub full_parallel_compare: bool,
    pub core: CoreConfig,
    pub mem: MemConfig,
    pub channel: ChannelConfig,
    pub latencies: Latencies,
}

/// Component totals of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChipTotals {
    pub tiles: usize,
    pub cores: usize,
    pub mems: usize,
    pub routers: usize,
    pub memory_controllers: usize,
    pub pipelines: usize,
    pub multipliers: usize,
    pub hash_engines: usize,
    pub tag_comparators: usize,
    pub hashlines: usize,
    pub hashpad_bytes: usize,
    pub register_bits: usize,
}

pub const CONFIG_NAMES: [&str; 4] = ["tile4", "tile16", "tile64", "tile16-gnn"];

fn named(
    name: &str,
    per_tile: usize,
    grid: (usize, usize),
    core: (usize, usize, usize),
    mem: (usize, usize, usize),
) -> ChipConfig {
    let (pipes, regs, agens) = core;
    let (engines, comparators, lines) = mem;
    ChipConfig {
        name: name.into(),
        n_tiles: 8,
        tile_rows: 2,
        tile_cols: 4,
        cores_per_tile: per_tile,
        mems_per_tile: per_tile,
        routers_per_tile: 2 * per_tile,
        grid_width: grid.0,
        grid_height: grid.1,
        frequency_ghz: 1.0,
        port_buffer_depth: 4,
        dispatch_width: 8,
        writeback_path: WritebackPath::Torus,
        full_parallel_compare: false,
        core: CoreConfig {
            n_pipelines: pipes,
            regs_per_pipeline: regs,
            reg_bits_per_pipeline: regs * 128,
            n_multipliers: pipes,
            n_addr_generators: agens,
            n_ports: 4,
            instr_buffer: 4,
        },
        mem: MemConfig {
            hash_engines: engines,
            tag_comparators_per_engine: comparators,
            hashlines: lines,
            line_bytes: 12,
            n_ports: 4,
            instr_buffer: 16,
        },
        channel: ChannelConfig::default(),
        latencies: Latencies::default(),
    }
}

impl ChipConfig {
    pub fn tile4() -> Self {
        named("tile4", 4, (8, 8), (2, 4, 1), (2, 2, 4096))
    }

    pub fn tile16() -> Self {
        named("tile16", 16, (16, 16), (4, 8, 2), (4, 4, 2048))
    }

    pub fn tile64() -> Self {
        named("tile64", 64, (32, 32), (8, 16, 2), (8, 8, 2048))
    }

    /// GNN comparison variant: eight tiles of a 16x16 router grid each,
    /// quad-pipeline cores, one comparator per engine and shallow port
    /// buffers, HashPad lines as in `tile16`.
    pub fn tile16_gnn() -> Self {
        let mut c = named("tile16-gnn", 128, (64, 32), (4, 8, 2), (4, 1, 2048));
        c.port_buffer_depth = 2;
        c
    }

    pub fn by_name(name: &str) -> Result<Self, UarchError> {
        match name {
            "tile4" => Ok(Self::tile4()),
            "tile16" => Ok(Self::tile16()),
            "tile64" => Ok(Self::tile64()),
            "tile16-gnn" => Ok(Self::tile16_gnn()),
            other => Err(UarchError::Config(format!(
                "unknown config '{other}', expected one of {}",
                CONFIG_NAMES.join(", ")
            ))),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, UarchError> {
        let c: Self = serde_json::from_str(text).map_err(|e| UarchError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn tile_width(&self) -> usize {
        self.grid_width / self.tile_cols.max(1)
    }

    pub fn tile_height(&self) -> usize {
        self.grid_height / self.tile_rows.max(1)
    }

    pub fn validate(&self) -> Result<(), UarchError> {
        let err = |m: String| Err(UarchError::Config(m));
        if self.cores_per_tile == 0 || self.mems_per_tile == 0 {
            return err("a tile needs at least one core and one memory".into());
        }
        if self.n_tiles == 0 || self.tile_rows * self.tile_cols != self.n_tiles {
            return err(format!(
                "{} tiles do not fill a {}x{} tile grid",
                self.n_tiles, self.tile_rows, self.tile_cols
            ));
        }
        if !self.grid_width.is_multiple_of(self.tile_cols) || !self.grid_height.is_multiple_of(self.tile_rows) {
            return err("grid dimensions must divide evenly into tiles".into());
        }
        let block = self.tile_width() * self.tile_height();
        if block != self.routers_per_tile {
            return err(format!(
                "tile block holds {block} routers, config says {}",
                self.routers_per_tile
            ));
        }
        if self.cores_per_tile + self.mems_per_tile != self.routers_per_tile {
            return err("every router hosts exactly one core or one memory".into());
        }
        if !block.is_multiple_of(2) || self.cores_per_tile != self.mems_per_tile {
            return err("checkerboard placement needs equal cores and memories per tile".into());
        }
        let c = &self.core;
        if c.n_pipelines == 0 || c.regs_per_pipeline == 0 || c.n_addr_generators == 0 {
            return err("core needs pipelines, registers and address generators".into());
        }
        if c.n_ports == 0 || c.instr_buffer == 0 || c.n_multipliers < c.n_pipelines {
            return err("core needs ports, a buffer and one multiplier per pipeline".into());
        }
        if c.n_ports > 64 {
            return err("at most 64 core ports".into());
        }
        if !c.reg_bits_per_pipeline.is_multiple_of(c.regs_per_pipeline) {
            return err("register bits must split evenly into registers".into());
        }
        let m = &self.mem;
        if m.hash_engines == 0 || m.tag_comparators_per_engine == 0 || m.n_ports == 0 {
            return err("memory needs engines, comparators and ports".into());
        }
        if m.hashlines < 2 * m.hash_engines || m.instr_buffer == 0 {
            return err("every hash engine needs at least two lines".into());
        }
        if self.port_buffer_depth < 2 {
            return err("port buffers need two slots for bubble flow control".into());
        }
        if self.dispatch_width == 0 {
            return err("dispatch width must be positive".into());
        }
        let ch = &self.channel;
        if ch.peak_bytes_per_cycle == 0 || ch.granule_bytes == 0 || ch.queue_depth == 0 {
            return err("channel needs bandwidth, granule and queue".into());
        }
        if ch.reorder_window == 0 || ch.write_combine_entries == 0 {
            return err("controller needs a reorder window and write-combine entries".into());
        }
        if ch.fixed_latency < ch.granule_bytes.div_ceil(ch.peak_bytes_per_cycle) {
            return err("fixed latency shorter than one granule transfer".into());
        }
        Ok(())
    }

    pub fn totals(&self) -> ChipTotals {
        let cores = self.n_tiles * self.cores_per_tile;
        let mems = self.n_tiles * self.mems_per_tile;
        let engines = mems * self.mem.hash_engines;
        let pipelines = cores * self.core.n_pipelines;
        ChipTotals {
            tiles: self.n_tiles,
            cores,
            mems,
            routers: self.n_tiles * self.routers_per_tile,
            memory_controllers: self.n_tiles,
            pipelines,
            multipliers: cores * self.core.n_multipliers,
            hash_engines: engines,
            tag_comparators: engines * self.mem.tag_comparators_per_engine,
            hashlines: mems * self.mem.hashlines,
            hashpad_bytes: mems * self.mem.hashlines * self.mem.line_bytes,
            register_bits: pipelines * self.core.reg_bits_per_pipeline,
        }
    }

    /// Largest hop count between two routers.
    pub fn diameter(&self) -> u64 {
        (self.grid_width / 2 + self.grid_height / 2) as u64
    }

    /// Longest single-stage latency, counting a memory channel round trip.
    pub fn max_stage_latency(&self) -> u64 {
        let l = &self.latencies;
        let compare = if self.full_parallel_compare {
            l.compare
        } else {
            let region = self.mem.hashlines / self.mem.hash_engines;
            l.compare * region.div_ceil(self.mem.tag_comparators_per_engine) as u64
        };
        [
            l.decode,
            l.reg_alloc,
            l.addr_gen,
            l.multiply,
            compare + l.accumulate,
            l.hop,
            l.port,
            self.channel.fixed_latency,
        ]
        .into_iter()
        .max()
        .unwrap_or(1)
    }

    /// Cycles without any state change after which a run is declared dead.
    pub fn deadlock_threshold(&self) -> u64 {
        10 * (self.diameter() + self.max_stage_latency())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MB: usize = 1 << 20;

    #[test]
    fn named_totals() {
        let t = ChipConfig::tile4().totals();
        assert_eq!((t.cores, t.mems, t.routers, t.pipelines), (32, 32, 64, 64));
        assert_eq!(t.hashpad_bytes * 2, 3 * MB);
        assert_eq!((t.hash_engines, t.tag_comparators), (64, 128));
        let t = ChipConfig::tile16().totals();
        assert_eq!((t.cores, t.mems, t.routers, t.pipelines), (128, 128, 256, 512));
        assert_eq!(t.hashpad_bytes, 3 * MB);
        assert_eq!((t.hash_engines, t.tag_comparators), (512, 2048));
        let t = ChipConfig::tile64().totals();
        assert_eq!((t.cores, t.mems, t.routers, t.pipelines), (512, 512, 1024, 4096));
        assert_eq!(t.hashpad_bytes, 12 * MB);
        assert_eq!((t.hash_engines, t.tag_comparators), (4096, 32768));
        for name in CONFIG_NAMES {
            let c = ChipConfig::by_name(name).unwrap();
            c.validate().unwrap();
            assert_eq!(c.totals().memory_controllers, 8);
        }
    }

    #[test]
    fn register_bits_per_pipeline() {
        let bits: Vec<usize> = ["tile4", "tile16", "tile64"]
            .iter()
            .map(|n| ChipConfig::by_name(n).unwrap().core.reg_bits_per_pipeline)
            .collect();
        assert_eq!(bits, vec![512, 1024, 2048]);
    }

    #[test]
    fn gnn_variant_peak_multipliers() {
        // 4096 multipliers at 1 GHz, two flops per multiply-accumulate.
        let t = ChipConfig::tile16_gnn().totals();
        assert_eq!(t.multipliers * 2, 8192);
        assert_eq!(t.hashlines, 1024 * 2048);
    }

    #[test]
    fn inconsistent_configs_rejected() {
        let mut c = ChipConfig::tile4();
        c.mems_per_tile = 0;
        assert!(c.validate().is_err());
        let mut c = ChipConfig::tile4();
        c.grid_width = 6;
        assert!(c.validate().is_err());
        let mut c = ChipConfig::tile4();
        c.port_buffer_depth = 1;
        assert!(c.validate().is_err());
        assert!(ChipConfig::by_name("tile5").is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = ChipConfig::tile16();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(ChipConfig::from_json(&text).unwrap(), c);
        assert!(ChipConfig::from_json("{}").is_err());
    }
}

// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "neurasim", version, about = "SpGEMM accelerator simulator and sparse-kernel toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate C = A * B on a chip configuration.
    Run(RunArgs),
    /// Check replay, host kernels and the simulator against the oracles.
    Verify(VerifyArgs),
    /// Simulate a grid of configurations, mappers and matrices.
    Sweep(SweepArgs),
    /// Partial-product bloat of C = A * A for a list of graphs.
    Bloat(BloatArgs),
    /// Run the multithreaded host SpGEMM kernel.
    Smash(SmashArgs),
    /// One GCN layer: aggregation on the simulator, combination on the host.
    Gcn(GcnArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Eviction {
    Rolling,
    Barrier,
}

#[derive(Debug, Clone, Args)]
pub struct MatrixSource {
    /// Matrix Market file or SNAP edge list (`.gz` accepted).
    #[arg(long, conflicts_with = "rmat")]
    pub matrix: Option<PathBuf>,
    /// Synthetic R-MAT operand: `scale:ef[:a:b:c:d]`.
    #[arg(long)]
    pub rmat: Option<String>,
    /// Right operand; defaults to the left one.
    #[arg(long)]
    pub matrix_b: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MapperArgs {
    /// ring, modular, drhm-low, drhm-high or random.
    #[arg(long, default_value = "drhm-low")]
    pub mapper: String,
    /// Shift applied before the multiplicative hash.
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    /// `row` or a HACC count between reseeds.
    #[arg(long, default_value = "row")]
    pub reseed: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// tile4, tile16, tile64, tile16-gnn or `file:PATH` to a JSON config.
    #[arg(long, default_value = "tile4")]
    pub config: String,
    #[arg(long, value_enum, default_value_t = Eviction::Rolling)]
    pub eviction: Eviction,
    /// Time-series period in cycles.
    #[arg(long, default_value_t = 100)]
    pub sample_every: u64,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_cycles: u64,
    /// Exact i64 arithmetic instead of f64.
    #[arg(long)]
    pub integer_mode: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[command(flatten)]
    pub mapper: MapperArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the lowered program as a text trace.
    #[arg(long)]
    pub emit_trace: Option<PathBuf>,
    /// Also write C as a Matrix Market file.
    #[arg(long)]
    pub emit_c: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[command(flatten)]
    pub mapper: MapperArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Replay and simulate this trace instead of the lowered program.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Host workers for the SMASH kernels.
    #[arg(long, default_value_t = 4)]
    pub threads: usize,
    /// Relative tolerance for floating-point results.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// Directory for report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "tile4,tile16,tile64")]
    pub configs: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "ring,modular,drhm-low,random")]
    pub mappers: Vec<String>,
    #[arg(long = "matrix")]
    pub matrices: Vec<PathBuf>,
    #[arg(long = "rmat")]
    pub rmats: Vec<String>,
    #[arg(long, default_value_t = 16)]
    pub k: u32,
    #[arg(long, default_value = "row")]
    pub reseed: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Eviction::Rolling)]
    pub eviction: Eviction,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_cycles: u64,
    #[arg(long)]
    pub integer_mode: bool,
    /// Points simulated concurrently; 0 uses every host thread.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BloatArgs {
    /// Graph files, optionally as `NAME=PATH`.
    #[arg(long = "matrix")]
    pub matrices: Vec<String>,
    /// Directory searched for `--datasets` names.
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub datasets: Vec<String>,
    /// Use the matrix as stored instead of the symmetrized pattern.
    #[arg(long)]
    pub as_is: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SmashArgs {
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long, default_value = "v3")]
    pub smash_version: String,
    #[arg(long, default_value_t = 4)]
    pub threads: usize,
    /// Scratchpad hash lines.
    #[arg(long, default_value_t = 1 << 16)]
    pub spad: usize,
    #[arg(long)]
    pub cf: Option<f64>,
    #[arg(long)]
    pub ef: Option<f64>,
    #[arg(long)]
    pub threshold: Option<u64>,
    /// Store A as MAP-CSR with this bank width.
    #[arg(long)]
    pub map_csr: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub integer_mode: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GcnArgs {
    /// Graph file; a random graph is generated when absent.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 2708)]
    pub nodes: usize,
    #[arg(long, default_value_t = 1433)]
    pub features: usize,
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    #[arg(long, default_value_t = 3.9)]
    pub degree: f64,
    #[arg(long, default_value_t = 0.0127)]
    pub feature_density: f64,
    #[command(flatten)]
    pub mapper: MapperArgs,
    #[arg(long, default_value = "tile16-gnn")]
    pub config: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 50_000_000)]
    pub max_cycles: u64,
    #[arg(long)]
    pub out: PathBuf,
}

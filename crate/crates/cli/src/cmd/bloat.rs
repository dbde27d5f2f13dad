// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use neurasim::matio::SparseRows;
use neurasim::oracle::{bloat_report, symbolic_pass};
use serde::Serialize;

use crate::args::BloatArgs;
use crate::error::{CliError, CliResult};
use crate::load::{file_stem, read_matrix, symmetrized_pattern};
use crate::out;

/// Environment variable naming the dataset directory when `--data-dir` is
/// absent. Falls back to `./data`.
pub const DATA_DIR_ENV: &str = "NEURASIM_DATA";

#[derive(Debug, Clone, Serialize)]
pub struct BloatRow {
    pub dataset: String,
    pub path: String,
    pub nodes: usize,
    /// Distinct edges in the file.
    pub edges: usize,
    /// Nonzeros of the squared operand.
    pub nnz: usize,
    pub sparsity_percent: f64,
    pub pp_interim: u64,
    pub nnz_output: u64,
    pub bloat_percent: f64,
}

fn data_dir(args: &BloatArgs) -> PathBuf {
    args.data_dir
        .clone()
        .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data"))
}

/// Looks for `<name>`, `<name>_combined`, each with `.txt` or `.mtx`,
/// optionally gzipped.
fn resolve(dir: &Path, name: &str) -> CliResult<PathBuf> {
    let mut tried = Vec::new();
    for stem in [name.to_string(), format!("{name}_combined")] {
        for ext in ["txt", "txt.gz", "mtx", "mtx.gz"] {
            let p = dir.join(format!("{stem}.{ext}"));
            if p.is_file() {
                return Ok(p);
            }
            tried.push(p.display().to_string());
        }
    }
    Err(CliError::Io(format!(
        "dataset '{name}' not found (tried {}); see scripts/fetch_datasets.sh",
        tried.join(", ")
    )))
}

fn row(dataset: String, path: &Path, as_is: bool) -> CliResult<BloatRow> {
    let input = read_matrix::<f64>(path)?;
    let a = if as_is { input.clone() } else { symmetrized_pattern(&input) };
    let a = a.to_csr();
    let n = a.n_rows().max(a.n_cols());
    let rep = bloat_report(&symbolic_pass(&a, &a)?)?;
    Ok(BloatRow {
        dataset,
        path: path.display().to_string(),
        nodes: n,
        edges: input.entries.len(),
        nnz: a.nnz(),
        sparsity_percent: 100.0 * (1.0 - a.nnz() as f64 / (n as f64 * n as f64).max(1.0)),
        pp_interim: rep.pp_interim,
        nnz_output: rep.nnz_output,
        bloat_percent: rep.bloat_percent,
    })
}

pub fn bloat(args: &BloatArgs) -> CliResult<Vec<BloatRow>> {
    let t0 = Instant::now();
    let mut inputs: Vec<(String, PathBuf)> = args
        .matrices
        .iter()
        .map(|m| match m.split_once('=') {
            Some((name, p)) => (name.to_string(), PathBuf::from(p)),
            None => (file_stem(Path::new(m)), PathBuf::from(m)),
        })
        .collect();
    if !args.datasets.is_empty() {
        let dir = data_dir(args);
        for name in &args.datasets {
            inputs.push((name.clone(), resolve(&dir, name)?));
        }
    }
    if inputs.is_empty() {
        return Err(CliError::Usage("no datasets: pass --matrix or --datasets".into()));
    }
    let rows = inputs
        .into_iter()
        .map(|(name, p)| row(name, &p, args.as_is))
        .collect::<CliResult<Vec<_>>>()?;

    let mut csv = String::from("dataset,nodes,edges,sparsity_percent,pp_interim,nnz_output,bloat_percent\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{:.4},{},{},{:.2}",
            r.dataset, r.nodes, r.edges, r.sparsity_percent, r.pp_interim, r.nnz_output, r.bloat_percent
        )
        .expect("string write");
        println!(
            "{:<20} nodes {:>8} edges {:>9} sparsity {:>8.4}% bloat {:>9.2}% ({} / {})",
            r.dataset, r.nodes, r.edges, r.sparsity_percent, r.bloat_percent, r.pp_interim, r.nnz_output
        );
    }
    out::ensure_dir(&args.out)?;
    out::write(&args.out, "bloat.csv", &csv)?;
    out::write_json(&args.out, "bloat.json", &rows)?;
    out::log_timing(&args.out, "bloat", t0.elapsed(), None)?;
    Ok(rows)
}

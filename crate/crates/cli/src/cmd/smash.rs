// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::time::Instant;

use neurasim::matio::{MapCsrMatrix, SparseRows};
use neurasim::oracle::spgemm_gustavson;
use neurasim::smash::{smash_spgemm, PhaseLedger, SmashConfig, SmashOutput, SmashVersion};
use neurasim::Scalar;
use serde::Serialize;

use crate::args::SmashArgs;
use crate::compare::{first_divergence, Divergence};
use crate::error::{CliError, CliResult};
use crate::load::{load_operands, source_label};
use crate::out;

/// The scheduling-independent part of a run.
#[derive(Debug, Serialize)]
struct SmashStats<'a> {
    matrix: String,
    config: SmashConfig,
    map_csr_bank_width: Option<usize>,
    rows: usize,
    cols: usize,
    nnz_output: usize,
    n_windows: usize,
    window_budget: usize,
    ledger: &'a PhaseLedger,
    tokens: Option<u64>,
    tokens_consumed_exactly_once: Option<u64>,
    atomicity_mismatched_rows: u64,
    peak_table_occupancy: usize,
    pass: bool,
    divergence: Option<Divergence>,
}

pub fn smash(args: &SmashArgs) -> CliResult<()> {
    if args.integer_mode {
        smash_typed::<i64>(args)
    } else {
        smash_typed::<f64>(args)
    }
}

fn smash_typed<T: Scalar>(args: &SmashArgs) -> CliResult<()> {
    let version: SmashVersion = args.smash_version.parse()?;
    let mut cfg = SmashConfig::new(version, args.threads);
    cfg.spad_capacity = args.spad;
    if let Some(cf) = args.cf {
        cfg.cf = cf;
    }
    if let Some(ef) = args.ef {
        cfg.ef = ef;
    }
    cfg.threshold = args.threshold;
    let (a, b) = load_operands::<T>(&args.source, args.seed)?;
    let (a, b) = (a.to_csr(), b.to_csr());

    let t0 = Instant::now();
    let SmashOutput { c, report } = match args.map_csr {
        Some(w) => smash_spgemm(&MapCsrMatrix::from_csr(&a, w, &BTreeSet::new())?, &b, &cfg)?,
        None => smash_spgemm(&a, &b, &cfg)?,
    };
    let wall = t0.elapsed();
    let want = spgemm_gustavson(&a, &b)?;
    let divergence = first_divergence(&want, &c, 1e-9);

    let stats = SmashStats {
        matrix: source_label(&args.source),
        config: cfg,
        map_csr_bank_width: args.map_csr,
        rows: c.n_rows(),
        cols: c.n_cols(),
        nnz_output: c.nnz(),
        n_windows: report.n_windows,
        window_budget: report.window_budget,
        ledger: &report.ledger,
        tokens: report.tokens.as_ref().map(|t| t.tokens),
        tokens_consumed_exactly_once: report.tokens.as_ref().map(|t| t.consumed_exactly_once),
        atomicity_mismatched_rows: report.atomicity_mismatched_rows,
        peak_table_occupancy: report.peak_table_occupancy,
        pass: divergence.is_none(),
        divergence: divergence.clone(),
    };
    out::ensure_dir(&args.out)?;
    out::write_json(&args.out, "stats.json", &stats)?;
    out::write_json(
        &args.out,
        "smash_ledger.json",
        &serde_json::json!({ "tokens": report.tokens, "probes": report.probes }),
    )?;
    out::log_timing(&args.out, "smash", wall, None)?;
    println!(
        "smash-{}: {} windows, {} output nonzeros, {:.3} s",
        version.name(),
        report.n_windows,
        c.nnz(),
        wall.as_secs_f64()
    );
    match divergence {
        Some(d) => Err(CliError::Verify(format!("first divergence at {d}"))),
        None if report.atomicity_mismatched_rows > 0 => Err(CliError::Verify(format!(
            "{} rows lost or duplicated updates",
            report.atomicity_mismatched_rows
        ))),
        None => Ok(()),
    }
}

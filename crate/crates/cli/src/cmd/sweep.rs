// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use neurasim::engine::{lower_for_chip, simulate, SimOptions, SimStats};
use neurasim::matio::CsrMatrix;
use neurasim::uarch::EvictionMode;
use neurasim::Scalar;
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Eviction, MapperArgs, MatrixSource, SweepArgs};
use crate::error::{CliError, CliResult};
use crate::load::{chip_config, load_operands, mapper_config, source_label};
use crate::out;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub config: String,
    pub mapper: String,
    pub matrix: String,
    pub status: String,
    pub cycles: Option<u64>,
    pub haccs: Option<u64>,
    pub mmh4_retired: Option<u64>,
    pub hashpad_peak_occupancy: Option<usize>,
    pub mem_cv: Option<f64>,
    pub cycles_norm_tile4: Option<f64>,
}

impl SweepRow {
    pub fn key(&self) -> String {
        format!("{}__{}__{}", self.config, self.mapper, self.matrix)
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep(args: &SweepArgs) -> CliResult<Vec<SweepRow>> {
    if args.configs.is_empty() || args.mappers.is_empty() || (args.matrices.is_empty() && args.rmats.is_empty()) {
        return Err(CliError::Usage(
            "empty sweep grid: need at least one config, mapper and matrix".into(),
        ));
    }
    if args.integer_mode {
        sweep_typed::<i64>(args)
    } else {
        sweep_typed::<f64>(args)
    }
}

fn sweep_typed<T: Scalar>(args: &SweepArgs) -> CliResult<Vec<SweepRow>> {
    let t0 = Instant::now();
    let sources = args
        .matrices
        .iter()
        .map(|p| MatrixSource { matrix: Some(p.clone()), rmat: None, matrix_b: None })
        .chain(args.rmats.iter().map(|r| MatrixSource { matrix: None, rmat: Some(r.clone()), matrix_b: None }));
    let mut operands: Vec<(String, CsrMatrix<T>, CsrMatrix<T>)> = Vec::new();
    for s in sources {
        let (a, b) = load_operands::<T>(&s, args.seed)?;
        operands.push((source_label(&s), a.to_csr(), b.to_csr()));
    }
    let mut points = Vec::new();
    for c in &args.configs {
        let cfg = chip_config(c)?;
        for m in &args.mappers {
            let mcfg = mapper_config(&MapperArgs {
                mapper: m.clone(),
                k: args.k,
                reseed: args.reseed.clone(),
                seed: args.seed,
            })?;
            for (i, _) in operands.iter().enumerate() {
                points.push((cfg.clone(), m.clone(), mcfg, i));
            }
        }
    }
    let opts = SimOptions {
        mode: match args.eviction {
            Eviction::Rolling => EvictionMode::Rolling,
            Eviction::Barrier => EvictionMode::Barrier,
        },
        sample_every: 0,
        max_cycles: args.max_cycles,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let results: Vec<Result<SimStats, String>> = pool.install(|| {
        points
            .par_iter()
            .map(|(cfg, _, mcfg, i)| {
                let (_, a, b) = &operands[*i];
                let program = lower_for_chip(a, b, cfg).map_err(|e| e.to_string())?;
                simulate(cfg, &program, *mcfg, opts).map(|r| r.stats).map_err(|e| e.to_string())
            })
            .collect()
    });

    let dir = args.out.join("points");
    out::ensure_dir(&dir)?;
    let mut rows = Vec::new();
    for ((cfg, mapper, _, i), res) in points.iter().zip(&results) {
        let mut row = SweepRow {
            config: cfg.name.clone(),
            mapper: mapper.clone(),
            matrix: operands[*i].0.clone(),
            status: "ok".into(),
            cycles: None,
            haccs: None,
            mmh4_retired: None,
            hashpad_peak_occupancy: None,
            mem_cv: None,
            cycles_norm_tile4: None,
        };
        match res {
            Ok(s) => {
                row.cycles = Some(s.cycles);
                row.haccs = Some(s.haccs);
                row.mmh4_retired = Some(s.mmh4_retired);
                row.hashpad_peak_occupancy = Some(s.hashpad_peak_occupancy);
                row.mem_cv = Some(s.loads.mem.cv);
                out::write_json(&dir, &format!("{}.json", row.key()), s)?;
            }
            Err(e) => {
                row.status = format!("error: {e}");
                eprintln!("point {} failed: {e}", row.key());
            }
        }
        rows.push(row);
    }
    let base: HashMap<(String, String), u64> = rows
        .iter()
        .filter(|r| r.config == "tile4")
        .filter_map(|r| Some(((r.mapper.clone(), r.matrix.clone()), r.cycles?)))
        .collect();
    for r in &mut rows {
        if let (Some(c), Some(&b)) = (r.cycles, base.get(&(r.mapper.clone(), r.matrix.clone()))) {
            r.cycles_norm_tile4 = Some(c as f64 / b.max(1) as f64);
        }
    }

    let mut csv = String::from(
        "config,mapper,matrix,status,cycles,haccs,mmh4_retired,hashpad_peak_occupancy,mem_cv,cycles_norm_tile4\n",
    );
    for r in &rows {
        let status = r.status.replace([',', '\n'], ";");
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.config,
            r.mapper,
            r.matrix,
            status,
            opt(r.cycles),
            opt(r.haccs),
            opt(r.mmh4_retired),
            opt(r.hashpad_peak_occupancy),
            opt(r.mem_cv),
            opt(r.cycles_norm_tile4)
        )
        .expect("string write");
    }
    out::write(&args.out, "summary.csv", &csv)?;
    out::log_timing(&args.out, "sweep", t0.elapsed(), None)?;
    let failed = rows.iter().filter(|r| r.status != "ok").count();
    println!("{} points, {failed} failed -> {}", rows.len(), args.out.display());
    Ok(rows)
}

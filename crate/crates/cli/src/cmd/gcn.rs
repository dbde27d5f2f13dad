// SPDX-License-Identifier: Apache-2.0

use std::time::Instant;

use neurasim::engine::{lower_for_chip, simulate, SimOptions};
use neurasim::matio::SparseRows;
use neurasim::oracle::{gcn_layer_workload, random_gcn_instance};
use serde::Serialize;

use crate::args::GcnArgs;
use crate::error::{CliError, CliResult};
use crate::load::{chip_config, mapper_config, read_matrix};
use crate::out;

#[derive(Debug, Clone, Serialize)]
pub struct GcnReport {
    pub graph: String,
    pub nodes: usize,
    pub features: usize,
    pub hidden: usize,
    pub adjacency_nnz: usize,
    pub feature_nnz: usize,
    pub config: String,
    pub cycles: u64,
    pub haccs: u64,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn gcn(args: &GcnArgs) -> CliResult<GcnReport> {
    let t0 = Instant::now();
    let cfg = chip_config(&args.config)?;
    let mapper = mapper_config(&args.mapper)?;
    let seed = args.mapper.seed;
    let (graph, inst) = match &args.matrix {
        Some(p) => {
            let adj = read_matrix::<f64>(p)?.to_csr();
            if adj.n_rows() != adj.n_cols() {
                return Err(CliError::Usage(format!(
                    "adjacency must be square, got {}x{}",
                    adj.n_rows(),
                    adj.n_cols()
                )));
            }
            let mut inst =
                random_gcn_instance(adj.n_rows(), args.features, args.hidden, 0.0, args.feature_density, seed);
            inst.adj = adj;
            (p.display().to_string(), inst)
        }
        None => (
            "random".to_string(),
            random_gcn_instance(args.nodes, args.features, args.hidden, args.degree, args.feature_density, seed),
        ),
    };
    let work = gcn_layer_workload(&inst.adj, &inst.x, &inst.w)?;
    let program = lower_for_chip(&work.agg_a, &work.agg_b, &cfg)?;
    let opts = SimOptions { max_cycles: args.max_cycles, ..SimOptions::default() };
    let r = simulate(&cfg, &program, mapper, opts)?;
    let y = work.combine(&r.c)?;
    let err = work.error(&y);
    let report = GcnReport {
        graph,
        nodes: work.agg_a.n_rows(),
        features: work.agg_b.n_cols(),
        hidden: work.w.cols(),
        adjacency_nnz: work.agg_a.nnz(),
        feature_nnz: work.agg_b.nnz(),
        config: cfg.name.clone(),
        cycles: r.stats.cycles,
        haccs: r.stats.haccs,
        max_rel_error: err,
        tolerance: args.tolerance,
        pass: err <= args.tolerance,
    };
    out::write_sim(&args.out, &r)?;
    out::write_json(&args.out, "gcn.json", &report)?;
    out::log_timing(&args.out, "gcn", t0.elapsed(), Some(r.stats.cycles))?;
    println!(
        "gcn {}x{}x{} on {}: {} cycles, max relative error {err:.3e}",
        report.nodes, report.features, report.hidden, report.config, report.cycles
    );
    if report.pass {
        Ok(report)
    } else {
        Err(CliError::Verify(format!(
            "relative error {err:.3e} exceeds {:.1e}",
            args.tolerance
        )))
    }
}

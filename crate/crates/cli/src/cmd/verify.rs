// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::BufReader;

use neurasim::engine::{lower_for_chip, simulate};
use neurasim::isa::{read_trace, replay};
use neurasim::matio::{CsrMatrix, SparseRows};
use neurasim::oracle::{spgemm_dense_oracle, spgemm_gustavson};
use neurasim::smash::{smash_spgemm, SmashConfig, SmashVersion};
use neurasim::Scalar;
use serde::Serialize;

use super::run::sim_options;
use crate::args::VerifyArgs;
use crate::compare::{first_divergence, Divergence};
use crate::error::{CliError, CliResult};
use crate::load::{chip_config, load_operands, mapper_config, source_label};
use crate::out;

/// Dense reference products up to this many multiply-adds.
const DENSE_LIMIT: u128 = 200_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct PathResult {
    pub path: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub divergence: Option<Divergence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub matrix: String,
    pub rows: usize,
    pub cols: usize,
    pub reference: &'static str,
    pub integer_mode: bool,
    pub paths: Vec<PathResult>,
}

impl VerifyReport {
    pub fn pass(&self) -> bool {
        self.paths.iter().all(|p| p.pass)
    }
}

fn check<T: Scalar, E: std::fmt::Display>(
    path: String,
    want: &CsrMatrix<T>,
    got: Result<CsrMatrix<T>, E>,
    tol: f64,
) -> PathResult {
    match got {
        Ok(c) => {
            let divergence = first_divergence(want, &c, tol);
            PathResult {
                path,
                pass: divergence.is_none(),
                divergence,
                error: None,
            }
        }
        Err(e) => PathResult {
            path,
            pass: false,
            divergence: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn verify(args: &VerifyArgs) -> CliResult<VerifyReport> {
    let report = if args.sim.integer_mode {
        verify_typed::<i64>(args)?
    } else {
        verify_typed::<f64>(args)?
    };
    for p in &report.paths {
        match (&p.divergence, &p.error) {
            (Some(d), _) => println!("FAIL {:<12} first divergence at {d}", p.path),
            (None, Some(e)) => println!("FAIL {:<12} {e}", p.path),
            (None, None) => println!("PASS {}", p.path),
        }
    }
    if let Some(dir) = &args.out {
        out::ensure_dir(dir)?;
        out::write_json(dir, "report.json", &report)?;
    }
    Ok(report)
}

fn verify_typed<T: Scalar>(args: &VerifyArgs) -> CliResult<VerifyReport> {
    let cfg = chip_config(&args.sim.config)?;
    let mapper = mapper_config(&args.mapper)?;
    let (a, b) = load_operands::<T>(&args.source, args.mapper.seed)?;
    let (a, b) = (a.to_csr(), b.to_csr());
    let work = a.n_rows() as u128 * a.n_cols() as u128 * b.n_cols() as u128;
    let (reference, want) = if work <= DENSE_LIMIT {
        let d = spgemm_dense_oracle(&a.to_dense(), &b.to_dense())?;
        ("dense", CsrMatrix::from_dense(&d))
    } else {
        ("gustavson", spgemm_gustavson(&a, &b)?)
    };
    let tol = args.tolerance;

    let mut program = lower_for_chip(&a, &b, &cfg)?;
    if let Some(p) = &args.trace {
        let f = File::open(p).map_err(|e| CliError::io(p, e))?;
        let (layout, instrs) = read_trace::<T, _>(BufReader::new(f))?;
        if layout != program.layout {
            return Err(CliError::Usage(format!(
                "trace layout {}/{} does not match the operands ({}/{})",
                layout.row_bits, layout.col_bits, program.layout.row_bits, program.layout.col_bits
            )));
        }
        program.instrs = instrs;
    }

    let mut paths = vec![check("replay".into(), &want, replay(&program).map(|r| r.c), tol)];
    for v in SmashVersion::ALL {
        let cfg = SmashConfig::new(v, args.threads.max(1));
        let got = smash_spgemm(&a, &b, &cfg).map(|o| o.c);
        paths.push(check(format!("smash-{}", v.name()), &want, got, tol));
    }
    let sim = simulate(&cfg, &program, mapper, sim_options(&args.sim)).map(|r| r.c);
    paths.push(check(format!("sim-{}", cfg.name), &want, sim, tol));

    Ok(VerifyReport {
        matrix: source_label(&args.source),
        rows: want.n_rows(),
        cols: want.n_cols(),
        reference,
        integer_mode: T::EXACT,
        paths,
    })
}

// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion to stderr
//! (uncaptured) and fails if any criterion fails.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use neurasim::engine::{lower_for_chip, simulate, ChannelParams, MemChannelModel, SimOptions, SimResult};
use neurasim::isa::replay;
use neurasim::mapping::{drhm_high, drhm_low, Heatmap, MapperConfig, Strategy};
use neurasim::matio::{
    generate_rmat, randomize_values, write_matrix_market, CooMatrix, CsrMatrix, MapCsrMatrix, RmatParams,
    SparseRows,
};
use neurasim::oracle::{gcn_layer_workload, random_gcn_instance, spgemm_dense_oracle, symbolic_pass};
use neurasim::smash::{smash_spgemm, SmashConfig, SmashVersion};
use neurasim::uarch::{build_chip, ChannelConfig, ChipConfig, EvictionMode};
use neurasim_cli::compare::first_divergence;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;

fn report(n: u32, name: &str, out: &Outcome) {
    let line = match out {
        Ok(d) => format!("PASS criterion {n:>2} [{name}]: {d}"),
        Err(d) => format!("FAIL criterion {n:>2} [{name}]: {d}"),
    };
    let mut e = std::io::stderr();
    let _ = writeln!(e, "{line}");
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_neurasim")
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn cli(args: &[&str], envs: &[(&str, &str)]) -> Result<(), String> {
    let mut c = Command::new(bin());
    c.args(args);
    for (k, v) in envs {
        c.env(k, v);
    }
    let out = c.output().map_err(|e| format!("spawn: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "neurasim {} exited with {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn sha256(path: &Path) -> Result<String, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn rmat(scale: u32, ef: u32, seed: u64) -> CsrMatrix<i64> {
    let mut m: CooMatrix<i64> = generate_rmat(&RmatParams::graph500(scale, ef, seed)).expect("valid params");
    randomize_values(&mut m, -8, 8, seed.wrapping_mul(31) ^ 7);
    m.to_csr()
}

// 1 ------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    const EXPECTED: [(&str, f64); 3] = [("facebook", 2872.80), ("wiki-Vote", 148.09), ("p2p-Gnutella31", 10.21)];
    let dir = std::env::var_os("NEURASIM_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace().join("data"));
    let out = tempfile::tempdir().map_err(|e| e.to_string())?;
    let names = EXPECTED.map(|e| e.0).join(",");
    let t0 = Instant::now();
    cli(
        &[
            "bloat",
            "--data-dir",
            dir.to_str().expect("utf-8 path"),
            "--datasets",
            &names,
            "--out",
            out.path().to_str().expect("utf-8 path"),
        ],
        &[],
    )?;
    let wall = t0.elapsed();
    let text = std::fs::read_to_string(out.path().join("bloat.json")).map_err(|e| e.to_string())?;
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let mut detail = String::new();
    let mut ok = wall <= Duration::from_secs(120);
    for ((name, want), row) in EXPECTED.iter().zip(&rows) {
        let got = row["bloat_percent"].as_f64().unwrap_or(f64::NAN);
        let within = (got - want).abs() <= 0.01 * want;
        ok &= within;
        let _ = write!(
            detail,
            "{name} {got:.2} (want {want:.2}, pp_interim {}, nnz_output {}); ",
            row["pp_interim"], row["nnz_output"]
        );
    }
    let _ = write!(detail, "{:.1} s", wall.as_secs_f64());
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 2, 3, 9 ----------------------------------------------------------------------

#[derive(Default)]
struct OracleSuite {
    instances: usize,
    mismatches: Vec<String>,
    conservation: Vec<String>,
    map_csr: Vec<String>,
    wall: Duration,
}

fn oracle_suite() -> OracleSuite {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let cfg = ChipConfig::tile4();
    let mut s = OracleSuite::default();
    for inst in 0..200u64 {
        let scale = rng.gen_range(3..=8);
        let ef = rng.gen_range(1..=8);
        let a = rmat(scale, ef, 1000 + inst);
        let b = if inst % 2 == 0 { a.clone() } else { rmat(scale, ef, 5000 + inst) };
        let tag = format!("instance {inst} (scale {scale}, ef {ef})");
        let want = CsrMatrix::from_dense(&spgemm_dense_oracle(&a.to_dense(), &b.to_dense()).expect("square"));
        let mut check = |path: &str, got: Result<CsrMatrix<i64>, String>| match got {
            Ok(c) => {
                if let Some(d) = first_divergence(&want, &c, 0.0) {
                    s.mismatches.push(format!("{tag} {path}: {d}"));
                }
            }
            Err(e) => s.mismatches.push(format!("{tag} {path}: {e}")),
        };

        let plan = symbolic_pass(&a, &b).expect("square");
        let program = lower_for_chip(&a, &b, &cfg).expect("lowers");
        check("replay", replay(&program).map(|r| r.c).map_err(|e| e.to_string()));
        let mut smash_out = Vec::new();
        for v in SmashVersion::ALL {
            let out = smash_spgemm(&a, &b, &SmashConfig::new(v, 4)).map(|o| o.c).map_err(|e| e.to_string());
            smash_out.push(out.clone().ok());
            check(v.name(), out);
        }
        let sim = simulate(
            &cfg,
            &program,
            MapperConfig::new(Strategy::DrhmLow, 1),
            SimOptions { sample_every: 0, ..SimOptions::default() },
        );
        let sim: Option<SimResult<i64>> = match sim {
            Ok(r) => Some(r),
            Err(e) => {
                s.conservation.push(format!("{tag}: {e}"));
                None
            }
        };
        check("sim", sim.as_ref().map(|r| r.c.clone()).ok_or_else(|| "no result".to_string()));

        if let Some(r) = &sim {
            let st = &r.stats;
            let evictions = st.rolling_evictions + st.barrier_evictions;
            let mut bad = Vec::new();
            if st.haccs != plan.total_fma {
                bad.push(format!("HACCs {} vs fma {}", st.haccs, plan.total_fma));
            }
            if evictions != plan.total_out_nnz {
                bad.push(format!("evictions {evictions} vs output nnz {}", plan.total_out_nnz));
            }
            if st.hashpad_final_occupancy != 0 {
                bad.push(format!("final occupancy {}", st.hashpad_final_occupancy));
            }
            if r.heatmap.total() != st.haccs {
                bad.push(format!("assignments {} vs HACCs {}", r.heatmap.total(), st.haccs));
            }
            if !bad.is_empty() {
                s.conservation.push(format!("{tag}: {}", bad.join(", ")));
            }
        }

        let bank = 1 + (inst as usize % 4);
        let replicate: BTreeSet<usize> = (0..a.n_rows()).filter(|i| i % 7 == inst as usize % 7).collect();
        match MapCsrMatrix::from_csr(&a, bank, &replicate) {
            Ok(map) => {
                for (v, csr) in SmashVersion::ALL.into_iter().zip(&smash_out) {
                    let got = smash_spgemm(&map, &b, &SmashConfig::new(v, 4)).map(|o| o.c);
                    if got.as_ref().ok() != csr.as_ref() {
                        s.map_csr.push(format!("{tag} {}", v.name()));
                    }
                }
            }
            Err(e) => s.map_csr.push(format!("{tag}: {e}")),
        }
        s.instances += 1;
    }
    s.wall = t0.elapsed();
    s
}

fn summarize(v: &[String]) -> String {
    let head: Vec<&str> = v.iter().take(3).map(String::as_str).collect();
    format!("{} violations, first: {}", v.len(), head.join("; "))
}

fn criterion_2(s: &OracleSuite) -> Outcome {
    let detail = format!(
        "{} instances x 6 paths, {:.1} s",
        s.instances,
        s.wall.as_secs_f64()
    );
    if !s.mismatches.is_empty() {
        Err(format!("{detail}; {}", summarize(&s.mismatches)))
    } else if s.wall > Duration::from_secs(300) {
        Err(format!("{detail}; over the 300 s budget"))
    } else {
        Ok(detail)
    }
}

fn criterion_3(s: &OracleSuite) -> Outcome {
    if s.conservation.is_empty() {
        Ok(format!("{} runs, zero violations", s.instances))
    } else {
        Err(summarize(&s.conservation))
    }
}

// 4 ------------------------------------------------------------------------

fn big_drhm(tag: u32, k: u32, gamma: u32, n: usize, low: bool) -> u64 {
    let t = BigUint::from(tag);
    let two_k = BigUint::from(2u32).pow(k);
    let masked = if low {
        &t % (BigUint::from(2u64).pow(32) / &two_k)
    } else {
        (&t / &two_k) * &two_k
    };
    let r = (masked * BigUint::from(gamma)) % BigUint::from(n);
    u64::try_from(r).expect("below n")
}

fn criterion_4() -> Outcome {
    let worked = drhm_low(0xABCD_1234, 16, 7, 128);
    if worked != 108 || big_drhm(0xABCD_1234, 16, 7, 128, true) != 108 {
        return Err(format!("worked example gave {worked}, want 108"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut bad = Vec::new();
    for _ in 0..1000 {
        let tag: u32 = rng.gen();
        let gamma: u32 = rng.gen();
        let k = rng.gen_range(0..32);
        let n = rng.gen_range(1..=4096usize);
        for (low, got) in [(true, drhm_low(tag, k, gamma, n)), (false, drhm_high(tag, k, gamma, n))] {
            let want = big_drhm(tag, k, gamma, n, low);
            if got as u64 != want {
                bad.push(format!("({tag:#x}, {gamma}, {k}, {n}) low={low}: {got} vs {want}"));
            }
        }
    }
    if bad.is_empty() {
        Ok("1000 tuples x 2 equations exact, worked example 108".into())
    } else {
        Err(summarize(&bad))
    }
}

// 5 ------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let n = 4096usize;
    let mut band = CooMatrix::<f64>::new(n, n).map_err(|e| e.to_string())?;
    for i in 0..n {
        for j in i.saturating_sub(8)..(i + 9).min(n) {
            band.entries.push((i as u32, j as u32, 1.0));
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("band.mtx");
    let f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
    write_matrix_market(&band, std::io::BufWriter::new(f)).map_err(|e| e.to_string())?;
    let mut cv = Vec::new();
    for m in ["drhm-low", "ring", "modular", "random"] {
        let out = dir.path().join(m);
        cli(
            &[
                "run",
                "--matrix",
                path.to_str().expect("utf-8 path"),
                "--config",
                "tile4",
                "--mapper",
                m,
                "--seed",
                "5",
                "--sample-every",
                "0",
                "--out",
                out.to_str().expect("utf-8 path"),
            ],
            &[],
        )?;
        let text = std::fs::read_to_string(out.join("heatmap.csv")).map_err(|e| e.to_string())?;
        let h = Heatmap::from_csv(&text).map_err(|e| e.to_string())?;
        if h.mems != 32 {
            return Err(format!("heatmap has {} targets, want 32", h.mems));
        }
        cv.push(h.cell_stats().map_err(|e| e.to_string())?.cv);
    }
    let (drhm, ring, modular, random) = (cv[0], cv[1], cv[2], cv[3]);
    let detail = format!("cv drhm-low {drhm:.4}, ring {ring:.4}, modular {modular:.4}, random {random:.4}");
    if drhm < ring && drhm < modular && drhm <= 1.5 * random {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 6 ------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    const MB: usize = 1 << 20;
    let want = [
        ("tile4", 32, 64, 64, 3 * MB / 2),
        ("tile16", 128, 256, 512, 3 * MB),
        ("tile64", 512, 1024, 4096, 12 * MB),
    ];
    let mut detail = Vec::new();
    for (name, units, routers, pipes, pad) in want {
        let cfg = ChipConfig::by_name(name).map_err(|e| e.to_string())?;
        let chip = build_chip::<f64>(&cfg, EvictionMode::Rolling, Default::default()).map_err(|e| e.to_string())?;
        let got = (
            chip.cores.len(),
            chip.mems.len(),
            chip.routers.len(),
            chip.cores.iter().map(|c| c.n_pipelines()).sum::<usize>(),
            chip.mems.iter().map(|m| m.hashpad_bytes()).sum::<usize>(),
        );
        if got != (units, units, routers, pipes, pad) {
            return Err(format!(
                "{name}: built (cores, mems, routers, pipelines, hashpad bytes) {got:?}, want {:?}",
                (units, units, routers, pipes, pad)
            ));
        }
        detail.push(format!("{name} {units}/{routers}/{pipes}/{:.1} MB", pad as f64 / MB as f64));
    }
    Ok(detail.join(", "))
}

// 7 ------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let a = rmat(8, 8, 77);
    let cfg = ChipConfig::tile4();
    let program = lower_for_chip(&a, &a, &cfg).map_err(|e| e.to_string())?;
    let run = |mode| {
        simulate(
            &cfg,
            &program,
            MapperConfig::new(Strategy::DrhmLow, 1),
            SimOptions { mode, sample_every: 0, ..SimOptions::default() },
        )
        .map(|r| (r.stats.hacc_cpi().mean, r.stats.hashpad_peak_occupancy))
        .map_err(|e| e.to_string())
    };
    let (re_cpi, re_occ) = run(EvictionMode::Rolling)?;
    let (be_cpi, be_occ) = run(EvictionMode::Barrier)?;
    let detail = format!("mean CPI RE {re_cpi:.2} vs BE {be_cpi:.2}, peak occupancy RE {re_occ} vs BE {be_occ}");
    if re_cpi <= be_cpi && re_occ <= be_occ {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 8 ------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut run_hashes = BTreeSet::new();
    let mut sweep_hashes = BTreeSet::new();
    for (i, threads) in ["1", "2", "4"].into_iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        cli(
            &[
                "run",
                "--rmat",
                "8:8",
                "--config",
                "tile16",
                "--mapper",
                "drhm-low",
                "--seed",
                "3",
                "--out",
                out.to_str().expect("utf-8 path"),
            ],
            &[("RAYON_NUM_THREADS", threads)],
        )?;
        run_hashes.insert(sha256(&out.join("stats.json"))?);

        let out = dir.path().join(format!("sweep{i}"));
        cli(
            &[
                "sweep",
                "--configs",
                "tile4,tile16",
                "--mappers",
                "drhm-low,random",
                "--rmat",
                "6:4",
                "--rmat",
                "7:2",
                "--seed",
                "3",
                "--jobs",
                threads,
                "--out",
                out.to_str().expect("utf-8 path"),
            ],
            &[("RAYON_NUM_THREADS", threads)],
        )?;
        let mut h = Sha256::new();
        let mut files: Vec<PathBuf> = std::fs::read_dir(out.join("points"))
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        files.sort();
        files.push(out.join("summary.csv"));
        for f in &files {
            h.update(std::fs::read(f).map_err(|e| e.to_string())?);
        }
        sweep_hashes.insert(h.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>());
    }
    let detail = format!(
        "3 runs on 1/2/4 threads: {} distinct stats.json, {} distinct sweep outputs",
        run_hashes.len(),
        sweep_hashes.len()
    );
    if run_hashes.len() == 1 && sweep_hashes.len() == 1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 9 ------------------------------------------------------------------------

fn criterion_9(s: &OracleSuite) -> Outcome {
    // Rows of 4, 3 and 3 nonzeros.
    let m = CooMatrix::from_entries(
        3,
        6,
        [
            (0, 0, 1.0),
            (0, 1, 2.0),
            (0, 3, 3.0),
            (0, 5, 4.0),
            (1, 1, 5.0),
            (1, 2, 6.0),
            (1, 4, 7.0),
            (2, 0, 8.0),
            (2, 2, 9.0),
            (2, 5, 10.0),
        ],
    )
    .map_err(|e| e.to_string())?
    .to_csr();
    let plain = MapCsrMatrix::from_csr(&m, 1, &BTreeSet::new()).map_err(|e| e.to_string())?;
    let r1 = plain.replication_ratio().map_err(|e| e.to_string())?;
    let rep = MapCsrMatrix::build(&m, 2, &[0].into(), &[0, 1, 2, 0]).map_err(|e| e.to_string())?;
    let r2 = rep.replication_ratio().map_err(|e| e.to_string())?;
    let detail = format!(
        "ratios {r1} and {r2}; MAP-CSR SMASH matched CSR SMASH on {} instances",
        s.instances
    );
    if r1 != 1.0 || r2 != 1.6 {
        Err(detail)
    } else if !s.map_csr.is_empty() {
        Err(format!("{detail}; {}", summarize(&s.map_csr)))
    } else {
        Ok(detail)
    }
}

// 10 -----------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let t0 = Instant::now();
    let cfg = ChipConfig::tile4();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for i in 0..19u64 {
        let n = rng.gen_range(8..200);
        let f = rng.gen_range(4..96);
        let h = rng.gen_range(1..24);
        let inst = random_gcn_instance(n, f, h, rng.gen_range(1.0..8.0), rng.gen_range(0.02..0.5), 100 + i);
        let work = gcn_layer_workload(&inst.adj, &inst.x, &inst.w).map_err(|e| e.to_string())?;
        let program = lower_for_chip(&work.agg_a, &work.agg_b, &cfg).map_err(|e| e.to_string())?;
        let r = simulate(
            &cfg,
            &program,
            MapperConfig::new(Strategy::DrhmLow, 1),
            SimOptions { sample_every: 0, ..SimOptions::default() },
        )
        .map_err(|e| format!("instance {i}: {e}"))?;
        let y = work.combine(&r.c).map_err(|e| e.to_string())?;
        let err = work.error(&y);
        if err > 1e-9 {
            return Err(format!("instance {i} ({n}x{f}x{h}): relative error {err:.3e}"));
        }
        worst = worst.max(err);
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    cli(
        &[
            "gcn",
            "--nodes",
            "2708",
            "--features",
            "1433",
            "--hidden",
            "16",
            "--config",
            "tile4",
            "--tolerance",
            "1e-9",
            "--out",
            dir.path().to_str().expect("utf-8 path"),
        ],
        &[],
    )?;
    let text = std::fs::read_to_string(dir.path().join("gcn.json")).map_err(|e| e.to_string())?;
    let rep: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let cora = rep["max_rel_error"].as_f64().unwrap_or(f64::NAN);
    let wall = t0.elapsed();
    let detail = format!(
        "19 random + Cora-shaped 2708x1433x16: worst error {:.2e}, Cora {cora:.2e}, {:.1} s",
        worst.max(cora),
        wall.as_secs_f64()
    );
    if cora <= 1e-9 && wall <= Duration::from_secs(120) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// 11 -----------------------------------------------------------------------

fn criterion_11() -> Outcome {
    let c = ChannelConfig::default();
    let params = ChannelParams {
        peak_bytes_per_cycle: c.peak_bytes_per_cycle,
        fixed_latency: c.fixed_latency,
        queue_depth: c.queue_depth,
    };

    let mut ch = MemChannelModel::new(params);
    assert!(ch.submit(0, c.granule_bytes, 10));
    let mut latency = None;
    for now in 10..10 + 4 * c.fixed_latency {
        if let Some(done) = ch.tick(now).first() {
            latency = Some(done.done - done.submitted);
            break;
        }
    }

    let mut ch = MemChannelModel::new(params);
    let (warmup, cycles) = (2_000u64, 100_000u64);
    let mut delivered = 0u64;
    let mut id = 0;
    for now in 0..warmup + cycles {
        while ch.submit(id, c.granule_bytes, now) {
            id += 1;
        }
        for done in ch.tick(now) {
            if now >= warmup {
                delivered += done.bytes;
            }
        }
    }
    let bw = delivered as f64 / cycles as f64;
    let peak = c.peak_bytes_per_cycle as f64;
    let detail = format!(
        "delivered {bw:.3} B/cycle of {peak} peak, isolated latency {latency:?} (fixed {})",
        c.fixed_latency
    );
    if (bw - peak).abs() <= 0.01 * peak && latency == Some(c.fixed_latency) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();
    let mut record = |n: u32, name: &str, out: Outcome| {
        report(n, name, &out);
        if out.is_err() {
            failed.push(n);
        }
    };
    record(1, "bloat reproduction", criterion_1());
    let suite = oracle_suite();
    record(2, "oracle equivalence", criterion_2(&suite));
    record(3, "conservation", criterion_3(&suite));
    record(4, "DRHM formula", criterion_4());
    record(5, "mapping uniformity", criterion_5());
    record(6, "configuration fidelity", criterion_6());
    record(7, "rolling eviction", criterion_7());
    record(8, "determinism", criterion_8());
    record(9, "MAP-CSR", criterion_9(&suite));
    record(10, "GCN layer", criterion_10());
    record(11, "memory model", criterion_11());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

// SPDX-License-Identifier: Apache-2.0

use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use super::table::{pack_tag, unpack_tag, ProbeOutcome, ScratchpadHashTable};
use super::SmashError;
use crate::matio::{CsrMatrix, SparseRows};
use crate::oracle::{plan_windows, symbolic_pass, RowClass, SymbolicPlan, Window, WindowParams, WindowPlan};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmashVersion {
    /// One worker per row.
    Base,
    /// Rows shared by many workers through atomic accumulation.
    V1,
    /// Two tokens (even and odd half) per row, polled from a shared pool.
    V2,
    /// V2 hashing with prefetch and write-back of neighbouring windows
    /// overlapped on a split scratchpad.
    V3,
}

impl SmashVersion {
    pub const ALL: [SmashVersion; 4] = [Self::Base, Self::V1, Self::V2, Self::V3];

    pub fn name(self) -> &'static str {
        match self {
            Self::Base => "base",
            Self::V1 => "v1",
            Self::V2 => "v2",
            Self::V3 => "v3",
        }
    }
}

impl FromStr for SmashVersion {
    type Err = SmashError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s.to_ascii_lowercase())
            .ok_or_else(|| SmashError::Config(format!("unknown smash version '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmashConfig {
    pub version: SmashVersion,
    pub n_workers: usize,
    /// Scratchpad size in hash lines; V3 gives each in-flight window half.
    pub spad_capacity: usize,
    pub cf: f64,
    pub ef: f64,
    /// Dense-row threshold; `None` means one 64th of the window budget.
    pub threshold: Option<u64>,
}

impl SmashConfig {
    pub const DEFAULT_SPAD: usize = 1 << 16;

    pub fn new(version: SmashVersion, n_workers: usize) -> Self {
        Self {
            version,
            n_workers,
            spad_capacity: Self::DEFAULT_SPAD,
            cf: WindowParams::DEFAULT_CF,
            ef: WindowParams::DEFAULT_EF,
            threshold: None,
        }
    }

    pub fn validate(&self) -> Result<(), SmashError> {
        if self.n_workers == 0 {
            return Err(SmashError::Config("at least one worker is required".into()));
        }
        if self.window_budget() == 0 {
            return Err(SmashError::Config("scratchpad too small".into()));
        }
        Ok(())
    }

    pub fn window_budget(&self) -> usize {
        match self.version {
            SmashVersion::V3 => self.spad_capacity / 2,
            _ => self.spad_capacity,
        }
    }

    pub fn window_params(&self) -> WindowParams {
        let mut p = WindowParams::for_budget(self.window_budget());
        p.cf = self.cf;
        p.ef = self.ef;
        if let Some(t) = self.threshold {
            p.threshold = t;
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Half {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Position of the row inside its window.
    pub row: u32,
    pub half: Half,
}

impl Token {
    /// A-entry range `[lo, hi)` covered by this token for a row of `len`
    /// entries: even takes the first `ceil(len/2)`, odd the rest.
    pub fn range(self, len: usize) -> (usize, usize) {
        let mid = len.div_ceil(2);
        match self.half {
            Half::Even => (0, mid),
            Half::Odd => (mid, len),
        }
    }
}

/// Token bookkeeping summed over windows.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAudit {
    pub tokens: u64,
    pub consumed_exactly_once: u64,
    pub max_consumptions: u32,
    pub per_worker: Vec<u64>,
}

impl TokenAudit {
    fn merge(&mut self, other: &TokenAudit) {
        self.tokens += other.tokens;
        self.consumed_exactly_once += other.consumed_exactly_once;
        self.max_consumptions = self.max_consumptions.max(other.max_consumptions);
        if self.per_worker.len() < other.per_worker.len() {
            self.per_worker.resize(other.per_worker.len(), 0);
        }
        for (a, b) in self.per_worker.iter_mut().zip(&other.per_worker) {
            *a += b;
        }
    }

    pub fn all_consumed_once(&self) -> bool {
        self.consumed_exactly_once == self.tokens
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeStats {
    pub inserted: u64,
    pub updated: u64,
    pub probed: u64,
    pub probe_steps: u64,
}

#[derive(Default)]
struct ProbeCounters {
    inserted: AtomicU64,
    updated: AtomicU64,
    probed: AtomicU64,
    probe_steps: AtomicU64,
}

impl ProbeCounters {
    fn record(&self, o: ProbeOutcome) {
        match o {
            ProbeOutcome::Inserted => self.inserted.fetch_add(1, Ordering::Relaxed),
            ProbeOutcome::Updated => self.updated.fetch_add(1, Ordering::Relaxed),
            ProbeOutcome::Probed(k) => {
                self.probe_steps.fetch_add(k, Ordering::Relaxed);
                self.probed.fetch_add(1, Ordering::Relaxed)
            }
        };
    }

    fn snapshot(&self) -> ProbeStats {
        ProbeStats {
            inserted: self.inserted.load(Ordering::Relaxed),
            updated: self.updated.load(Ordering::Relaxed),
            probed: self.probed.load(Ordering::Relaxed),
            probe_steps: self.probe_steps.load(Ordering::Relaxed),
        }
    }
}

impl ProbeStats {
    fn add(&mut self, o: &ProbeStats) {
        self.inserted += o.inserted;
        self.updated += o.updated;
        self.probed += o.probed;
        self.probe_steps += o.probe_steps;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseUnits {
    pub prefetch: u64,
    pub hash: u64,
    pub writeback: u64,
}

/// Which window each phase worked on at every pipeline step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub prefetch: Option<usize>,
    pub hash: Option<usize>,
    pub writeback: Option<usize>,
}

impl StepRecord {
    pub fn all_busy(&self) -> bool {
        self.prefetch.is_some() && self.hash.is_some() && self.writeback.is_some()
    }
}

/// Work units per phase: prefetch counts cleared table slots plus staged A
/// entries, hash counts partial products, write-back counts scanned slots
/// plus emitted nonzeros.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseLedger {
    pub steps: Vec<StepRecord>,
    pub units: PhaseUnits,
    pub fractions: [f64; 3],
    pub steps_all_busy: usize,
}

impl PhaseLedger {
    fn finish(&mut self) {
        let u = self.units;
        let total = (u.prefetch + u.hash + u.writeback).max(1) as f64;
        self.fractions = [
            u.prefetch as f64 / total,
            u.hash as f64 / total,
            u.writeback as f64 / total,
        ];
        self.steps_all_busy = self.steps.iter().filter(|s| s.all_busy()).count();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmashReport {
    pub version: SmashVersion,
    pub n_workers: usize,
    pub n_windows: usize,
    pub window_budget: usize,
    pub ledger: PhaseLedger,
    /// Present for the tokenized versions.
    pub tokens: Option<TokenAudit>,
    pub probes: ProbeStats,
    /// Rows whose per-column contribution tallies differ from the symbolic
    /// plan. Zero unless an update was lost or duplicated.
    pub atomicity_mismatched_rows: u64,
    pub peak_table_occupancy: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmashOutput<T> {
    pub c: CsrMatrix<T>,
    pub report: SmashReport,
}

struct WindowState<T> {
    index: usize,
    rows: Vec<u32>,
    tables: Vec<ScratchpadHashTable<T>>,
}

fn prefetch<T: Scalar, A: SparseRows<T>>(index: usize, w: &Window, a: &A) -> (WindowState<T>, u64) {
    let tables = w
        .class
        .iter()
        .zip(&w.hash_capacity)
        .map(|(&c, &cap)| match c {
            RowClass::Dense => ScratchpadHashTable::direct(cap),
            RowClass::Sparse => ScratchpadHashTable::hashed(cap),
        })
        .collect();
    let staged: usize = w.rows.iter().map(|&r| a.row_nnz(r as usize)).sum();
    let units = (w.total_capacity() + staged) as u64;
    (
        WindowState {
            index,
            rows: w.rows.clone(),
            tables,
        },
        units,
    )
}

struct Written<T> {
    rows: Vec<(u32, Vec<u32>, Vec<T>)>,
    units: u64,
    mismatched: u64,
    occupancy: usize,
}

fn writeback<T: Scalar>(st: WindowState<T>, plan: &SymbolicPlan) -> Written<T> {
    let mut out = Written {
        rows: Vec::with_capacity(st.rows.len()),
        units: 0,
        mismatched: 0,
        occupancy: 0,
    };
    for (&r, t) in st.rows.iter().zip(&st.tables) {
        let live = t.drain_sorted();
        out.occupancy += live.len();
        out.units += (t.capacity() + live.len()) as u64;
        let cols: Vec<u32> = live.iter().map(|e| unpack_tag(e.0).1 as u32).collect();
        let hits: Vec<u32> = live.iter().map(|e| e.2).collect();
        let (pc, pn) = plan.row_contribs(r as usize);
        if cols != pc || hits != pn {
            out.mismatched += 1;
        }
        out.rows.push((r, cols, live.into_iter().map(|e| e.1).collect()));
    }
    out
}

/// Shared failure slot; keeps the smallest (window, row) so the reported
/// error does not depend on thread timing.
struct FirstError {
    failed: AtomicBool,
    err: Mutex<Option<(usize, usize)>>,
}

impl FirstError {
    fn new() -> Self {
        Self {
            failed: AtomicBool::new(false),
            err: Mutex::new(None),
        }
    }

    fn set(&self, window: usize, row: usize) {
        self.failed.store(true, Ordering::Relaxed);
        let mut g = self.err.lock().expect("poisoned");
        if g.is_none_or(|e| (window, row) < e) {
            *g = Some((window, row));
        }
    }

    fn take(self) -> Result<(), SmashError> {
        match self.err.into_inner().expect("poisoned") {
            Some((window, row)) => Err(SmashError::Overflow { window, row }),
            None => Ok(()),
        }
    }
}

/// Accumulates A entries `[lo, hi)` of window row `pos`. Returns the number
/// of partial products.
#[allow(clippy::too_many_arguments)]
fn hash_span<T: Scalar, A: SparseRows<T>>(
    st: &WindowState<T>,
    pos: usize,
    lo: usize,
    hi: usize,
    a: &A,
    b: &CsrMatrix<T>,
    probes: &ProbeCounters,
    fail: &FirstError,
) -> u64 {
    let r = st.rows[pos] as usize;
    let (acols, avals) = a.row(r);
    let table = &st.tables[pos];
    let mut fma = 0;
    for (&k, &av) in acols[lo..hi].iter().zip(&avals[lo..hi]) {
        let (bcols, bvals) = b.row(k as usize);
        for (&j, &bv) in bcols.iter().zip(bvals) {
            match table.insert(pack_tag(r, j as usize), av * bv) {
                Ok(o) => probes.record(o),
                Err(_) => {
                    fail.set(st.index, r);
                    return fma;
                }
            }
            fma += 1;
        }
    }
    fma
}

fn hash_window<T: Scalar, A: SparseRows<T> + Sync>(
    st: &WindowState<T>,
    a: &A,
    b: &CsrMatrix<T>,
    version: SmashVersion,
    n_workers: usize,
) -> Result<(u64, ProbeStats, Option<TokenAudit>), SmashError> {
    let probes = ProbeCounters::default();
    let fail = FirstError::new();
    let fma = AtomicU64::new(0);
    match version {
        SmashVersion::Base => {
            thread::scope(|s| {
                for w in 0..n_workers {
                    let (probes, fail, fma) = (&probes, &fail, &fma);
                    s.spawn(move || {
                        let mut n = 0;
                        for pos in (w..st.rows.len()).step_by(n_workers) {
                            if fail.failed.load(Ordering::Relaxed) {
                                break;
                            }
                            let len = a.row_nnz(st.rows[pos] as usize);
                            n += hash_span(st, pos, 0, len, a, b, probes, fail);
                        }
                        fma.fetch_add(n, Ordering::Relaxed);
                    });
                }
            });
        }
        SmashVersion::V1 => {
            // Flattened A entries handed out in small chunks, so one row is
            // typically shared by several workers.
            const CHUNK: usize = 4;
            let mut spans = Vec::new();
            for (pos, &r) in st.rows.iter().enumerate() {
                let len = a.row_nnz(r as usize);
                let mut lo = 0;
                while lo < len {
                    spans.push((pos, lo, (lo + CHUNK).min(len)));
                    lo += CHUNK;
                }
            }
            let cursor = AtomicUsize::new(0);
            thread::scope(|s| {
                for _ in 0..n_workers {
                    let (probes, fail, fma, spans, cursor) = (&probes, &fail, &fma, &spans, &cursor);
                    s.spawn(move || {
                        let mut n = 0;
                        while !fail.failed.load(Ordering::Relaxed) {
                            let i = cursor.fetch_add(1, Ordering::Relaxed);
                            let Some(&(pos, lo, hi)) = spans.get(i) else { break };
                            n += hash_span(st, pos, lo, hi, a, b, probes, fail);
                        }
                        fma.fetch_add(n, Ordering::Relaxed);
                    });
                }
            });
        }
        SmashVersion::V2 | SmashVersion::V3 => {
            let (n, p, t) = tokenized(st, a, b, n_workers)?;
            return Ok((n, p, Some(t)));
        }
    }
    fail.take()?;
    Ok((fma.into_inner(), probes.snapshot(), None))
}

fn tokenized<T: Scalar, A: SparseRows<T> + Sync>(
    st: &WindowState<T>,
    a: &A,
    b: &CsrMatrix<T>,
    n_workers: usize,
) -> Result<(u64, ProbeStats, TokenAudit), SmashError> {
    let pool: Vec<Token> = (0..st.rows.len() as u32)
        .flat_map(|row| [Token { row, half: Half::Even }, Token { row, half: Half::Odd }])
        .collect();
    let consumed: Vec<AtomicU32> = pool.iter().map(|_| AtomicU32::new(0)).collect();
    let per_worker: Vec<AtomicU64> = (0..n_workers).map(|_| AtomicU64::new(0)).collect();
    let cursor = AtomicUsize::new(0);
    let probes = ProbeCounters::default();
    let fail = FirstError::new();
    let fma = AtomicU64::new(0);
    thread::scope(|s| {
        for w in 0..n_workers {
            let (pool, consumed, per_worker, cursor, probes, fail, fma) =
                (&pool, &consumed, &per_worker, &cursor, &probes, &fail, &fma);
            s.spawn(move || {
                let mut n = 0;
                while !fail.failed.load(Ordering::Relaxed) {
                    let i = cursor.fetch_add(1, Ordering::Relaxed);
                    let Some(&tok) = pool.get(i) else { break };
                    consumed[i].fetch_add(1, Ordering::Relaxed);
                    per_worker[w].fetch_add(1, Ordering::Relaxed);
                    let pos = tok.row as usize;
                    let (lo, hi) = tok.range(a.row_nnz(st.rows[pos] as usize));
                    n += hash_span(st, pos, lo, hi, a, b, probes, fail);
                }
                fma.fetch_add(n, Ordering::Relaxed);
            });
        }
    });
    fail.take()?;
    let counts: Vec<u32> = consumed.into_iter().map(AtomicU32::into_inner).collect();
    let audit = TokenAudit {
        tokens: pool.len() as u64,
        consumed_exactly_once: counts.iter().filter(|&&c| c == 1).count() as u64,
        max_consumptions: counts.iter().copied().max().unwrap_or(0),
        per_worker: per_worker.into_iter().map(AtomicU64::into_inner).collect(),
    };
    Ok((fma.into_inner(), probes.snapshot(), audit))
}

/// Processes one window with two tokens per row polled by `n_workers`
/// workers. `tables[p]` accumulates row `rows[p]`.
pub fn run_tokenized_window<T: Scalar, A: SparseRows<T> + Sync>(
    window_index: usize,
    rows: &[u32],
    tables: Vec<ScratchpadHashTable<T>>,
    a: &A,
    b: &CsrMatrix<T>,
    n_workers: usize,
) -> Result<(Vec<ScratchpadHashTable<T>>, TokenAudit), SmashError> {
    if n_workers == 0 || rows.len() != tables.len() {
        return Err(SmashError::Config("one table per row and at least one worker".into()));
    }
    let st = WindowState {
        index: window_index,
        rows: rows.to_vec(),
        tables,
    };
    let (_, _, audit) = tokenized(&st, a, b, n_workers)?;
    Ok((st.tables, audit))
}

struct Collector<T> {
    rows: Vec<(Vec<u32>, Vec<T>)>,
    report: SmashReport,
}

impl<T: Scalar> Collector<T> {
    fn new(n_rows: usize, cfg: &SmashConfig, wp: &WindowPlan) -> Self {
        Self {
            rows: vec![(Vec::new(), Vec::new()); n_rows],
            report: SmashReport {
                version: cfg.version,
                n_workers: cfg.n_workers,
                n_windows: wp.windows.len(),
                window_budget: wp.spad_budget,
                ledger: PhaseLedger::default(),
                tokens: None,
                probes: ProbeStats::default(),
                atomicity_mismatched_rows: 0,
                peak_table_occupancy: 0,
            },
        }
    }

    fn hashed(&mut self, fma: u64, probes: &ProbeStats, audit: Option<TokenAudit>) {
        self.report.ledger.units.hash += fma;
        self.report.probes.add(probes);
        if let Some(t) = audit {
            self.report.tokens.get_or_insert_with(TokenAudit::default).merge(&t);
        }
    }

    fn written(&mut self, w: Written<T>) {
        self.report.ledger.units.writeback += w.units;
        self.report.atomicity_mismatched_rows += w.mismatched;
        self.report.peak_table_occupancy = self.report.peak_table_occupancy.max(w.occupancy);
        for (r, c, v) in w.rows {
            self.rows[r as usize] = (c, v);
        }
    }

    fn finish(mut self, n_cols: usize) -> SmashOutput<T> {
        self.report.ledger.finish();
        let n = self.rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (c, v) in self.rows {
            cols.extend(c);
            vals.extend(v);
            offsets.push(cols.len());
        }
        SmashOutput {
            c: CsrMatrix::from_parts_unchecked(n, n_cols, offsets, cols, vals),
            report: self.report,
        }
    }
}

/// Hash-based SpGEMM `C = A * B`. `A` may be CSR or MAP-CSR.
pub fn smash_spgemm<T: Scalar, A: SparseRows<T> + Sync>(
    a: &A,
    b: &CsrMatrix<T>,
    cfg: &SmashConfig,
) -> Result<SmashOutput<T>, SmashError> {
    cfg.validate()?;
    let plan = symbolic_pass(a, b)?;
    let wp = plan_windows(&plan, &cfg.window_params())?;
    if cfg.version == SmashVersion::V3 {
        return run_pipelined(&wp, &plan, a, b, cfg);
    }
    let mut col = Collector::new(a.n_rows(), cfg, &wp);
    for (w, win) in wp.windows.iter().enumerate() {
        let (st, units) = prefetch(w, win, a);
        col.report.ledger.units.prefetch += units;
        let (fma, probes, audit) = hash_window(&st, a, b, cfg.version, cfg.n_workers)?;
        col.hashed(fma, &probes, audit);
        col.written(writeback(st, &plan));
        let steps = &mut col.report.ledger.steps;
        steps.push(StepRecord { prefetch: Some(w), ..Default::default() });
        steps.push(StepRecord { hash: Some(w), ..Default::default() });
        steps.push(StepRecord { writeback: Some(w), ..Default::default() });
    }
    Ok(col.finish(b.n_cols()))
}

/// Three-stage software pipeline: at step `s` window `s` is prefetched,
/// window `s-1` hashed with tokens and window `s-2` written back, each phase
/// on its own thread. Steps are separated by a join.
pub fn run_pipelined<T: Scalar, A: SparseRows<T> + Sync>(
    wp: &WindowPlan,
    plan: &SymbolicPlan,
    a: &A,
    b: &CsrMatrix<T>,
    cfg: &SmashConfig,
) -> Result<SmashOutput<T>, SmashError> {
    cfg.validate()?;
    let n_win = wp.windows.len();
    let mut col = Collector::new(a.n_rows(), cfg, wp);
    let mut staged: Option<WindowState<T>> = None;
    let mut hashed: Option<WindowState<T>> = None;
    for s in 0..n_win + 2 {
        let to_hash = staged.take();
        let to_write = hashed.take();
        let rec = StepRecord {
            prefetch: (s < n_win).then_some(s),
            hash: to_hash.as_ref().map(|st| st.index),
            writeback: to_write.as_ref().map(|st| st.index),
        };
        let (pre, hash_res, written) = thread::scope(|sc| {
            let pre = (s < n_win).then(|| sc.spawn(move || prefetch(s, &wp.windows[s], a)));
            let wb = to_write.map(|st| sc.spawn(move || writeback(st, plan)));
            let hash_res = to_hash.map(|st| {
                let r = tokenized(&st, a, b, cfg.n_workers);
                (st, r)
            });
            (
                pre.map(|h| h.join().expect("prefetch thread")),
                hash_res,
                wb.map(|h| h.join().expect("write-back thread")),
            )
        });
        col.report.ledger.steps.push(rec);
        if let Some((st, units)) = pre {
            col.report.ledger.units.prefetch += units;
            staged = Some(st);
        }
        if let Some(w) = written {
            col.written(w);
        }
        if let Some((st, r)) = hash_res {
            let (fma, probes, audit) = r?;
            col.hashed(fma, &probes, Some(audit));
            hashed = Some(st);
        }
    }
    Ok(col.finish(b.n_cols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::{generate_rmat, randomize_values, CooMatrix, RmatParams};
    use crate::oracle::spgemm_gustavson;

    fn rmat_i64(scale: u32, ef: u32, seed: u64) -> CsrMatrix<i64> {
        let mut m = generate_rmat(&RmatParams::graph500(scale, ef, seed)).unwrap();
        randomize_values(&mut m, -5, 9, seed ^ 0x55);
        m.to_csr()
    }

    #[test]
    fn base_single_worker_identity() {
        let b = rmat_i64(5, 4, 1);
        let out = smash_spgemm(&CsrMatrix::identity(32), &b, &SmashConfig::new(SmashVersion::Base, 1)).unwrap();
        assert_eq!(out.c, b);
    }

    #[test]
    fn every_version_matches_oracle_in_integer_mode() {
        let a = rmat_i64(7, 6, 3);
        let want = spgemm_gustavson(&a, &a).unwrap();
        for v in SmashVersion::ALL {
            for workers in [1, 3, 8] {
                let out = smash_spgemm(&a, &a, &SmashConfig::new(v, workers)).unwrap();
                assert_eq!(out.c, want, "{v:?} x{workers}");
                assert_eq!(out.report.atomicity_mismatched_rows, 0);
            }
        }
    }

    #[test]
    fn v2_tokens_consumed_once_and_balanced() {
        let mut m: CooMatrix<f64> = generate_rmat(&RmatParams::graph500(8, 8, 5)).unwrap();
        randomize_values(&mut m, 1, 4, 2);
        let a = m.to_csr();
        let want = spgemm_gustavson(&a, &a).unwrap();
        let out = smash_spgemm(&a, &a, &SmashConfig::new(SmashVersion::V2, 8)).unwrap();
        assert!(out.c.same_pattern(&want));
        for (x, y) in out.c.values().iter().zip(want.values()) {
            assert!(crate::scalar::rel_diff(*x, *y) <= 1e-9);
        }
        let t = out.report.tokens.unwrap();
        assert!(t.all_consumed_once());
        assert_eq!(t.max_consumptions, 1);
        assert_eq!(t.per_worker.iter().sum::<u64>(), t.tokens);
    }

    #[test]
    fn token_halves() {
        let even = Token { row: 0, half: Half::Even };
        let odd = Token { row: 0, half: Half::Odd };
        assert_eq!((even.range(1), odd.range(1)), ((0, 1), (1, 1)));
        assert_eq!((even.range(4), odd.range(4)), ((0, 2), (2, 4)));
    }

    #[test]
    fn pipeline_overlaps_all_phases() {
        let a = rmat_i64(7, 8, 9);
        let mut cfg = SmashConfig::new(SmashVersion::V3, 4);
        cfg.spad_capacity = 2 * 4096;
        let out = smash_spgemm(&a, &a, &cfg).unwrap();
        assert!(out.report.n_windows >= 3, "{}", out.report.n_windows);
        assert!(out.report.ledger.steps_all_busy >= 1);
        assert_eq!(out.c, spgemm_gustavson(&a, &a).unwrap());
    }

    #[test]
    fn single_window_pipeline_equals_v2() {
        let a = rmat_i64(5, 4, 2);
        let v2 = smash_spgemm(&a, &a, &SmashConfig::new(SmashVersion::V2, 2)).unwrap();
        let v3 = smash_spgemm(&a, &a, &SmashConfig::new(SmashVersion::V3, 2)).unwrap();
        assert_eq!(v3.report.n_windows, 1);
        assert_eq!(v2.c, v3.c);
    }

    #[test]
    fn tokenized_window_directly() {
        let a = CooMatrix::from_entries(1, 3, [(0, 0, 1i64)]).unwrap().to_csr();
        let b = CooMatrix::from_entries(3, 2, [(0, 0, 2i64), (0, 1, 3)]).unwrap().to_csr();
        let (tables, audit) =
            run_tokenized_window(0, &[0], vec![ScratchpadHashTable::hashed(3)], &a, &b, 2).unwrap();
        assert_eq!(audit.tokens, 2);
        assert!(audit.all_consumed_once());
        let vals: Vec<i64> = tables[0].drain_sorted().iter().map(|e| e.1).collect();
        assert_eq!(vals, vec![2, 3]);
    }

    #[test]
    fn bad_version_name() {
        assert!("v4".parse::<SmashVersion>().is_err());
        assert_eq!("V3".parse::<SmashVersion>().unwrap(), SmashVersion::V3);
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Output files. Everything written here is a pure function of the inputs
//! except `run.log`, which holds wall-clock data.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use neurasim::engine::SimResult;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    let p = dir.join(name);
    fs::write(&p, text).map_err(|e| CliError::io(&p, e))
}

pub fn write_json<S: Serialize>(dir: &Path, name: &str, v: &S) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(v).expect("serialisable");
    text.push('\n');
    write(dir, name, &text)
}

/// stats.json, heatmap.csv, one cpi_<kind>.csv per instruction kind and
/// timeseries.csv.
pub fn write_sim<T>(dir: &Path, r: &SimResult<T>) -> CliResult<()> {
    ensure_dir(dir)?;
    write_json(dir, "stats.json", &r.stats)?;
    write(dir, "heatmap.csv", &r.heatmap.to_csv())?;
    for (kind, h) in &r.stats.cpi {
        write(dir, &format!("cpi_{kind}.csv"), &h.to_csv())?;
    }
    write(dir, "timeseries.csv", &r.timeseries.to_csv())
}

#[derive(Serialize)]
struct LogLine<'a> {
    command: &'a str,
    unix_time: f64,
    wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycles: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kcps: Option<f64>,
}

/// Appends one JSON line with timing data to `run.log`.
pub fn log_timing(dir: &Path, command: &str, wall: Duration, cycles: Option<u64>) -> CliResult<()> {
    let secs = wall.as_secs_f64();
    let line = LogLine {
        command,
        unix_time: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64()),
        wall_seconds: secs,
        cycles,
        kcps: cycles.map(|c| c as f64 / 1000.0 / secs.max(1e-9)),
    };
    let p = dir.join("run.log");
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&p)
        .map_err(|e| CliError::io(&p, e))?;
    writeln!(f, "{}", serde_json::to_string(&line).expect("serialisable")).map_err(|e| CliError::io(&p, e))
}

// SPDX-License-Identifier: Apache-2.0

//! Input resolution: matrix files, R-MAT specs, chip configs and mapper
//! flags.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use neurasim::mapping::{MapperConfig, Reseed, Strategy};
use neurasim::matio::{generate_rmat, parse_matrix_market, randomize_values, CooMatrix, RmatParams};
use neurasim::uarch::ChipConfig;
use neurasim::Scalar;

use crate::args::{MapperArgs, MatrixSource};
use crate::error::{CliError, CliResult};

fn open(path: &Path) -> CliResult<Box<dyn BufRead>> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let r: Box<dyn Read> = if path.extension().is_some_and(|e| e == "gz") {
        Box::new(GzDecoder::new(f))
    } else {
        Box::new(f)
    };
    Ok(Box::new(BufReader::new(r)))
}

/// Whitespace-separated `src dst` pairs with `#` comments. Node ids are
/// compacted to `0..n` in increasing id order; every edge gets value one.
pub fn parse_edge_list<T: Scalar, R: BufRead>(r: R) -> CliResult<CooMatrix<T>> {
    let mut pairs = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CliError::Io(format!("line {}: {e}", n + 1)))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let mut f = t.split_whitespace().map(str::parse::<u64>);
        match (f.next(), f.next()) {
            (Some(Ok(u)), Some(Ok(v))) => pairs.push((u, v)),
            _ => return Err(CliError::Io(format!("line {}: expected two node ids", n + 1))),
        }
    }
    let mut ids: Vec<u64> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let idx = |x: u64| ids.binary_search(&x).expect("collected") as u32;
    let mut m = CooMatrix::new(ids.len(), ids.len())?;
    m.entries = pairs.iter().map(|&(u, v)| (idx(u), idx(v), T::one())).collect();
    m.entries.sort_unstable_by_key(|e| (e.0, e.1));
    m.entries.dedup_by_key(|e| (e.0, e.1));
    Ok(m)
}

/// Matrix Market when the first line carries the banner, SNAP edge list
/// otherwise.
pub fn read_matrix<T: Scalar>(path: &Path) -> CliResult<CooMatrix<T>> {
    let mut r = open(path)?;
    let is_mtx = r
        .fill_buf()
        .map_err(|e| CliError::io(path, e))?
        .starts_with(b"%%MatrixMarket");
    let m = if is_mtx {
        parse_matrix_market(r).map_err(|e| CliError::io(path, e))?
    } else {
        parse_edge_list(r).map_err(|e| CliError::io(path, e))?
    };
    Ok(m)
}

/// `A | A^T` with unit values.
pub fn symmetrized_pattern<T: Scalar>(m: &CooMatrix<T>) -> CooMatrix<T> {
    let mut out = CooMatrix {
        n_rows: m.n_rows.max(m.n_cols),
        n_cols: m.n_rows.max(m.n_cols),
        entries: m
            .entries
            .iter()
            .flat_map(|&(r, c, _)| [(r, c, T::one()), (c, r, T::one())])
            .collect(),
    };
    out.entries.sort_unstable_by_key(|e| (e.0, e.1));
    out.entries.dedup_by_key(|e| (e.0, e.1));
    out
}

pub fn parse_rmat(spec: &str, seed: u64) -> CliResult<RmatParams> {
    let bad = || CliError::Usage(format!("--rmat expects scale:ef[:a:b:c:d], got '{spec}'"));
    let f: Vec<&str> = spec.split(':').collect();
    if f.len() != 2 && f.len() != 6 {
        return Err(bad());
    }
    let scale = f[0].parse().map_err(|_| bad())?;
    let ef = f[1].parse().map_err(|_| bad())?;
    let mut p = RmatParams::graph500(scale, ef, seed);
    if f.len() == 6 {
        let q: Vec<f64> = f[2..].iter().map(|s| s.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
        (p.a, p.b, p.c, p.d) = (q[0], q[1], q[2], q[3]);
    }
    p.validate()?;
    Ok(p)
}

/// R-MAT pattern with integral values in [-8, 8] drawn from `seed`.
pub fn rmat_matrix<T: Scalar>(p: &RmatParams) -> CliResult<CooMatrix<T>> {
    let mut m = generate_rmat::<T>(p)?;
    randomize_values(&mut m, -8, 8, p.seed ^ 0x5eed);
    Ok(m)
}

/// A label for reports and file names.
pub fn source_label(src: &MatrixSource) -> String {
    match (&src.matrix, &src.rmat) {
        (Some(p), _) => file_stem(p),
        (None, Some(r)) => format!("rmat-{}", r.replace(':', "_")),
        (None, None) => "none".into(),
    }
}

pub fn file_stem(p: &Path) -> String {
    let name = p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    name.rsplit_once('.').map_or(name, |(s, _)| s).to_string()
}

/// Left and right operands of a source.
pub fn load_operands<T: Scalar>(src: &MatrixSource, seed: u64) -> CliResult<(CooMatrix<T>, CooMatrix<T>)> {
    let a = match (&src.matrix, &src.rmat) {
        (Some(p), None) => read_matrix(p)?,
        (None, Some(r)) => rmat_matrix(&parse_rmat(r, seed)?)?,
        (Some(_), Some(_)) => return Err(CliError::Usage("--matrix and --rmat are mutually exclusive".into())),
        (None, None) => return Err(CliError::Usage("one of --matrix or --rmat is required".into())),
    };
    let b = match &src.matrix_b {
        Some(p) => read_matrix(p)?,
        None => a.clone(),
    };
    if a.n_cols != b.n_rows {
        return Err(CliError::Usage(format!(
            "cannot multiply {}x{} by {}x{}",
            a.n_rows, a.n_cols, b.n_rows, b.n_cols
        )));
    }
    Ok((a, b))
}

pub fn chip_config(name: &str) -> CliResult<ChipConfig> {
    match name.strip_prefix("file:") {
        Some(path) => {
            let path = PathBuf::from(path);
            let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
            Ok(ChipConfig::from_json(&text)?)
        }
        None => Ok(ChipConfig::by_name(name)?),
    }
}

pub fn mapper_config(m: &MapperArgs) -> CliResult<MapperConfig> {
    let strategy: Strategy = m.mapper.parse()?;
    let reseed: Reseed = m.reseed.parse()?;
    let cfg = MapperConfig {
        strategy,
        n_targets: 1,
        k: m.k,
        reseed,
        rng_seed: m.seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_compacts_ids() {
        let text = "# comment\n10 20\n20 10\n10 30\n10 20\n";
        let m: CooMatrix<f64> = parse_edge_list(text.as_bytes()).unwrap();
        assert_eq!(m.n_rows, 3);
        assert_eq!(m.entries, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 0, 1.0)]);
        let s = symmetrized_pattern(&m);
        assert_eq!(s.entries.len(), 4);
    }

    #[test]
    fn rmat_specs() {
        assert_eq!(parse_rmat("8:4", 1).unwrap().scale, 8);
        let p = parse_rmat("5:2:0.25:0.25:0.25:0.25", 1).unwrap();
        assert_eq!(p.d, 0.25);
        assert!(parse_rmat("8", 0).is_err());
        assert!(parse_rmat("8:4:0.5:0.5:0.5:0.5", 0).is_err());
    }

    #[test]
    fn stems() {
        assert_eq!(file_stem(Path::new("/d/wiki-Vote.txt.gz")), "wiki-Vote");
        assert_eq!(file_stem(Path::new("a.mtx")), "a");
    }
}

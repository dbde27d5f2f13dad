// SPDX-License-Identifier: Apache-2.0

//! Matrix Market coordinate files.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{CooMatrix, MatrixError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxField {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtxSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(line: usize, msg: impl Into<String>) -> MatrixError {
    MatrixError::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<(MtxField, MtxSymmetry), MatrixError> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(line_no, "malformed %%MatrixMarket header"));
    }
    if words[2] != "coordinate" {
        return Err(parse_err(line_no, format!("unsupported format '{}'", words[2])));
    }
    let field = match words[3].as_str() {
        "real" | "double" => MtxField::Real,
        "integer" => MtxField::Integer,
        "pattern" => MtxField::Pattern,
        other => return Err(parse_err(line_no, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => MtxSymmetry::General,
        "symmetric" => MtxSymmetry::Symmetric,
        "skew-symmetric" => MtxSymmetry::SkewSymmetric,
        other => return Err(parse_err(line_no, format!("unsupported symmetry '{other}'"))),
    };
    Ok((field, symmetry))
}

/// Parses a coordinate Matrix Market stream into a normalized COO.
///
/// Pattern entries get value one, symmetric files are expanded to both
/// triangles (diagonal kept once), duplicates are summed and the 1-based file
/// indices become 0-based.
pub fn parse_matrix_market<T: Scalar, R: BufRead>(reader: R) -> Result<CooMatrix<T>, MatrixError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (header_no, header) = match lines.next() {
        Some((n, l)) => (n, l.map_err(|e| MatrixError::Io(e.to_string()))?),
        None => return Err(parse_err(1, "empty input")),
    };
    let (field, symmetry) = parse_header(header_no, &header)?;

    let mut dims: Option<(usize, usize, usize)> = None;
    let mut coo: Option<CooMatrix<T>> = None;
    let mut last_line = header_no;
    for (line_no, line) in lines {
        last_line = line_no;
        let line = line.map_err(|e| MatrixError::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut tok = trimmed.split_whitespace();
        let Some((n_rows, n_cols, _)) = dims else {
            let mut next = || -> Result<usize, MatrixError> {
                tok.next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse_err(line_no, "malformed size line"))
            };
            let d = (next()?, next()?, next()?);
            if tok.next().is_some() {
                return Err(parse_err(line_no, "malformed size line"));
            }
            let mut m = CooMatrix::new(d.0, d.1).map_err(|e| parse_err(line_no, e.to_string()))?;
            let expand = if symmetry == MtxSymmetry::General { 1 } else { 2 };
            m.entries.reserve(d.2 * expand);
            coo = Some(m);
            dims = Some(d);
            continue;
        };
        let m = coo.as_mut().expect("size line sets matrix");
        let mut index = |what: &str| -> Result<usize, MatrixError> {
            let raw: usize = tok
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| parse_err(line_no, format!("missing or malformed {what} index")))?;
            if raw == 0 {
                return Err(parse_err(line_no, format!("{what} index 0 in a 1-based file")));
            }
            Ok(raw - 1)
        };
        let (r, c) = (index("row")?, index("column")?);
        if r >= n_rows || c >= n_cols {
            return Err(parse_err(
                line_no,
                format!("entry ({}, {}) outside declared {n_rows}x{n_cols}", r + 1, c + 1),
            ));
        }
        let value = match field {
            MtxField::Pattern => T::one(),
            _ => {
                let t = tok
                    .next()
                    .ok_or_else(|| parse_err(line_no, "missing value"))?;
                T::parse_token(t).ok_or_else(|| parse_err(line_no, format!("bad value '{t}'")))?
            }
        };
        if tok.next().is_some() {
            return Err(parse_err(line_no, "trailing tokens on entry line"));
        }
        m.entries.push((r as u32, c as u32, value));
        if r != c {
            match symmetry {
                MtxSymmetry::General => {}
                MtxSymmetry::Symmetric => m.entries.push((c as u32, r as u32, value)),
                MtxSymmetry::SkewSymmetric => {
                    m.entries.push((c as u32, r as u32, T::zero() - value))
                }
            }
        }
    }

    let Some((_, _, nnz)) = dims else {
        return Err(parse_err(last_line, "missing size line"));
    };
    let mut m = coo.expect("dims imply matrix");
    let stored = m
        .entries
        .iter()
        .filter(|&&(r, c, _)| symmetry == MtxSymmetry::General || r >= c)
        .count();
    if stored != nnz {
        return Err(parse_err(
            last_line,
            format!("declared {nnz} entries, found {stored}"),
        ));
    }
    m.normalize();
    Ok(m)
}

pub fn read_matrix_market<T: Scalar>(path: &Path) -> Result<CooMatrix<T>, MatrixError> {
    let f = File::open(path).map_err(|e| MatrixError::Io(format!("{}: {e}", path.display())))?;
    parse_matrix_market(BufReader::new(f))
}

/// Writes a general coordinate file whose values parse back bit-exactly.
pub fn write_matrix_market<T: Scalar, W: Write>(m: &CooMatrix<T>, mut w: W) -> std::io::Result<()> {
    let field = if T::EXACT { "integer" } else { "real" };
    writeln!(w, "%%MatrixMarket matrix coordinate {field} general")?;
    writeln!(w, "{} {} {}", m.n_rows, m.n_cols, m.entries.len())?;
    for &(r, c, v) in &m.entries {
        writeln!(w, "{} {} {}", r + 1, c + 1, v.to_token())?;
    }
    Ok(())
}

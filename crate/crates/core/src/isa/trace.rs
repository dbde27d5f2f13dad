// SPDX-License-Identifier: Apache-2.0

//! Instruction traces.
//!
//! Text form, one record per line after a versioned header:
//!
//! ```text
//! # neurasim-trace v1 records=3 layout=16/16
//! MMH4 0x01 <base> <a_data> <b_col_ind> <b_data> <roll_counter> <n_a> <n_b> <a_col> <group> <r0> <r1> <r2> <r3>
//! HACC <tag> <data> <counter>
//! BARRIER <window>
//! ```
//!
//! Addresses, opcode and tag are hex; data uses the shortest decimal that
//! parses back to the same value. The binary form starts with `NSTR`, a
//! little-endian `u32` version, the two layout widths as bytes and a `u64`
//! record count, then one opcode byte per record followed by its fields.

use std::io::{BufRead, Write};

use super::{HaccInstr, Instr, IsaError, Mmh4Instr, TagLayout, OPCODE_BARRIER, OPCODE_HACC, OPCODE_MMH4};
use crate::Scalar;

pub const TRACE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"NSTR";

pub fn write_trace<T: Scalar, W: Write>(
    mut w: W,
    layout: TagLayout,
    instrs: &[Instr<T>],
) -> std::io::Result<()> {
    writeln!(
        w,
        "# neurasim-trace v{TRACE_VERSION} records={} layout={}/{}",
        instrs.len(),
        layout.row_bits,
        layout.col_bits
    )?;
    for ins in instrs {
        match ins {
            Instr::Mmh4(m) => writeln!(
                w,
                "MMH4 {:#04x} {:#x} {:#x} {:#x} {:#x} {:#x} {} {} {} {} {} {} {} {}",
                m.opcode,
                m.base_addr,
                m.a_data_addr,
                m.b_col_ind_addr,
                m.b_data_addr,
                m.roll_counter_addr,
                m.n_a,
                m.n_b,
                m.a_col,
                m.group,
                m.a_rows[0],
                m.a_rows[1],
                m.a_rows[2],
                m.a_rows[3]
            )?,
            Instr::Hacc(h) => writeln!(w, "HACC {:#010x} {} {}", h.tag, h.data.to_token(), h.counter)?,
            Instr::Barrier { window } => writeln!(w, "BARRIER {window}")?,
        }
    }
    Ok(())
}

fn corrupt(record: usize, msg: impl Into<String>) -> IsaError {
    IsaError::TraceCorrupt {
        record,
        msg: msg.into(),
    }
}

fn parse_header(line: &str) -> Result<(usize, TagLayout), IsaError> {
    let mut f = line.split_whitespace();
    if f.next() != Some("#") || f.next() != Some("neurasim-trace") {
        return Err(corrupt(0, "missing trace header"));
    }
    let version: u32 = f
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| corrupt(0, "malformed version"))?;
    if version != TRACE_VERSION {
        return Err(IsaError::TraceVersion {
            found: version,
            expected: TRACE_VERSION,
        });
    }
    let records: usize = f
        .next()
        .and_then(|v| v.strip_prefix("records="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| corrupt(0, "malformed record count"))?;
    let layout = f
        .next()
        .and_then(|v| v.strip_prefix("layout="))
        .and_then(|v| v.split_once('/'))
        .and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?)))
        .ok_or_else(|| corrupt(0, "malformed layout"))?;
    Ok((records, TagLayout::new(layout.0, layout.1)?))
}

fn hex(s: &str) -> Option<u64> {
    u64::from_str_radix(s.strip_prefix("0x")?, 16).ok()
}

fn parse_record<T: Scalar>(idx: usize, line: &str) -> Result<Instr<T>, IsaError> {
    let f: Vec<&str> = line.split_whitespace().collect();
    let bad = |what: &str| corrupt(idx, format!("bad {what} in '{line}'"));
    match f.first().copied() {
        Some("MMH4") if f.len() == 15 => {
            let opcode = hex(f[1]).filter(|&o| o == OPCODE_MMH4 as u64).ok_or_else(|| bad("opcode"))?;
            let addr = |i: usize| hex(f[i]).ok_or_else(|| bad("address"));
            let num = |i: usize| f[i].parse::<u32>().map_err(|_| bad("field"));
            let (n_a, n_b) = (num(7)?, num(8)?);
            if n_a > 4 || n_b > 4 {
                return Err(bad("tile size"));
            }
            Ok(Instr::Mmh4(Mmh4Instr {
                opcode: opcode as u8,
                base_addr: addr(2)?,
                a_data_addr: addr(3)?,
                b_col_ind_addr: addr(4)?,
                b_data_addr: addr(5)?,
                roll_counter_addr: addr(6)?,
                n_a: n_a as u8,
                n_b: n_b as u8,
                a_col: num(9)?,
                group: num(10)?,
                a_rows: [num(11)?, num(12)?, num(13)?, num(14)?],
            }))
        }
        Some("HACC") if f.len() == 4 => Ok(Instr::Hacc(HaccInstr {
            tag: hex(f[1]).and_then(|t| u32::try_from(t).ok()).ok_or_else(|| bad("tag"))?,
            data: T::parse_token(f[2]).ok_or_else(|| bad("data"))?,
            counter: f[3].parse().map_err(|_| bad("counter"))?,
        })),
        Some("BARRIER") if f.len() == 2 => Ok(Instr::Barrier {
            window: f[1].parse().map_err(|_| bad("window"))?,
        }),
        _ => Err(corrupt(idx, format!("unrecognized record '{line}'"))),
    }
}

pub fn read_trace<T: Scalar, R: BufRead>(r: R) -> Result<(TagLayout, Vec<Instr<T>>), IsaError> {
    let mut lines = r.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| corrupt(0, e.to_string()))?,
        None => return Err(corrupt(0, "empty trace")),
    };
    let (records, layout) = parse_header(&header)?;
    let mut out = Vec::with_capacity(records);
    for (idx, line) in lines.enumerate() {
        let line = line.map_err(|e| corrupt(idx, e.to_string()))?;
        if idx >= records {
            return Err(corrupt(idx, "record beyond the declared count"));
        }
        out.push(parse_record(idx, &line)?);
    }
    if out.len() < records {
        return Err(IsaError::TraceTruncated {
            expected: records,
            found: out.len(),
        });
    }
    Ok((layout, out))
}

pub fn encode_binary<T: Scalar>(layout: TagLayout, instrs: &[Instr<T>]) -> Vec<u8> {
    let mut b = Vec::with_capacity(16 + instrs.len() * 16);
    b.extend_from_slice(MAGIC);
    b.extend_from_slice(&TRACE_VERSION.to_le_bytes());
    b.push(layout.row_bits as u8);
    b.push(layout.col_bits as u8);
    b.extend_from_slice(&(instrs.len() as u64).to_le_bytes());
    for ins in instrs {
        match ins {
            Instr::Mmh4(m) => {
                b.push(OPCODE_MMH4);
                for v in [m.base_addr, m.a_data_addr, m.b_col_ind_addr, m.b_data_addr, m.roll_counter_addr] {
                    b.extend_from_slice(&v.to_le_bytes());
                }
                b.push(m.n_a);
                b.push(m.n_b);
                for v in [m.a_col, m.group].iter().chain(&m.a_rows) {
                    b.extend_from_slice(&v.to_le_bytes());
                }
            }
            Instr::Hacc(h) => {
                b.push(OPCODE_HACC);
                b.extend_from_slice(&h.tag.to_le_bytes());
                b.extend_from_slice(&h.data.to_bits64().to_le_bytes());
                b.extend_from_slice(&h.counter.to_le_bytes());
            }
            Instr::Barrier { window } => {
                b.push(OPCODE_BARRIER);
                b.extend_from_slice(&window.to_le_bytes());
            }
        }
    }
    b
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|s| s[0])
    }
    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|s| u32::from_le_bytes(s.try_into().unwrap()))
    }
    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|s| u64::from_le_bytes(s.try_into().unwrap()))
    }
}

pub fn decode_binary<T: Scalar>(buf: &[u8]) -> Result<(TagLayout, Vec<Instr<T>>), IsaError> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take(4) != Some(MAGIC.as_slice()) {
        return Err(corrupt(0, "missing binary trace magic"));
    }
    let version = c.u32().ok_or_else(|| corrupt(0, "short header"))?;
    if version != TRACE_VERSION {
        return Err(IsaError::TraceVersion {
            found: version,
            expected: TRACE_VERSION,
        });
    }
    let (rb, cb) = (c.u8(), c.u8());
    let records = c.u64().ok_or_else(|| corrupt(0, "short header"))? as usize;
    let layout = TagLayout::new(rb.unwrap_or(0) as u32, cb.unwrap_or(0) as u32)?;
    let mut out = Vec::new();
    for idx in 0..records {
        if c.pos == buf.len() {
            return Err(IsaError::TraceTruncated {
                expected: records,
                found: idx,
            });
        }
        let short = || corrupt(idx, "record cut short");
        let ins = match c.u8() {
            Some(OPCODE_MMH4) => {
                let mut a = [0u64; 5];
                for v in &mut a {
                    *v = c.u64().ok_or_else(short)?;
                }
                let (n_a, n_b) = (c.u8().ok_or_else(short)?, c.u8().ok_or_else(short)?);
                if n_a > 4 || n_b > 4 {
                    return Err(corrupt(idx, "tile size"));
                }
                let mut w = [0u32; 6];
                for v in &mut w {
                    *v = c.u32().ok_or_else(short)?;
                }
                Instr::Mmh4(Mmh4Instr {
                    opcode: OPCODE_MMH4,
                    base_addr: a[0],
                    a_data_addr: a[1],
                    b_col_ind_addr: a[2],
                    b_data_addr: a[3],
                    roll_counter_addr: a[4],
                    n_a,
                    n_b,
                    a_col: w[0],
                    group: w[1],
                    a_rows: [w[2], w[3], w[4], w[5]],
                })
            }
            Some(OPCODE_HACC) => Instr::Hacc(HaccInstr {
                tag: c.u32().ok_or_else(short)?,
                data: T::from_bits64(c.u64().ok_or_else(short)?),
                counter: c.u32().ok_or_else(short)?,
            }),
            Some(OPCODE_BARRIER) => Instr::Barrier {
                window: c.u32().ok_or_else(short)?,
            },
            Some(op) => return Err(corrupt(idx, format!("unknown opcode {op:#04x}"))),
            None => unreachable!("checked above"),
        };
        out.push(ins);
    }
    if c.pos != buf.len() {
        return Err(corrupt(records, "trailing bytes after the last record"));
    }
    Ok((layout, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_instr() -> impl Strategy<Value = Instr<f64>> {
        prop_oneof![
            (any::<u32>(), any::<f64>().prop_filter("finite", |v| v.is_finite()), any::<u32>())
                .prop_map(|(tag, data, counter)| Instr::Hacc(HaccInstr { tag, data, counter })),
            any::<u32>().prop_map(|window| Instr::Barrier { window }),
            (any::<[u64; 5]>(), 0u8..=4, 0u8..=4, any::<[u32; 6]>()).prop_map(|(a, n_a, n_b, w)| {
                Instr::Mmh4(Mmh4Instr {
                    opcode: OPCODE_MMH4,
                    base_addr: a[0],
                    a_data_addr: a[1],
                    b_col_ind_addr: a[2],
                    b_data_addr: a[3],
                    roll_counter_addr: a[4],
                    n_a,
                    n_b,
                    a_col: w[0],
                    group: w[1],
                    a_rows: [w[2], w[3], w[4], w[5]],
                })
            }),
        ]
    }

    proptest! {
        #[test]
        fn text_and_binary_round_trip(instrs in prop::collection::vec(arb_instr(), 0..40)) {
            let layout = TagLayout::new(12, 20).unwrap();
            let mut buf = Vec::new();
            write_trace(&mut buf, layout, &instrs).unwrap();
            let (l, back) = read_trace::<f64, _>(buf.as_slice()).unwrap();
            prop_assert_eq!(l, layout);
            prop_assert_eq!(&back, &instrs);
            let (l, back) = decode_binary::<f64>(&encode_binary(layout, &instrs)).unwrap();
            prop_assert_eq!(l, layout);
            prop_assert_eq!(back, instrs);
        }
    }

    #[test]
    fn empty_stream_is_header_only() {
        let mut buf = Vec::new();
        write_trace::<f64, _>(&mut buf, TagLayout::DEFAULT, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# neurasim-trace v1 records=0 layout=16/16\n");
    }

    #[test]
    fn errors() {
        let v2 = "# neurasim-trace v2 records=0 layout=16/16\n";
        assert_eq!(
            read_trace::<f64, _>(v2.as_bytes()),
            Err(IsaError::TraceVersion { found: 2, expected: 1 })
        );
        let short = "# neurasim-trace v1 records=2 layout=16/16\nBARRIER 0\n";
        assert_eq!(
            read_trace::<f64, _>(short.as_bytes()),
            Err(IsaError::TraceTruncated { expected: 2, found: 1 })
        );
        let bad = "# neurasim-trace v1 records=3 layout=16/16\nBARRIER 0\nHACC 0x1 1.0 2\nHACC zz 1 1\n";
        assert!(matches!(
            read_trace::<f64, _>(bad.as_bytes()),
            Err(IsaError::TraceCorrupt { record: 2, .. })
        ));
        let bin = encode_binary::<f64>(TagLayout::DEFAULT, &[Instr::Barrier { window: 1 }]);
        assert!(matches!(
            decode_binary::<f64>(&bin[..bin.len() - 1]),
            Err(IsaError::TraceCorrupt { record: 0, .. })
        ));
        assert!(matches!(
            decode_binary::<f64>(&bin[..bin.len() - 5]),
            Err(IsaError::TraceTruncated { expected: 1, found: 0 })
        ));
    }
}

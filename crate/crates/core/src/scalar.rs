// SPDX-License-Identifier: Apache-2.0

//! Scalar abstraction shared by every matrix type and kernel.
//!
//! Floating kernels run on `f64` (or `f32`); the exact "integer mode" used for
//! bitwise oracle checks runs the same code paths on `i64`, whose additions are
//! associative, so accumulation order across workers or hash engines cannot
//! change a result.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Num, NumAssign};

pub trait Scalar:
    Num + NumAssign + Copy + Send + Sync + Debug + Display + PartialOrd + FromStr + Default + 'static
{
    /// Short name used in file headers and reports.
    const KIND: &'static str;

    /// True when addition is associative (integer types).
    const EXACT: bool;

    /// Packs the value into a 64-bit cell for atomic storage.
    fn to_bits64(self) -> u64;
    fn from_bits64(bits: u64) -> Self;

    fn to_f64(self) -> f64;

    /// Converts from `f64`, rounding to nearest for integer types.
    fn from_f64(v: f64) -> Self;

    /// Parses a Matrix Market value token. Integer types accept integral
    /// real tokens such as `3.0`.
    fn parse_token(s: &str) -> Option<Self> {
        s.parse::<Self>().ok()
    }

    /// Shortest decimal text that parses back to the identical value.
    fn to_token(self) -> String {
        self.to_string()
    }

    fn relu(self) -> Self {
        if self > Self::zero() {
            self
        } else {
            Self::zero()
        }
    }

    fn abs_f64(self) -> f64 {
        self.to_f64().abs()
    }
}

impl Scalar for f64 {
    const KIND: &'static str = "f64";
    const EXACT: bool = false;

    fn to_bits64(self) -> u64 {
        self.to_bits()
    }
    fn from_bits64(bits: u64) -> Self {
        f64::from_bits(bits)
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_token(self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for f32 {
    const KIND: &'static str = "f32";
    const EXACT: bool = false;

    fn to_bits64(self) -> u64 {
        self.to_bits() as u64
    }
    fn from_bits64(bits: u64) -> Self {
        f32::from_bits(bits as u32)
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn to_token(self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for i64 {
    const KIND: &'static str = "i64";
    const EXACT: bool = true;

    fn to_bits64(self) -> u64 {
        self as u64
    }
    fn from_bits64(bits: u64) -> Self {
        bits as i64
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
    fn from_f64(v: f64) -> Self {
        v.round() as i64
    }
    fn parse_token(s: &str) -> Option<Self> {
        if let Ok(v) = s.parse::<i64>() {
            return Some(v);
        }
        let f = s.parse::<f64>().ok()?;
        (f.fract() == 0.0 && f.abs() < 9.0e15).then_some(f as i64)
    }
}

/// Relative difference used by the float tolerances: `|a-b| / max(|a|,|b|)`,
/// zero when both are zero.
pub fn rel_diff<T: Scalar>(a: T, b: T) -> f64 {
    let (a, b) = (a.to_f64(), b.to_f64());
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Reference kernels every other module is checked against: brute-force and
//! Gustavson SpGEMM, the symbolic pre-pass, bloat accounting, window planning
//! and the GCN layer workload.

mod bloat;
mod dense;
mod gcn;
mod gustavson;
mod primes;
mod symbolic;
mod windows;

pub use bloat::{bloat_report, BloatReport};
pub use dense::{dense_gemm, spgemm_dense_oracle};
pub use gcn::{gcn_layer_workload, random_gcn_instance, GcnInstance, GcnWorkload};
pub use gustavson::spgemm_gustavson;
pub use primes::{is_prime, next_prime, prev_prime};
pub use symbolic::{symbolic_pass, SymbolicPlan};
pub use windows::{
    interleave_order, plan_windows, plan_windows_ordered, RowClass, Window, WindowParams,
    WindowPlan,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("bloat undefined for an empty output")]
    UndefinedBloat,
    #[error("row {row} needs {required} hash lines, more than the scratchpad budget {budget}")]
    Capacity {
        row: usize,
        required: usize,
        budget: usize,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn check_inner(a: (usize, usize), b: (usize, usize)) -> Result<(), OracleError> {
    if a.1 != b.0 {
        return Err(OracleError::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

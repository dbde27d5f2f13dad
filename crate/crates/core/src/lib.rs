// SPDX-License-Identifier: Apache-2.0

//! Sparse-kernel stack and cycle-level simulator for a decoupled SpGEMM
//! accelerator built from multiplier cores, hash-accumulator memories and a
//! torus network.
//!
//! * [`matio`]: CSR/CSC/MAP-CSR/dense formats, Matrix Market I/O, R-MAT.
//! * [`oracle`]: reference SpGEMM, symbolic planning, bloat, GCN workloads.
//! * [`smash`]: multithreaded hash-based host SpGEMM.
//! * [`isa`]: MMH4/HACC instructions, lowering, traces, functional replay.
//! * [`mapping`]: HACC-to-memory and MMH4-to-core mapping strategies.
//! * [`uarch`]: core, memory, router and controller models.
//! * [`engine`]: the cycle loop, memory channels and statistics.

pub mod engine;
pub mod isa;
pub mod mapping;
pub mod matio;
pub mod oracle;
pub mod scalar;
pub mod smash;
pub mod uarch;

pub use scalar::Scalar;

pub type CooF64 = matio::CooMatrix<f64>;
pub type CooI64 = matio::CooMatrix<i64>;
pub type CsrF64 = matio::CsrMatrix<f64>;
pub type CsrI64 = matio::CsrMatrix<i64>;
pub type CsrF32 = matio::CsrMatrix<f32>;
pub type DenseF64 = matio::DenseMatrix<f64>;
pub type DenseI64 = matio::DenseMatrix<i64>;

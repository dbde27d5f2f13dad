// SPDX-License-Identifier: Apache-2.0

//! Every SpGEMM path against an independent dense product.

use neurasim::engine::{lower_for_chip, simulate, SimOptions};
use neurasim::isa::{decode_binary, encode_binary, read_trace, replay, write_trace};
use neurasim::mapping::{MapperConfig, Strategy as Placement};
use neurasim::matio::{CooMatrix, CsrMatrix, DenseMatrix};
use neurasim::oracle::{spgemm_gustavson, symbolic_pass};
use neurasim::smash::{smash_spgemm, SmashConfig, SmashVersion};
use neurasim::uarch::ChipConfig;
use proptest::prelude::*;

/// Plain triple loop, written out here so it shares nothing with the crate.
fn dense_product(a: &CsrMatrix<i64>, b: &CsrMatrix<i64>) -> Vec<Vec<i64>> {
    let (da, db) = (a.to_dense(), b.to_dense());
    let mut c = vec![vec![0i64; db.cols()]; da.rows()];
    for (i, row) in c.iter_mut().enumerate() {
        for k in 0..da.cols() {
            let x = da.get(i, k);
            if x == 0 {
                continue;
            }
            for (j, out) in row.iter_mut().enumerate() {
                *out += x * db.get(k, j);
            }
        }
    }
    c
}

fn as_rows(m: &CsrMatrix<i64>) -> Vec<Vec<i64>> {
    let d: DenseMatrix<i64> = m.to_dense();
    (0..d.rows()).map(|i| d.row(i).to_vec()).collect()
}

fn sparse(rows: usize, cols: usize) -> impl Strategy<Value = CsrMatrix<i64>> {
    prop::collection::vec((0..rows, 0..cols, -5i64..=5), 0..=rows * cols / 2).prop_map(move |e| {
        CooMatrix::from_entries(rows, cols, e).expect("in range").to_csr()
    })
}

fn operands() -> impl Strategy<Value = (CsrMatrix<i64>, CsrMatrix<i64>)> {
    (1usize..14, 1usize..14, 1usize..14).prop_flat_map(|(m, k, n)| (sparse(m, k), sparse(k, n)))
}

fn tile4() -> ChipConfig {
    ChipConfig::by_name("tile4").unwrap()
}

fn quiet() -> SimOptions {
    SimOptions {
        sample_every: 0,
        ..SimOptions::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn host_paths_match_dense((a, b) in operands()) {
        let want = dense_product(&a, &b);
        prop_assert_eq!(as_rows(&spgemm_gustavson(&a, &b).unwrap()), want.clone());
        for v in SmashVersion::ALL {
            let out = smash_spgemm(&a, &b, &SmashConfig::new(v, 3)).unwrap();
            prop_assert!(out.report.tokens.as_ref().is_none_or(|t| t.all_consumed_once()));
            prop_assert_eq!(out.report.atomicity_mismatched_rows, 0);
            prop_assert_eq!(as_rows(&out.c), want.clone(), "{}", v.name());
        }
    }

    #[test]
    fn lowered_program_replays_to_product((a, b) in operands()) {
        let program = lower_for_chip(&a, &b, &tile4()).unwrap();
        let plan = symbolic_pass(&a, &b).unwrap();
        let out = replay(&program).unwrap();
        prop_assert_eq!(out.haccs, plan.total_fma);
        prop_assert_eq!(out.barrier_flushes, 0);
        prop_assert_eq!(as_rows(&out.c), dense_product(&a, &b));
    }

    #[test]
    fn text_and_binary_traces_round_trip((a, b) in operands()) {
        let program = lower_for_chip(&a, &b, &tile4()).unwrap();
        let mut text = Vec::new();
        write_trace(&mut text, program.layout, &program.instrs).unwrap();
        let (layout, instrs) = read_trace::<i64, _>(text.as_slice()).unwrap();
        prop_assert_eq!(layout, program.layout);
        prop_assert_eq!(&instrs, &program.instrs);
        let (layout, instrs) = decode_binary::<i64>(&encode_binary(program.layout, &program.instrs)).unwrap();
        prop_assert_eq!(layout, program.layout);
        prop_assert_eq!(&instrs, &program.instrs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulated_chip_matches_dense((a, b) in operands(), strategy in 0usize..4) {
        let strategy = [Placement::Ring, Placement::Modular, Placement::DrhmLow, Placement::RandomTable][strategy];
        let program = lower_for_chip(&a, &b, &tile4()).unwrap();
        let plan = symbolic_pass(&a, &b).unwrap();
        let r = simulate(&tile4(), &program, MapperConfig::new(strategy, 1), quiet()).unwrap();
        prop_assert_eq!(r.stats.haccs, plan.total_fma);
        prop_assert_eq!(r.stats.mmh4_retired, program.mmh4_count() as u64);
        prop_assert_eq!(r.stats.hashpad_final_occupancy, 0);
        prop_assert_eq!(as_rows(&r.c), dense_product(&a, &b));
    }
}

#[test]
fn empty_operands_produce_empty_product() {
    let a = CooMatrix::<i64>::new(5, 3).unwrap().to_csr();
    let b = CooMatrix::<i64>::new(3, 4).unwrap().to_csr();
    let program = lower_for_chip(&a, &b, &tile4()).unwrap();
    assert_eq!(program.mmh4_count(), 0);
    let r = simulate(&tile4(), &program, MapperConfig::new(Placement::DrhmLow, 1), quiet()).unwrap();
    assert_eq!(as_rows(&r.c), vec![vec![0; 4]; 5]);
}

#[test]
fn cancelling_products_leave_no_entries() {
    // Row 0 of A times B sums 1*3 + 1*(-3) at (0, 0).
    let a = CooMatrix::from_entries(1, 2, [(0, 0, 1i64), (0, 1, 1)]).unwrap().to_csr();
    let b = CooMatrix::from_entries(2, 1, [(0, 0, 3i64), (1, 0, -3)]).unwrap().to_csr();
    let program = lower_for_chip(&a, &b, &tile4()).unwrap();
    let r = simulate(&tile4(), &program, MapperConfig::new(Placement::Ring, 1), quiet()).unwrap();
    assert_eq!(as_rows(&r.c), vec![vec![0]]);
}

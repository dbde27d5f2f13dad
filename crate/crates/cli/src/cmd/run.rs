// SPDX-License-Identifier: Apache-2.0

use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use neurasim::engine::{lower_for_chip, simulate, SimOptions};
use neurasim::isa::write_trace;
use neurasim::matio::write_matrix_market;
use neurasim::uarch::EvictionMode;
use neurasim::Scalar;

use crate::args::{Eviction, RunArgs, SimArgs};
use crate::error::{CliError, CliResult};
use crate::load::{chip_config, load_operands, mapper_config};
use crate::out;

pub fn sim_options(s: &SimArgs) -> SimOptions {
    SimOptions {
        mode: match s.eviction {
            Eviction::Rolling => EvictionMode::Rolling,
            Eviction::Barrier => EvictionMode::Barrier,
        },
        sample_every: s.sample_every,
        max_cycles: s.max_cycles,
    }
}

pub fn run(args: &RunArgs) -> CliResult<()> {
    if args.sim.integer_mode {
        run_typed::<i64>(args)
    } else {
        run_typed::<f64>(args)
    }
}

fn run_typed<T: Scalar>(args: &RunArgs) -> CliResult<()> {
    let cfg = chip_config(&args.sim.config)?;
    let mapper = mapper_config(&args.mapper)?;
    let (a, b) = load_operands::<T>(&args.source, args.mapper.seed)?;
    let program = lower_for_chip(&a.to_csr(), &b.to_csr(), &cfg)?;
    if let Some(p) = &args.emit_trace {
        let f = File::create(p).map_err(|e| CliError::io(p, e))?;
        write_trace(BufWriter::new(f), program.layout, &program.instrs).map_err(|e| CliError::io(p, e))?;
    }
    let t0 = Instant::now();
    let r = simulate(&cfg, &program, mapper, sim_options(&args.sim))?;
    let wall = t0.elapsed();
    out::write_sim(&args.out, &r)?;
    if let Some(p) = &args.emit_c {
        let f = File::create(p).map_err(|e| CliError::io(p, e))?;
        write_matrix_market(&r.c.to_coo(), BufWriter::new(f)).map_err(|e| CliError::io(p, e))?;
    }
    out::log_timing(&args.out, "run", wall, Some(r.stats.cycles))?;
    println!(
        "{}: {} cycles, {} MMH4, {} HACC, {} outputs -> {}",
        cfg.name,
        r.stats.cycles,
        r.stats.mmh4_retired,
        r.stats.haccs,
        r.stats.outputs,
        args.out.display()
    );
    Ok(())
}

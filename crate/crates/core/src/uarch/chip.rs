// SPDX-License-Identifier: Apache-2.0

use std::collections::VecDeque;
use std::sync::Arc;

use rayon::prelude::*;

use super::packet::{Endpoint, Packet};
use super::router::{decide, Dst, Move, NetView, Router, Src};
use super::topology::{NodeKind, Topology};
use super::{ChipConfig, ChipTotals, EvictionMode, MemController, NeuraCore, NeuraMem, UarchError, WritebackPath, WritebackRoute};
use crate::isa::TagLayout;
use crate::Scalar;

/// Components below this count step sequentially; rayon splitting costs
/// more than it saves on small chips.
const PAR_MIN: usize = 64;

#[derive(Debug, Clone)]
pub struct Chip<T> {
    pub cfg: ChipConfig,
    pub topo: Topology,
    pub routers: Vec<Router<T>>,
    pub cores: Vec<NeuraCore<T>>,
    pub mems: Vec<NeuraMem<T>>,
    pub mcs: Vec<MemController<T>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NetStep {
    pub link_moves: u64,
    pub ejected: u64,
    pub hops_delivered: u64,
}

pub fn build_chip<T: Scalar>(
    cfg: &ChipConfig,
    mode: EvictionMode,
    layout: TagLayout,
) -> Result<Chip<T>, UarchError> {
    let topo = Topology::build(cfg)?;
    let as_u32 = |v: &[usize]| Arc::new(v.iter().map(|&r| r as u32).collect::<Vec<u32>>());
    let core_routers = as_u32(&topo.core_router);
    let mem_routers = as_u32(&topo.mem_router);
    let mc_routers = as_u32(&topo.mc_router);
    let lanes = cfg.core.n_ports.max(cfg.mem.n_ports);
    let depth = cfg.port_buffer_depth;

    let mut routers: Vec<Router<T>> = (0..topo.n_routers())
        .map(|r| {
            let host = match topo.kinds[r] {
                NodeKind::Core(c) => Endpoint::Core(c as u32),
                NodeKind::Mem(m) => Endpoint::Mem(m as u32),
            };
            Router::new(r, depth, vec![host], lanes)
        })
        .collect();
    for (i, &r) in topo.mc_router.iter().enumerate() {
        routers[r].attach.push(Endpoint::Mc(i as u32));
    }

    let cores = topo
        .core_router
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            NeuraCore::new(
                i,
                r as u32,
                cfg.core,
                cfg.latencies,
                depth,
                mem_routers.clone(),
                mc_routers.clone(),
            )
        })
        .collect();
    let route = WritebackRoute {
        mc_routers: mc_routers.clone(),
        words_per_granule: (cfg.channel.granule_bytes / 8) as u32,
    };
    let mems = topo
        .mem_router
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            NeuraMem::new(
                i,
                r as u32,
                cfg.mem,
                cfg.latencies,
                cfg.full_parallel_compare,
                mode,
                layout,
                depth,
                route.clone(),
                cfg.writeback_path == WritebackPath::Dedicated,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mcs = topo
        .mc_router
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            MemController::new(
                i,
                r as u32,
                cfg.channel,
                cfg.mem.n_ports,
                depth,
                cfg.latencies.port,
                core_routers.clone(),
            )
        })
        .collect();
    Ok(Chip {
        cfg: cfg.clone(),
        topo,
        routers,
        cores,
        mems,
        mcs,
    })
}

impl<T: Scalar> NetView<T> for Chip<T> {
    fn router(&self, r: usize) -> &Router<T> {
        &self.routers[r]
    }

    fn out_ports(&self, e: Endpoint) -> &[VecDeque<Packet<T>>] {
        match e {
            Endpoint::Core(i) => &self.cores[i as usize].ports,
            Endpoint::Mem(i) => &self.mems[i as usize].ports,
            Endpoint::Mc(i) => &self.mcs[i as usize].ports,
        }
    }

    fn accept_free(&self, e: Endpoint) -> usize {
        match e {
            // Replies always have a register waiting for them.
            Endpoint::Core(_) => usize::MAX,
            Endpoint::Mem(i) => self.mems[i as usize].accept_free(),
            Endpoint::Mc(i) => self.mcs[i as usize].accept_free(),
        }
    }
}

impl<T: Scalar> Chip<T> {
    pub fn totals(&self) -> ChipTotals {
        self.cfg.totals()
    }

    /// Built component counts, for checking against the configuration.
    pub fn counted(&self) -> ChipTotals {
        let pipelines = self.cores.len() * self.cfg.core.n_pipelines;
        let engines = self.mems.len() * self.cfg.mem.hash_engines;
        let lines = self.mems.len() * self.cfg.mem.hashlines;
        ChipTotals {
            tiles: self.mcs.len(),
            cores: self.cores.len(),
            mems: self.mems.len(),
            routers: self.routers.len(),
            memory_controllers: self.mcs.len(),
            pipelines,
            multipliers: self.cores.len() * self.cfg.core.n_multipliers,
            hash_engines: engines,
            tag_comparators: engines * self.cfg.mem.tag_comparators_per_engine,
            hashlines: lines,
            hashpad_bytes: lines * self.cfg.mem.line_bytes,
            register_bits: pipelines * self.cfg.core.reg_bits_per_pipeline,
        }
    }

    pub fn flits_in_network(&self) -> usize {
        self.routers.iter().map(Router::buffered).sum()
    }

    pub fn hashpad_occupancy(&self) -> usize {
        self.mems.iter().map(NeuraMem::occupancy).sum()
    }

    /// Steps every core, memory and controller. Memories report the first
    /// error in id order.
    pub fn step_endpoints(&mut self, now: u64) -> Result<bool, UarchError> {
        let cores = if self.cores.len() >= PAR_MIN {
            self.cores.par_iter_mut().map(|c| c.step(now)).reduce(|| false, |a, b| a | b)
        } else {
            self.cores.iter_mut().fold(false, |a, c| c.step(now) | a)
        };
        let results: Vec<Result<bool, UarchError>> = if self.mems.len() >= PAR_MIN {
            self.mems.par_iter_mut().map(|m| m.step(now)).collect()
        } else {
            self.mems.iter_mut().map(|m| m.step(now)).collect()
        };
        let mut progress = cores;
        for r in results {
            progress |= r?;
        }
        for mc in &mut self.mcs {
            progress |= mc.step(now);
        }
        // Dedicated write-back wires: one cycle, bounded by the controller
        // queue.
        for m in 0..self.mems.len() {
            let Some(direct) = self.mems[m].direct.as_mut() else { continue };
            while let Some(&(mc, _)) = direct.front() {
                if self.mcs[mc].accept_free() == 0 {
                    break;
                }
                let (_, mut p) = direct.pop_front().expect("front");
                p.ready_at = now + 1;
                self.mcs[mc].inbox.push_back(p);
                progress = true;
            }
        }
        Ok(progress)
    }

    /// Routers decide in parallel, then moves apply in router order.
    pub fn step_network(&mut self, now: u64) -> NetStep {
        let n = self.routers.len();
        let moves: Vec<Vec<Move>> = {
            let view: &Self = self;
            if n >= PAR_MIN {
                (0..n).into_par_iter().map(|r| decide(view, &view.topo, r, now)).collect()
            } else {
                (0..n).map(|r| decide(view, &view.topo, r, now)).collect()
            }
        };
        let hop = self.cfg.latencies.hop;
        let mut out = NetStep::default();
        for (r, ms) in moves.into_iter().enumerate() {
            for m in ms {
                let mut p = match m.src {
                    Src::Link { dir, vn } => self.routers[r].inq[dir][vn].pop_front(),
                    Src::Local { attach, port } => match self.routers[r].attach[attach] {
                        Endpoint::Core(i) => self.cores[i as usize].ports[port].pop_front(),
                        Endpoint::Mem(i) => self.mems[i as usize].ports[port].pop_front(),
                        Endpoint::Mc(i) => self.mcs[i as usize].ports[port].pop_front(),
                    },
                }
                .expect("decided move has a packet");
                match m.dst {
                    Dst::Link(dir) => {
                        p.hops += 1;
                        p.ready_at = now + hop;
                        let vn = p.vn();
                        let nb = self.topo.neighbor(r, dir);
                        let q = &mut self.routers[nb].inq[dir][vn];
                        q.push_back(p);
                        debug_assert!(q.len() <= self.routers[nb].depth, "router buffer overflow");
                        out.link_moves += 1;
                    }
                    Dst::Eject(a) => {
                        p.ready_at = now + self.cfg.latencies.port;
                        out.ejected += 1;
                        out.hops_delivered += p.hops as u64;
                        match self.routers[r].attach[a] {
                            Endpoint::Core(i) => self.cores[i as usize].inbox.push_back(p),
                            Endpoint::Mem(i) => self.mems[i as usize].inbox.push_back(p),
                            Endpoint::Mc(i) => self.mcs[i as usize].inbox.push_back(p),
                        }
                    }
                }
            }
        }
        out
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Torus router: per-direction, per-network input buffers, one flit per
//! output link per cycle, bubble flow control on every ring.
//!
//! A cycle is split in two. `decide` only reads state (its own buffers, the
//! neighbours' buffer levels and the attached endpoints' port queues), so all
//! routers can decide in parallel; the chip then applies the moves in router
//! order.

use std::collections::VecDeque;

use super::packet::{Endpoint, Packet, N_VNS};
use super::topology::{is_x, RouteChoice, Topology, N_DIRS};

/// What a router needs to see of the rest of the chip.
pub trait NetView<T> {
    fn router(&self, r: usize) -> &Router<T>;
    fn out_ports(&self, e: Endpoint) -> &[VecDeque<Packet<T>>];
    /// Packets the endpoint can take from the network this cycle.
    fn accept_free(&self, e: Endpoint) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Src {
    /// Input buffer holding packets that arrived travelling in `dir`.
    Link { dir: usize, vn: usize },
    Local { attach: usize, port: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dst {
    Link(usize),
    Eject(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub src: Src,
    pub dst: Dst,
}

#[derive(Debug, Clone)]
pub struct Router<T> {
    pub id: usize,
    /// `inq[dir][vn]`, indexed by the direction the packets were travelling.
    pub inq: [[VecDeque<Packet<T>>; N_VNS]; N_DIRS],
    pub depth: usize,
    pub attach: Vec<Endpoint>,
    /// Packets each attachment may receive per cycle.
    pub eject_lanes: usize,
}

impl<T> Router<T> {
    pub fn new(id: usize, depth: usize, attach: Vec<Endpoint>, eject_lanes: usize) -> Self {
        assert!(attach.len() <= MAX_ATTACH, "router {id}: too many endpoints");
        Self {
            id,
            inq: Default::default(),
            depth,
            attach,
            eject_lanes,
        }
    }

    pub fn free(&self, dir: usize, vn: usize) -> usize {
        self.depth - self.inq[dir][vn].len()
    }

    pub fn buffered(&self) -> usize {
        self.inq.iter().flatten().map(VecDeque::len).sum()
    }

    fn attach_index(&self, e: Endpoint) -> usize {
        self.attach
            .iter()
            .position(|&a| a == e)
            .expect("packet routed to a router its endpoint is not attached to")
    }
}

/// Most endpoints a router can serve.
pub const MAX_ATTACH: usize = 8;

/// Chooses this cycle's moves for router `r`.
pub fn decide<T, V: NetView<T>>(view: &V, topo: &Topology, r: usize, now: u64) -> Vec<Move> {
    let me = view.router(r);
    let n_link = N_DIRS * N_VNS;
    let mut local_ports = [0usize; MAX_ATTACH];
    let mut idle = me.inq.iter().flatten().all(VecDeque::is_empty);
    for (a, &e) in me.attach.iter().enumerate() {
        let ports = view.out_ports(e);
        local_ports[a] = ports.len();
        idle &= ports.iter().all(VecDeque::is_empty);
    }
    if idle {
        return Vec::new();
    }
    let n_sources = n_link + local_ports[..me.attach.len()].iter().sum::<usize>();
    let source = |mut i: usize| {
        if i < n_link {
            return Src::Link { dir: i / N_VNS, vn: i % N_VNS };
        }
        i -= n_link;
        let mut attach = 0;
        while i >= local_ports[attach] {
            i -= local_ports[attach];
            attach += 1;
        }
        Src::Local { attach, port: i }
    };
    let start = (now % n_sources as u64) as usize;

    let mut link_used = [false; N_DIRS];
    let mut ejected = [0usize; MAX_ATTACH];
    let mut eject_cap = [0usize; MAX_ATTACH];
    for (a, &e) in me.attach.iter().enumerate() {
        eject_cap[a] = view.accept_free(e).min(me.eject_lanes);
    }
    let mut moves = Vec::new();

    for i in (start..n_sources).chain(0..start) {
        let src = source(i);
        let pkt = match src {
            Src::Link { dir, vn } => me.inq[dir][vn].front(),
            Src::Local { attach, port } => view.out_ports(me.attach[attach])[port].front(),
        };
        let Some(pkt) = pkt.filter(|p| p.ready_at <= now) else {
            continue;
        };
        if pkt.dst_router as usize == r {
            let a = me.attach_index(pkt.dst);
            if ejected[a] < eject_cap[a] {
                ejected[a] += 1;
                moves.push(Move {
                    src,
                    dst: Dst::Eject(a),
                });
            }
            continue;
        }
        let vn = pkt.vn();
        let need = |out: usize| match src {
            Src::Link { dir, .. } if is_x(dir) == is_x(out) => 1,
            _ => 2,
        };
        let free_at = |out: usize| view.router(topo.neighbor(r, out)).free(out, vn);
        let ok = |out: usize| !link_used[out] && free_at(out) >= need(out);
        let pick = match topo.route(r, pkt.dst_router as usize) {
            RouteChoice::Arrived => unreachable!("dst_router checked above"),
            RouteChoice::One(d) => ok(d).then_some(d),
            RouteChoice::Either(a, b) => match (ok(a), ok(b)) {
                (true, true) => Some(if free_at(b) > free_at(a) { b } else { a }),
                (true, false) => Some(a),
                (false, true) => Some(b),
                (false, false) => None,
            },
        };
        if let Some(out) = pick {
            link_used[out] = true;
            moves.push(Move {
                src,
                dst: Dst::Link(out),
            });
        }
    }
    moves
}

// SPDX-License-Identifier: Apache-2.0

//! Checkerboard placement on a 2D torus.
//!
//! Routers are numbered `y * width + x`. Cores sit on routers with `x + y`
//! even, memories on the odd ones; core and memory ids follow router order.
//! Each tile's memory controller shares the router nearest the centre of the
//! tile block.

use serde::{Deserialize, Serialize};

use super::{ChipConfig, UarchError};

/// Output/input link directions.
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;
pub const N_DIRS: usize = 4;

pub fn opposite(dir: usize) -> usize {
    dir ^ 1
}

pub fn is_x(dir: usize) -> bool {
    dir < 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Core(usize),
    Mem(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub width: usize,
    pub height: usize,
    pub kinds: Vec<NodeKind>,
    pub core_router: Vec<usize>,
    pub mem_router: Vec<usize>,
    pub mc_router: Vec<usize>,
    pub tile_of_router: Vec<usize>,
}

impl Topology {
    pub fn build(cfg: &ChipConfig) -> Result<Self, UarchError> {
        cfg.validate()?;
        let (w, h) = (cfg.grid_width, cfg.grid_height);
        let (bw, bh) = (cfg.tile_width(), cfg.tile_height());
        let mut kinds = Vec::with_capacity(w * h);
        let mut core_router = Vec::new();
        let mut mem_router = Vec::new();
        let mut tile_of_router = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let r = y * w + x;
                if (x + y) % 2 == 0 {
                    kinds.push(NodeKind::Core(core_router.len()));
                    core_router.push(r);
                } else {
                    kinds.push(NodeKind::Mem(mem_router.len()));
                    mem_router.push(r);
                }
                tile_of_router.push((y / bh) * cfg.tile_cols + x / bw);
            }
        }
        let mut per_tile = vec![(0usize, 0usize); cfg.n_tiles];
        for (r, k) in kinds.iter().enumerate() {
            let t = &mut per_tile[tile_of_router[r]];
            match k {
                NodeKind::Core(_) => t.0 += 1,
                NodeKind::Mem(_) => t.1 += 1,
            }
        }
        if per_tile
            .iter()
            .any(|&(c, m)| c != cfg.cores_per_tile || m != cfg.mems_per_tile)
        {
            return Err(UarchError::Config(format!(
                "checkerboard placement gives per-tile (cores, mems) {per_tile:?}"
            )));
        }
        let mc_router = (0..cfg.n_tiles)
            .map(|t| {
                let (tx, ty) = (t % cfg.tile_cols, t / cfg.tile_cols);
                (ty * bh + bh / 2) * w + tx * bw + bw / 2
            })
            .collect();
        Ok(Self {
            width: w,
            height: h,
            kinds,
            core_router,
            mem_router,
            mc_router,
            tile_of_router,
        })
    }

    pub fn n_routers(&self) -> usize {
        self.width * self.height
    }

    pub fn coords(&self, r: usize) -> (usize, usize) {
        (r % self.width, r / self.width)
    }

    pub fn neighbor(&self, r: usize, dir: usize) -> usize {
        let (x, y) = self.coords(r);
        let (w, h) = (self.width, self.height);
        let (nx, ny) = match dir {
            EAST => ((x + 1) % w, y),
            WEST => ((x + w - 1) % w, y),
            NORTH => (x, (y + 1) % h),
            _ => (x, (y + h - 1) % h),
        };
        ny * w + nx
    }

    /// Torus hop distance.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let ((ax, ay), (bx, by)) = (self.coords(a), self.coords(b));
        ring_distance(ax, bx, self.width) + ring_distance(ay, by, self.height)
    }

    /// Minimal dimension-ordered next hops from `at` toward `dst`: X first,
    /// then Y. Two entries when both ways round the ring are equally short.
    /// Empty when `at == dst`.
    pub fn route(&self, at: usize, dst: usize) -> RouteChoice {
        let ((ax, ay), (dx, dy)) = (self.coords(at), self.coords(dst));
        if ax != dx {
            ring_choice(ax, dx, self.width, EAST, WEST)
        } else if ay != dy {
            ring_choice(ay, dy, self.height, NORTH, SOUTH)
        } else {
            RouteChoice::Arrived
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteChoice {
    Arrived,
    One(usize),
    Either(usize, usize),
}

fn ring_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

fn ring_choice(from: usize, to: usize, n: usize, up: usize, down: usize) -> RouteChoice {
    let fwd = (to + n - from) % n;
    let back = n - fwd;
    match fwd.cmp(&back) {
        std::cmp::Ordering::Less => RouteChoice::One(up),
        std::cmp::Ordering::Greater => RouteChoice::One(down),
        std::cmp::Ordering::Equal => RouteChoice::Either(up, down),
    }
}

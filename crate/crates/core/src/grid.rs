//! Cell-level Dijkstra distance fields used as heuristics.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::ops::Add;

use crate::domain::{CostTable, Terrain, World};
use crate::state::{AnyState, Cost, LdState, Stance, HEADING_OFFSETS};

/// Single-source-set Dijkstra over nodes `0..n`. `neighbors(u, out)` pushes
/// `(v, c)` pairs meaning that `v` can be reached from `u` at cost `c`.
pub fn dijkstra<T, F>(n: usize, sources: &[(usize, T)], mut neighbors: F) -> Vec<Option<T>>
where
    T: Copy + Ord + Add<Output = T>,
    F: FnMut(usize, &mut Vec<(usize, T)>),
{
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    for &(s, d) in sources {
        if dist[s].is_none_or(|old| d < old) {
            dist[s] = Some(d);
            heap.push(Reverse((d, s)));
        }
    }
    let mut buf = Vec::new();
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u] != Some(d) {
            continue;
        }
        buf.clear();
        neighbors(u, &mut buf);
        for &(v, c) in &buf {
            let nd = d + c;
            if dist[v].is_none_or(|old| nd < old) {
                dist[v] = Some(nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// Distance to a goal for every cell of a world; `None` is unreachable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    dist: Vec<Option<Cost>>,
}

impl DistanceField {
    pub fn get(&self, x: i32, y: i32) -> Option<Cost> {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return None;
        }
        self.dist[y as usize * self.width + x as usize]
    }

    pub fn at(&self, cell: (i32, i32)) -> Option<Cost> {
        self.get(cell.0, cell.1)
    }

    pub fn values(&self) -> &[Option<Cost>] {
        &self.dist
    }
}

/// Dijkstra from `goal` where `step(from, to, diagonal)` prices a move
/// between adjacent cells (`None` forbids it). Edge prices must be
/// symmetric; the field is computed outward from the goal.
pub fn cell_field<F>(w: &World, goal: (i32, i32), step: F) -> DistanceField
where
    F: Fn((i32, i32), (i32, i32), bool) -> Option<Cost>,
{
    let n = w.cell_count();
    let sources: Vec<(usize, Cost)> = if w.in_bounds(goal.0, goal.1) {
        vec![(w.index(goal.0, goal.1).expect("cell in bounds"), 0)]
    } else {
        Vec::new()
    };
    let dist = dijkstra(n, &sources, |u, out| {
        let (x, y) = w.coords(u);
        for (i, &(dx, dy)) in HEADING_OFFSETS.iter().enumerate() {
            let (nx, ny) = (x + dx, y + dy);
            if !w.in_bounds(nx, ny) {
                continue;
            }
            if let Some(c) = step((nx, ny), (x, y), i % 2 == 1) {
                out.push((w.index(nx, ny).expect("cell in bounds"), c));
            }
        }
    });
    DistanceField {
        width: w.width(),
        height: w.height(),
        dist,
    }
}

/// Admissible lower bound on the cost to reach `goal` in any representation
/// of the adaptive graph. Moves touching LOW are crawled along cardinal
/// directions; moves touching RUBBLE are at least a walk step or a rubble
/// sub-step; other moves cost at least the cheaper locomotion step.
pub fn lower_bound_field(w: &World, c: &CostTable, goal: (i32, i32)) -> DistanceField {
    cell_field(w, goal, |a, b, diagonal| {
        let (ta, tb) = (w.terrain(a.0, a.1), w.terrain(b.0, b.1));
        if ta == Terrain::Wall || tb == Terrain::Wall {
            return None;
        }
        if ta == Terrain::Low || tb == Terrain::Low {
            return (!diagonal).then_some(c.crawl_step);
        }
        if ta == Terrain::Rubble || tb == Terrain::Rubble {
            return Some(c.walk_step.min(c.rubble_substep));
        }
        Some(c.walk_step.min(c.crawl_step))
    })
}

/// Distance for the WALK representation: 8-connected over standable cells.
pub fn walk_field(w: &World, c: &CostTable, goal: (i32, i32)) -> DistanceField {
    cell_field(w, goal, |a, b, _| {
        (w.admits(a.0, a.1, Stance::Stand) && w.admits(b.0, b.1, Stance::Stand)).then_some(c.walk_step)
    })
}

/// Distance for the CRAWL representation: 4-connected over crouchable cells.
pub fn crawl_field(w: &World, c: &CostTable, goal: (i32, i32)) -> DistanceField {
    cell_field(w, goal, |a, b, diagonal| {
        (!diagonal && w.admits(a.0, a.1, Stance::Crouch) && w.admits(b.0, b.1, Stance::Crouch)).then_some(c.crawl_step)
    })
}

/// Uniform per-move cost over non-WALL cells that satisfy `allowed`.
pub fn uniform_field<P>(w: &World, goal: (i32, i32), per_move: Cost, allowed: P) -> DistanceField
where
    P: Fn(i32, i32) -> bool,
{
    cell_field(w, goal, |a, b, _| {
        let ok = |(x, y): (i32, i32)| w.terrain(x, y) != Terrain::Wall && allowed(x, y);
        (ok(a) && ok(b)).then_some(per_move)
    })
}

/// Locomotion-mode aware distance: Dijkstra over (cell, stance) pairs where
/// standing moves use walk or rubble costs, crouched moves crawl
/// 4-connected, and the mode may switch on FREE cells.
#[derive(Debug, Clone)]
pub struct ModeField {
    width: usize,
    stand: Vec<Option<Cost>>,
    crouch: Vec<Option<Cost>>,
}

impl ModeField {
    pub fn new(w: &World, c: &CostTable, goal: (i32, i32)) -> Self {
        Self::within(w, c, goal, |_, _| true)
    }

    /// Same field with movement confined to cells satisfying `allowed`.
    pub fn within<P>(w: &World, c: &CostTable, goal: (i32, i32), allowed: P) -> Self
    where
        P: Fn(i32, i32) -> bool,
    {
        let n = w.cell_count();
        let mut sources = Vec::new();
        if w.in_bounds(goal.0, goal.1) {
            let g = w.index(goal.0, goal.1).expect("cell in bounds");
            sources.push((g, 0));
            sources.push((n + g, 0));
        }
        let switch = c.rep_switch.min(c.stance_change);
        let dist = dijkstra(2 * n, &sources, |u, out| {
            let crouched = u >= n;
            let (x, y) = w.coords(u % n);
            let stance = if crouched { Stance::Crouch } else { Stance::Stand };
            if !w.admits(x, y, stance) || !allowed(x, y) {
                return;
            }
            for (i, &(dx, dy)) in HEADING_OFFSETS.iter().enumerate() {
                let (nx, ny) = (x + dx, y + dy);
                if !w.admits(nx, ny, stance) || !allowed(nx, ny) || (crouched && i % 2 == 1) {
                    continue;
                }
                let cost = if crouched {
                    c.crawl_step
                } else if w.terrain(x, y) == Terrain::Rubble || w.terrain(nx, ny) == Terrain::Rubble {
                    c.rubble_substep
                } else {
                    c.walk_step
                };
                let base = if crouched { n } else { 0 };
                out.push((base + w.index(nx, ny).expect("cell in bounds"), cost));
            }
            if w.terrain(x, y) == Terrain::Free {
                let other = if crouched { u - n } else { u + n };
                out.push((other, switch));
            }
        });
        let (stand, crouch) = dist.split_at(n);
        Self {
            width: w.width(),
            stand: stand.to_vec(),
            crouch: crouch.to_vec(),
        }
    }

    pub fn get(&self, x: i32, y: i32, stance: Stance) -> Option<Cost> {
        if x < 0 || y < 0 || x as usize >= self.width {
            return None;
        }
        let i = y as usize * self.width + x as usize;
        match stance {
            Stance::Stand => self.stand.get(i).copied().flatten(),
            Stance::Crouch => self.crouch.get(i).copied().flatten(),
        }
    }

    pub fn estimate(&self, s: &AnyState) -> Option<Cost> {
        let (x, y) = s.cell();
        match s {
            AnyState::Hd(h) => self.get(x, y, h.stance),
            AnyState::Ld(LdState::Walk { .. }) => self.get(x, y, Stance::Stand),
            AnyState::Ld(LdState::Crawl { .. }) => self.get(x, y, Stance::Crouch),
        }
    }
}

//! Brute-force Dijkstra over explicit state graphs, used to certify search
//! results on small maps.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::domain::{executable_macro_successors, hd_successors, hd_valid, ld_successors, ld_valid, CostTable, World};
use crate::graph::AdaptiveGraph;
use crate::mrmha::SearchGraph;
use crate::path::Path;
use crate::state::{AnyState, Cost, HdState, LdState, RepId, Stance, Transition, HEADINGS, PHASES};

/// Full-body primitives, optionally extended with executable macros.
#[derive(Debug, Clone, Copy)]
pub struct HdGraph<'w> {
    pub world: &'w World,
    pub costs: CostTable,
    pub macros: bool,
}

impl SearchGraph for HdGraph<'_> {
    fn successors(&self, s: &AnyState, out: &mut Vec<Transition>) {
        let AnyState::Hd(h) = s else { return };
        out.extend(hd_successors(self.world, &self.costs, h));
        if self.macros {
            out.extend(executable_macro_successors(self.world, &self.costs, h));
        }
    }
}

/// Primitives of a single low-dimensional representation.
#[derive(Debug, Clone, Copy)]
pub struct LdGraph<'w> {
    pub world: &'w World,
    pub costs: CostTable,
}

impl SearchGraph for LdGraph<'_> {
    fn successors(&self, s: &AnyState, out: &mut Vec<Transition>) {
        let AnyState::Ld(l) = s else { return };
        out.extend(ld_successors(self.world, &self.costs, l));
    }
}

impl SearchGraph for AdaptiveGraph<'_> {
    fn successors(&self, s: &AnyState, out: &mut Vec<Transition>) {
        if let Ok(succ) = self.ad_successors(s) {
            out.extend(succ);
        }
    }
}

/// Optimal cost from any of `sources` to every reachable state.
pub fn distances(graph: &dyn SearchGraph, sources: &[AnyState]) -> HashMap<AnyState, Cost> {
    let mut dist: HashMap<AnyState, Cost> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist.insert(s, 0).is_none() {
            heap.push(Reverse((0, s)));
        }
    }
    let mut buf = Vec::new();
    while let Some(Reverse((d, s))) = heap.pop() {
        if dist.get(&s).is_some_and(|&best| best < d) {
            continue;
        }
        buf.clear();
        graph.successors(&s, &mut buf);
        for t in &buf {
            let nd = d + t.cost;
            if dist.get(&t.to).is_none_or(|&old| nd < old) {
                dist.insert(t.to, nd);
                heap.push(Reverse((nd, t.to)));
            }
        }
    }
    dist
}

/// Optimal cost from any of `sources` to the nearest state satisfying `goal`.
pub fn shortest(graph: &dyn SearchGraph, sources: &[AnyState], goal: &dyn Fn(&AnyState) -> bool) -> Option<Cost> {
    optimal_path(graph, sources, goal).map(|p| p.cost())
}

/// An optimal path from one of `sources` to the nearest goal state. Ties are
/// broken by state order, so the result is deterministic.
pub fn optimal_path(graph: &dyn SearchGraph, sources: &[AnyState], goal: &dyn Fn(&AnyState) -> bool) -> Option<Path> {
    let mut dist: HashMap<AnyState, Cost> = HashMap::new();
    let mut parent: HashMap<AnyState, Transition> = HashMap::new();
    let mut heap = BinaryHeap::new();
    for &s in sources {
        if dist.insert(s, 0).is_none() {
            heap.push(Reverse((0, s)));
        }
    }
    let mut buf = Vec::new();
    while let Some(Reverse((d, s))) = heap.pop() {
        if dist.get(&s).is_some_and(|&best| best < d) {
            continue;
        }
        if goal(&s) {
            let mut edges = Vec::new();
            let mut at = s;
            while let Some(t) = parent.get(&at) {
                edges.push(*t);
                at = t.from;
            }
            edges.reverse();
            return Some(Path { start: at, edges });
        }
        buf.clear();
        graph.successors(&s, &mut buf);
        for t in &buf {
            let nd = d + t.cost;
            if dist.get(&t.to).is_none_or(|&old| nd < old) {
                dist.insert(t.to, nd);
                parent.insert(t.to, *t);
                heap.push(Reverse((nd, t.to)));
            }
        }
    }
    None
}

/// Every valid full-body state of `w`.
pub fn all_hd_states(w: &World) -> Vec<HdState> {
    let mut out = Vec::new();
    for (x, y) in w.cells() {
        for stance in [Stance::Stand, Stance::Crouch] {
            for theta in 0..HEADINGS {
                for phase in 0..PHASES {
                    let s = HdState::new(x, y, theta, stance, phase);
                    if hd_valid(w, &s) {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// Every valid state of one low-dimensional representation.
pub fn all_ld_states(w: &World, rep: RepId) -> Vec<LdState> {
    let mut out = Vec::new();
    for (x, y) in w.cells() {
        match rep {
            RepId::Walk => out.extend((0..HEADINGS).map(|t| LdState::walk(x, y, t))),
            RepId::Crawl => out.push(LdState::crawl(x, y)),
            RepId::Hd => panic!("not a low-dimensional representation"),
        }
    }
    out.retain(|l| ld_valid(w, l));
    out
}

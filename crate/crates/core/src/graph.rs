//! Projections between representations and the adaptive graph.
//!
//! The adaptive graph keeps low-dimensional states everywhere except inside
//! HD regions, where full-body states replace them. Successors are built
//! per source kind:
//!
//! * full-body source: each primitive whose target lies inside a region is
//!   kept; targets outside all regions are projected into every
//!   representation in which they are valid, carrying the primitive's cost
//!   plus the projection surcharge;
//! * low-dimensional source: primitives of its own representation are kept
//!   when the target is outside all regions and replaced by the nominal
//!   full-body preimages of the target otherwise; full-body primitives seeded
//!   from the nominal preimages of the source are kept when they land inside
//!   a region; REP_SWITCH successors connect WALK and CRAWL.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    hd_successors, hd_valid, ld_successors, ld_valid, special_projection_successors, CostTable, World,
};
use crate::state::{AnyState, HdState, LdState, RepId, Stance, Transition, TransitionKind, HEADINGS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("state {0} is not a member of the adaptive state space")]
    NotMember(AnyState),
}

/// Project a full-body state into low-dimensional representation `rep`.
///
/// # Panics
/// When `rep` is [`RepId::Hd`]; projecting onto the full-body space is the
/// identity and callers must not request it.
pub fn project(rep: RepId, s: &HdState) -> LdState {
    match rep {
        RepId::Walk => LdState::walk(s.x, s.y, s.theta),
        RepId::Crawl => LdState::crawl(s.x, s.y),
        RepId::Hd => panic!("projection onto the full-body representation requested"),
    }
}

/// Nominal full-body configurations of a low-dimensional state, restricted to
/// those valid on `w`. WALK maps to the standing phase-0 pose with the same
/// heading; CRAWL maps to the crouched phase-0 pose in every heading.
pub fn inverse_project(w: &World, rep: RepId, l: &LdState) -> Vec<HdState> {
    debug_assert_eq!(rep, l.rep());
    let candidates: Vec<HdState> = match *l {
        LdState::Walk { x, y, theta } => vec![HdState::new(x, y, theta, Stance::Stand, 0)],
        LdState::Crawl { x, y } => (0..HEADINGS)
            .map(|theta| HdState::new(x, y, theta, Stance::Crouch, 0))
            .collect(),
    };
    candidates.into_iter().filter(|h| hd_valid(w, h)).collect()
}

/// Map between two low-dimensional representations through their shared
/// full-body preimages: `{ project(j, h) : h in inverse_project(i, s) }`,
/// keeping only images that are valid states of `j`.
pub fn cross_project(w: &World, i: RepId, j: RepId, s: &LdState) -> Vec<LdState> {
    assert!(i != j && i.is_low_dimensional() && j.is_low_dimensional());
    let mut out: Vec<LdState> = inverse_project(w, i, s)
        .iter()
        .map(|h| project(j, h))
        .filter(|l| ld_valid(w, l))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Chebyshev ball of cells in which full-body planning is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HdRegion {
    pub x: i32,
    pub y: i32,
    pub radius: u32,
}

impl HdRegion {
    pub fn new(x: i32, y: i32, radius: u32) -> Self {
        Self { x, y, radius }
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        chebyshev((self.x, self.y), (x, y)) <= self.radius as i32
    }
}

pub fn chebyshev(a: (i32, i32), b: (i32, i32)) -> i32 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

/// One immutable instance of the adaptive graph. Adding a region yields a new
/// instance.
#[derive(Debug, Clone)]
pub struct AdaptiveGraph<'w> {
    world: &'w World,
    costs: CostTable,
    regions: Vec<HdRegion>,
}

impl<'w> AdaptiveGraph<'w> {
    pub fn new(world: &'w World, costs: CostTable, regions: Vec<HdRegion>) -> Self {
        Self { world, costs, regions }
    }

    pub fn world(&self) -> &'w World {
        self.world
    }

    pub fn costs(&self) -> &CostTable {
        &self.costs
    }

    pub fn regions(&self) -> &[HdRegion] {
        &self.regions
    }

    pub fn reps(&self) -> [RepId; 3] {
        RepId::ALL
    }

    pub fn in_hd_region(&self, x: i32, y: i32) -> bool {
        in_regions(&self.regions, x, y)
    }

    pub fn add_hd_region(&self, r: HdRegion) -> AdaptiveGraph<'w> {
        let mut regions = self.regions.clone();
        regions.push(r);
        AdaptiveGraph {
            world: self.world,
            costs: self.costs,
            regions,
        }
    }

    /// Whether `s` belongs to the adaptive state space: full-body states
    /// inside regions, low-dimensional states outside.
    pub fn is_member(&self, s: &AnyState) -> bool {
        let (x, y) = s.cell();
        match s {
            AnyState::Hd(_) => self.in_hd_region(x, y),
            AnyState::Ld(_) => !self.in_hd_region(x, y),
        }
    }

    /// The adaptive-space image of a full-body state: itself inside a region,
    /// otherwise its projection into the representation native to its stance.
    pub fn image_of(&self, s: &HdState) -> AnyState {
        if self.in_hd_region(s.x, s.y) {
            AnyState::Hd(*s)
        } else {
            AnyState::Ld(project(s.stance.native_rep(), s))
        }
    }

    pub fn ad_successors(&self, s: &AnyState) -> Result<Vec<Transition>, GraphError> {
        if !self.is_member(s) {
            return Err(GraphError::NotMember(*s));
        }
        let mut out = Vec::new();
        match s {
            AnyState::Hd(h) => self.hd_source(h, &mut out),
            AnyState::Ld(l) => self.ld_source(l, &mut out),
        }
        Ok(canonicalize(out))
    }

    fn hd_source(&self, h: &HdState, out: &mut Vec<Transition>) {
        for t in hd_successors(self.world, &self.costs, h) {
            let AnyState::Hd(to) = t.to else { unreachable!() };
            if self.in_hd_region(to.x, to.y) {
                out.push(t);
            } else {
                for rep in RepId::LOW_DIMENSIONAL {
                    let l = project(rep, &to);
                    if ld_valid(self.world, &l) {
                        out.push(Transition::new(
                            *h,
                            l,
                            t.cost + self.costs.projection,
                            TransitionKind::Projection,
                        ));
                    }
                }
            }
        }
    }

    fn ld_source(&self, l: &LdState, out: &mut Vec<Transition>) {
        let rep = l.rep();
        for t in ld_successors(self.world, &self.costs, l) {
            let (x, y) = t.to.cell();
            if !self.in_hd_region(x, y) {
                out.push(t);
                continue;
            }
            let AnyState::Ld(target) = t.to else { unreachable!() };
            for h in inverse_project(self.world, rep, &target) {
                out.push(Transition::new(
                    *l,
                    h,
                    t.cost + self.costs.projection,
                    TransitionKind::Projection,
                ));
            }
        }
        for seed in inverse_project(self.world, rep, l) {
            for t in hd_successors(self.world, &self.costs, &seed) {
                let (x, y) = t.to.cell();
                if self.in_hd_region(x, y) {
                    out.push(Transition::new(*l, t.to, t.cost, TransitionKind::HdPrimitive));
                }
            }
        }
        out.extend(special_projection_successors(self.world, &self.costs, l));
    }
}

pub fn in_regions(regions: &[HdRegion], x: i32, y: i32) -> bool {
    regions.iter().any(|r| r.contains(x, y))
}

/// Deduplicate by `(target, kind)` keeping the cheapest edge, then order by
/// `(kind, rep, x, y, theta, stance, phase)`.
fn canonicalize(edges: Vec<Transition>) -> Vec<Transition> {
    type SortKey = (RepId, i32, i32, u8, u8, u8);
    let mut best: BTreeMap<(TransitionKind, SortKey), Transition> = BTreeMap::new();
    for t in edges {
        best.entry((t.kind, t.to.sort_key()))
            .and_modify(|e| {
                if t.cost < e.cost {
                    *e = t;
                }
            })
            .or_insert(t);
    }
    best.into_values().collect()
}

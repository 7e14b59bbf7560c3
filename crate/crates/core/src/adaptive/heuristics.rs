use crate::domain::{CostTable, GoalSpec, World};
use crate::egraph::EGraphHeuristic;
use crate::grid::{crawl_field, lower_bound_field, walk_field, DistanceField, ModeField};
use crate::mrmha::{init_heuristic_lists, Heuristic, HeuristicLists};
use crate::state::{AnyState, Cost, RepId};

use super::tunnel::Tunnel;

/// Heuristic read from a cell distance field, regardless of representation.
#[derive(Debug, Clone)]
pub struct CellHeuristic(pub DistanceField);

impl Heuristic for CellHeuristic {
    fn estimate(&self, s: &AnyState) -> Option<Cost> {
        self.0.at(s.cell())
    }
}

impl Heuristic for ModeField {
    fn estimate(&self, s: &AnyState) -> Option<Cost> {
        ModeField::estimate(self, s)
    }
}

impl Heuristic for EGraphHeuristic {
    fn estimate(&self, s: &AnyState) -> Option<Cost> {
        match s {
            AnyState::Hd(h) => EGraphHeuristic::estimate(self, h),
            AnyState::Ld(_) => self.exact(s.cell().0, s.cell().1).map(|r| r.floor().to_integer()),
        }
    }
}

/// Remaining waypoints of the phase-one path, priced at one walk step each.
#[derive(Debug, Clone, Copy)]
pub struct RemainingWaypoints<'t> {
    pub tunnel: &'t Tunnel,
    pub per_waypoint: Cost,
}

impl Heuristic for RemainingWaypoints<'_> {
    fn estimate(&self, s: &AnyState) -> Option<Cost> {
        let (x, y) = s.cell();
        let i = self.tunnel.progress(x, y)?;
        Some((self.tunnel.waypoints().len() - 1 - i) as Cost * self.per_waypoint)
    }
}

/// Heuristics for the adaptive-graph search: an admissible cell bound as the
/// anchor, a walk field for WALK states, a crawl field for CRAWL states and a
/// mode-aware field for every representation.
#[derive(Debug, Clone)]
pub struct PlanHeuristics {
    pub anchor: CellHeuristic,
    pub walk: CellHeuristic,
    pub crawl: CellHeuristic,
    pub mode: ModeField,
}

impl PlanHeuristics {
    pub fn new(w: &World, c: &CostTable, goal: &GoalSpec) -> Self {
        let g = goal.cell();
        Self {
            anchor: CellHeuristic(lower_bound_field(w, c, g)),
            walk: CellHeuristic(walk_field(w, c, g)),
            crawl: CellHeuristic(crawl_field(w, c, g)),
            mode: ModeField::new(w, c, g),
        }
    }

    pub fn as_slice(&self) -> [&dyn Heuristic; 4] {
        [&self.anchor, &self.walk, &self.crawl, &self.mode]
    }

    pub fn lists() -> HeuristicLists {
        init_heuristic_lists(
            &[RepId::Hd, RepId::Walk, RepId::Crawl],
            &[
                vec![false, true, false],
                vec![false, false, true],
                vec![true, true, true],
            ],
        )
    }
}

//! Brute-force optimal cost over the full product state space.

use std::collections::BTreeSet;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use mrplan::domain::is_goal;
use mrplan::oracle::{optimal_path, HdGraph};
use mrplan::path::Path;
use mrplan::{AnyState, Controller, Cost, CostTable, GoalSpec, HdState, Terrain, TransitionKind, World};

/// Largest map side the oracle accepts without `--allow-large`.
pub const MAX_SIDE: usize = 16;

/// What an optimal route looks like, used to certify the intended route
/// class of crafted maps.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteSummary {
    pub edges: usize,
    pub hd_primitives: usize,
    pub walk_macros: usize,
    pub crawl_macros: usize,
    pub stance_changes: usize,
    /// Distinct cells visited.
    pub rubble_cells: usize,
    pub low_cells: usize,
}

impl RouteSummary {
    pub fn of(w: &World, p: &Path) -> Self {
        let mut s = RouteSummary {
            edges: p.len(),
            ..Default::default()
        };
        for e in &p.edges {
            match e.kind {
                TransitionKind::HdPrimitive => s.hd_primitives += 1,
                TransitionKind::HdMacro(Controller::Walk) => s.walk_macros += 1,
                TransitionKind::HdMacro(Controller::Crawl) => s.crawl_macros += 1,
                _ => {}
            }
            if let (AnyState::Hd(a), AnyState::Hd(b)) = (e.from, e.to) {
                if a.stance != b.stance {
                    s.stance_changes += 1;
                }
            }
        }
        let cells: BTreeSet<(i32, i32)> = p.states().iter().map(AnyState::cell).collect();
        s.rubble_cells = cells
            .iter()
            .filter(|&&(x, y)| w.terrain(x, y) == Terrain::Rubble)
            .count();
        s.low_cells = cells.iter().filter(|&&(x, y)| w.terrain(x, y) == Terrain::Low).count();
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub start: HdState,
    pub goal: GoalSpec,
    pub cost: Option<Cost>,
    pub route: Option<RouteSummary>,
}

impl OracleReport {
    /// `cost N` or `NO_PATH`.
    pub fn line(&self) -> String {
        match self.cost {
            Some(c) => format!("cost {c}"),
            None => "NO_PATH".into(),
        }
    }
}

pub fn run_oracle(
    w: &World,
    c: &CostTable,
    start: &HdState,
    goal: &GoalSpec,
    allow_large: bool,
) -> Result<OracleReport> {
    if !allow_large && (w.width() > MAX_SIDE || w.height() > MAX_SIDE) {
        bail!(
            "map is {}x{}; the oracle refuses maps larger than {MAX_SIDE}x{MAX_SIDE}",
            w.width(),
            w.height()
        );
    }
    let g = HdGraph {
        world: w,
        costs: *c,
        macros: true,
    };
    let path = optimal_path(&g, &[(*start).into()], &|s| is_goal(goal, s));
    Ok(OracleReport {
        start: *start,
        goal: *goal,
        cost: path.as_ref().map(Path::cost),
        route: path.as_ref().map(|p| RouteSummary::of(w, p)),
    })
}

//! Experience graphs built from demonstrations: the h^E heuristic and snap
//! motions onto demonstrated configurations.
//!
//! A demonstration file holds one waypoint per line,
//! `x y theta stance phase cost_to_next`, with `#` starting a comment. The
//! last waypoint carries cost 0.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{hd_successors, hd_valid, CostTable, GoalSpec, Terrain, World};
use crate::grid::dijkstra;
use crate::mrmha::Weight;
use crate::state::{circular_distance, Cost, HdState, Stance, Transition, TransitionKind, HEADINGS, PHASES};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DemoError {
    #[error("demonstration {demo}, line {line}: {msg}")]
    Parse { demo: usize, line: usize, msg: String },
    #[error("demonstration {demo}, waypoint {index}: {state} is not a valid configuration")]
    InvalidWaypoint { demo: usize, index: usize, state: HdState },
    #[error("demonstration {demo}, waypoint {index}: cost to next waypoint must be positive")]
    ZeroCost { demo: usize, index: usize },
    #[error("demonstration {demo}: final waypoint must carry cost 0")]
    FinalCost { demo: usize },
}

/// One demonstrated waypoint and the recorded cost to the next one.
pub type Waypoint = (HdState, Cost);

/// Parse the text of one demonstration file.
pub fn parse_demonstration(demo: usize, text: &str) -> Result<Vec<Waypoint>, DemoError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| DemoError::Parse { demo, line: i + 1, msg };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(err(format!("expected 6 fields, found {}", fields.len())));
        }
        let int = |k: usize| -> Result<i64, DemoError> {
            fields[k]
                .parse::<i64>()
                .map_err(|_| err(format!("field {} (`{}`) is not an integer", k + 1, fields[k])))
        };
        let (x, y, theta, phase, cost) = (int(0)?, int(1)?, int(2)?, int(4)?, int(5)?);
        let stance: Stance = fields[3]
            .parse()
            .map_err(|_| err(format!("unknown stance `{}`", fields[3])))?;
        if !(0..HEADINGS as i64).contains(&theta) || !(0..PHASES as i64).contains(&phase) {
            return Err(err("heading or phase out of range".into()));
        }
        if cost < 0 || x < 0 || y < 0 {
            return Err(err("negative value".into()));
        }
        out.push((
            HdState::new(x as i32, y as i32, theta as u8, stance, phase as u8),
            cost as Cost,
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemoEdge {
    pub from: HdState,
    pub to: HdState,
    pub cost: Cost,
    /// The edge is not a single primitive; it is only used by the heuristic.
    pub composite: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EGraphParams {
    pub eps_e: Weight,
    pub snap_cost_per_field: Cost,
}

impl Default for EGraphParams {
    fn default() -> Self {
        Self {
            eps_e: Weight::integer(10),
            snap_cost_per_field: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EGraph {
    edges: Vec<DemoEdge>,
    nodes: Vec<HdState>,
    by_cell: BTreeMap<(i32, i32), Vec<usize>>,
    by_partial: BTreeMap<(i32, i32, Stance), Vec<usize>>,
}

impl EGraph {
    pub fn new(edges: Vec<DemoEdge>) -> Self {
        let mut nodes: Vec<HdState> = edges.iter().flat_map(|e| [e.from, e.to]).collect();
        nodes.sort();
        nodes.dedup();
        let mut by_cell: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        let mut by_partial: BTreeMap<_, Vec<usize>> = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            by_cell.entry((n.x, n.y)).or_default().push(i);
            by_partial.entry((n.x, n.y, n.stance)).or_default().push(i);
        }
        Self {
            edges,
            nodes,
            by_cell,
            by_partial,
        }
    }

    pub fn edges(&self) -> &[DemoEdge] {
        &self.edges
    }

    pub fn nodes(&self) -> &[HdState] {
        &self.nodes
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn nodes_at(&self, x: i32, y: i32) -> impl Iterator<Item = &HdState> + '_ {
        self.by_cell.get(&(x, y)).into_iter().flatten().map(|&i| &self.nodes[i])
    }

    /// Nodes sharing the position and stance of `s`.
    pub fn partial_matches(&self, s: &HdState) -> impl Iterator<Item = &HdState> + '_ {
        self.by_partial
            .get(&(s.x, s.y, s.stance))
            .into_iter()
            .flatten()
            .map(|&i| &self.nodes[i])
    }
}

/// Build an E-Graph from parsed demonstrations. Waypoints must be valid on
/// `w`; consecutive waypoints that are not a single primitive of the
/// recorded cost become composite edges.
pub fn load_demonstrations(w: &World, c: &CostTable, demos: &[Vec<Waypoint>]) -> Result<EGraph, DemoError> {
    let mut edges = Vec::new();
    for (demo, wps) in demos.iter().enumerate() {
        for (index, (s, cost)) in wps.iter().enumerate() {
            if !hd_valid(w, s) {
                return Err(DemoError::InvalidWaypoint { demo, index, state: *s });
            }
            let last = index + 1 == wps.len();
            if last && *cost != 0 {
                return Err(DemoError::FinalCost { demo });
            }
            if !last && *cost == 0 {
                return Err(DemoError::ZeroCost { demo, index });
            }
        }
        for pair in wps.windows(2) {
            let ((from, cost), (to, _)) = (pair[0], pair[1]);
            let primitive = hd_successors(w, c, &from)
                .iter()
                .any(|t| t.to == to.into() && t.cost == cost);
            edges.push(DemoEdge {
                from,
                to,
                cost,
                composite: !primitive,
            });
        }
    }
    Ok(EGraph::new(edges))
}

/// Precomputed h^E table over cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EGraphHeuristic {
    width: usize,
    dist: Vec<Option<Ratio<u64>>>,
}

impl EGraphHeuristic {
    pub fn exact(&self, x: i32, y: i32) -> Option<Ratio<u64>> {
        if x < 0 || y < 0 || x as usize >= self.width {
            return None;
        }
        self.dist.get(y as usize * self.width + x as usize).copied().flatten()
    }

    /// Integer estimate (floor of the exact value).
    pub fn estimate(&self, s: &HdState) -> Option<Cost> {
        self.exact(s.x, s.y).map(|r| r.floor().to_integer())
    }

    pub fn approx(&self, x: i32, y: i32) -> Option<f64> {
        self.exact(x, y).and_then(|r| r.to_f64())
    }
}

/// One Dijkstra from the goal over grid moves priced `eps_e * walk_step`
/// (8-connected, non-WALL cells) and demonstrated edges at their recorded
/// costs.
pub fn egraph_heuristic(w: &World, c: &CostTable, eg: &EGraph, goal: &GoalSpec, p: &EGraphParams) -> EGraphHeuristic {
    let n = w.cell_count();
    let grid = p.eps_e.ratio() * Ratio::from_integer(c.walk_step);
    let mut reverse: Vec<Vec<(usize, Ratio<u64>)>> = vec![Vec::new(); n];
    for e in &eg.edges {
        let (Some(a), Some(b)) = (w.index(e.from.x, e.from.y), w.index(e.to.x, e.to.y)) else {
            continue;
        };
        if a != b {
            reverse[b].push((a, Ratio::from_integer(e.cost)));
        }
    }
    let sources: Vec<(usize, Ratio<u64>)> = w
        .index(goal.x, goal.y)
        .filter(|_| w.terrain(goal.x, goal.y) != Terrain::Wall)
        .map(|g| (g, Ratio::from_integer(0)))
        .into_iter()
        .collect();
    let dist = dijkstra(n, &sources, |u, out| {
        let (x, y) = w.coords(u);
        for &(dx, dy) in &crate::state::HEADING_OFFSETS {
            let (nx, ny) = (x + dx, y + dy);
            if w.in_bounds(nx, ny) && w.terrain(nx, ny) != Terrain::Wall {
                out.push((w.index(nx, ny).expect("in bounds"), grid));
            }
        }
        out.extend_from_slice(&reverse[u]);
    });
    EGraphHeuristic { width: w.width(), dist }
}

/// Cost of adjusting heading and gait phase in place from `a` to `b`.
pub fn snap_cost(c: &CostTable, per_field: Cost, a: &HdState, b: &HdState) -> Cost {
    let turns = circular_distance(a.theta, b.theta, HEADINGS) as Cost;
    let shifts = circular_distance(a.phase, b.phase, PHASES) as Cost;
    per_field * (c.rotate * turns + c.weight_shift * shifts)
}

/// Snap motions from `s` onto demonstrated nodes with the same cell and
/// stance but a different heading or phase.
pub fn snap_successors(eg: &EGraph, c: &CostTable, s: &HdState, p: &EGraphParams) -> Vec<Transition> {
    eg.partial_matches(s)
        .filter(|n| *n != s)
        .map(|n| Transition::new(*s, *n, snap_cost(c, p.snap_cost_per_field, s, n), TransitionKind::Snap))
        .collect()
}

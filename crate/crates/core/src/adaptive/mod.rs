//! The iterative adaptive-dimensionality planner.
//!
//! Each iteration searches the adaptive graph for a path `pi_ad`, builds a
//! tunnel around it and tracks it with a full-body search restricted to the
//! tunnel. When tracking fails, an HD region is placed where tracking got
//! furthest and the loop repeats with the enlarged adaptive graph.

mod heuristics;
mod tunnel;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{hd_valid, is_goal, CostTable, GoalSpec, Terrain, World};
use crate::egraph::{egraph_heuristic, EGraph, EGraphHeuristic, EGraphParams};
use crate::graph::{AdaptiveGraph, HdRegion};
use crate::grid::{cell_field, ModeField};
use crate::mrmha::{
    init_heuristic_lists, plan, Heuristic, HeuristicLists, SearchError, SearchOutcome, SearchParams, SearchResult,
    SearchStats, Weight,
};
use crate::path::Path;
use crate::state::{AnyState, Cost, HdState, RepId, TransitionKind};

pub use heuristics::{CellHeuristic, PlanHeuristics, RemainingWaypoints};
pub use tunnel::{build_tunnel, TrackingGraph, Tunnel};
pub use validate::{validate_path, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptivePlanParams {
    pub w1_plan: Weight,
    pub w2_plan: Weight,
    pub w1_track: Weight,
    pub w2_track: Weight,
    pub tunnel_width: u32,
    pub region_radius: u32,
    pub max_iterations: u32,
    /// Expansion budget of one adaptive-graph search.
    pub plan_budget: u64,
    /// Expansion budget of one tracking search.
    pub track_budget: u64,
    pub egraph: EGraphParams,
    pub debug_checks: bool,
    /// Record wall-clock phase durations in iteration records.
    pub wall_clock: bool,
}

impl Default for AdaptivePlanParams {
    fn default() -> Self {
        Self {
            w1_plan: Weight::integer(2),
            w2_plan: Weight::integer(2),
            w1_track: Weight::integer(2),
            w2_track: Weight::integer(2),
            tunnel_width: 1,
            region_radius: 2,
            max_iterations: 20,
            plan_budget: 200_000,
            track_budget: 200_000,
            egraph: EGraphParams::default(),
            debug_checks: false,
            wall_clock: false,
        }
    }
}

impl AdaptivePlanParams {
    pub fn plan_search(&self) -> SearchParams {
        SearchParams {
            w1: self.w1_plan,
            w2: self.w2_plan,
            expansion_budget: self.plan_budget,
            trace: false,
            debug_checks: self.debug_checks,
        }
    }

    pub fn track_search(&self) -> SearchParams {
        SearchParams {
            w1: self.w1_track,
            w2: self.w2_track,
            expansion_budget: self.track_budget,
            trace: false,
            debug_checks: self.debug_checks,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlanError {
    #[error("start {0} is not a valid configuration")]
    InvalidStart(HdState),
    #[error("goal cell ({0}, {1}) is outside the map or a wall")]
    InvalidGoal(i32, i32),
    #[error("tracking start {0} lies outside the tunnel")]
    StartOutsideTunnel(HdState),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// Outcome of one search phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PhaseOutcome {
    Path,
    Exhausted,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub outcome: PhaseOutcome,
    pub cost: Option<Cost>,
    pub stats: SearchStats,
    /// Wall-clock duration, only measured when asked for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_micros: Option<u64>,
}

impl PhaseRecord {
    pub fn of(r: &SearchResult) -> Self {
        let (outcome, cost) = match &r.outcome {
            SearchOutcome::Path { cost, .. } => (PhaseOutcome::Path, Some(*cost)),
            SearchOutcome::Exhausted => (PhaseOutcome::Exhausted, None),
            SearchOutcome::Budget => (PhaseOutcome::Budget, None),
        };
        Self {
            outcome,
            cost,
            stats: r.stats.clone(),
            wall_micros: None,
        }
    }

    pub fn expansions(&self) -> u64 {
        self.stats.total_expansions()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: u32,
    /// Regions in effect during this iteration.
    pub regions: Vec<HdRegion>,
    pub plan: PhaseRecord,
    pub pi_ad: Option<Path>,
    pub tunnel: Option<Tunnel>,
    pub tracking: Option<PhaseRecord>,
    pub region_added: Option<HdRegion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdaptiveOutcome {
    Executable { path: Path, cost: Cost },
    NoPath,
    IterationLimit,
    Timeout,
}

impl AdaptiveOutcome {
    pub fn name(&self) -> &'static str {
        match self {
            AdaptiveOutcome::Executable { .. } => "EXECUTABLE",
            AdaptiveOutcome::NoPath => "NO_PATH",
            AdaptiveOutcome::IterationLimit => "ITERATION_LIMIT",
            AdaptiveOutcome::Timeout => "TIMEOUT",
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            AdaptiveOutcome::Executable { path, .. } => Some(path),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptiveResult {
    pub outcome: AdaptiveOutcome,
    pub iterations: Vec<IterationRecord>,
}

impl AdaptiveResult {
    pub fn plan_expansions(&self) -> u64 {
        self.iterations.iter().map(|r| r.plan.expansions()).sum()
    }

    pub fn track_expansions(&self) -> u64 {
        self.iterations
            .iter()
            .filter_map(|r| r.tracking.as_ref())
            .map(PhaseRecord::expansions)
            .sum()
    }

    pub fn regions(&self) -> Vec<HdRegion> {
        let mut out = self.iterations.first().map(|r| r.regions.clone()).unwrap_or_default();
        out.extend(self.iterations.iter().filter_map(|r| r.region_added));
        out
    }
}

/// A loaded E-Graph together with its heuristic table for one goal.
#[derive(Debug, Clone)]
pub struct EGraphContext<'a> {
    pub graph: &'a EGraph,
    pub heuristic: EGraphHeuristic,
    pub params: EGraphParams,
}

impl<'a> EGraphContext<'a> {
    pub fn new(w: &World, c: &CostTable, graph: &'a EGraph, goal: &GoalSpec, params: EGraphParams) -> Self {
        Self {
            graph,
            heuristic: egraph_heuristic(w, c, graph, goal, &params),
            params,
        }
    }
}

pub fn check_query(w: &World, start: &HdState, goal: &GoalSpec) -> Result<(), PlanError> {
    if !hd_valid(w, start) {
        return Err(PlanError::InvalidStart(*start));
    }
    if !w.in_bounds(goal.x, goal.y) || w.terrain(goal.x, goal.y) == Terrain::Wall {
        return Err(PlanError::InvalidGoal(goal.x, goal.y));
    }
    Ok(())
}

/// Run `f`, measuring its wall-clock duration in microseconds when `on`.
pub fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, Option<u64>) {
    let t0 = on.then(std::time::Instant::now);
    let out = f();
    (out, t0.map(|t| t.elapsed().as_micros() as u64))
}

/// Search the adaptive graph from the image of `start`.
pub fn phase_one(
    g: &AdaptiveGraph,
    start: &HdState,
    goal: &GoalSpec,
    h: &PlanHeuristics,
    params: &AdaptivePlanParams,
) -> Result<SearchResult, SearchError> {
    let goal_test = |s: &AnyState| is_goal(goal, s);
    let hs = h.as_slice();
    plan(
        g,
        g.image_of(start),
        &goal_test,
        &hs,
        &PlanHeuristics::lists(),
        params.plan_search(),
    )
}

/// Everything the tracking search needs, owned in one place so a resumable
/// search can borrow it.
pub struct TrackingSetup<'a> {
    pub graph: TrackingGraph<'a>,
    anchor: CellHeuristic,
    locomotion: ModeField,
    remaining: RemainingWaypoints<'a>,
    egraph: Option<&'a EGraphHeuristic>,
    lists: HeuristicLists,
}

impl<'a> TrackingSetup<'a> {
    pub fn new(
        world: &'a World,
        costs: &'a CostTable,
        tunnel: &'a Tunnel,
        regions: &'a [HdRegion],
        goal: &GoalSpec,
        egraph: Option<&'a EGraphContext<'a>>,
    ) -> Self {
        let g = goal.cell();
        let open = |(x, y): (i32, i32)| tunnel.contains(x, y) && w_open(world, x, y);
        let anchor = cell_field(world, g, |a, b, _| (open(a) && open(b)).then_some(costs.min_action()));
        let locomotion = ModeField::within(world, costs, g, |x, y| tunnel.contains(x, y));
        let enable: Vec<Vec<bool>> = if egraph.is_some() {
            vec![vec![true]; 3]
        } else {
            vec![vec![true]; 2]
        };
        Self {
            graph: TrackingGraph {
                world,
                costs,
                tunnel,
                regions,
                egraph: egraph.map(|e| (e.graph, e.params)),
            },
            anchor: CellHeuristic(anchor),
            locomotion,
            remaining: RemainingWaypoints {
                tunnel,
                per_waypoint: costs.walk_step,
            },
            egraph: egraph.map(|e| &e.heuristic),
            lists: init_heuristic_lists(&[RepId::Hd], &enable),
        }
    }

    pub fn heuristics(&self) -> Vec<&dyn Heuristic> {
        let mut hs: Vec<&dyn Heuristic> = vec![&self.anchor, &self.locomotion, &self.remaining];
        if let Some(e) = self.egraph {
            hs.push(e);
        }
        hs
    }

    pub fn lists(&self) -> &HeuristicLists {
        &self.lists
    }

    pub fn tunnel(&self) -> &'a Tunnel {
        self.graph.tunnel
    }

    /// Tunnel progress of a state, for frontier selection.
    pub fn progress(&self, s: &AnyState) -> u64 {
        let (x, y) = s.cell();
        self.graph.tunnel.progress(x, y).map_or(0, |p| p as u64 + 1)
    }
}

fn w_open(w: &World, x: i32, y: i32) -> bool {
    w.in_bounds(x, y) && w.terrain(x, y) != Terrain::Wall
}

/// Full-body search for an executable path inside the tunnel.
pub fn track(
    setup: &TrackingSetup,
    start: &HdState,
    goal: &GoalSpec,
    params: &AdaptivePlanParams,
) -> Result<SearchResult, PlanError> {
    if !setup.tunnel().contains(start.x, start.y) {
        return Err(PlanError::StartOutsideTunnel(*start));
    }
    let goal_test = |s: &AnyState| is_goal(goal, s);
    let hs = setup.heuristics();
    let mut search = crate::mrmha::MrMha::new(
        &setup.graph,
        (*start).into(),
        &goal_test,
        &hs,
        setup.lists(),
        params.track_search(),
    )?;
    let status = search.run(params.track_search().expansion_budget)?;
    Ok(search.result(status, &|s| setup.progress(s)))
}

/// Region placed where tracking got furthest along the tunnel; with no
/// frontier, at the first waypoint.
pub fn select_region(tracking: &SearchResult, tunnel: &Tunnel, params: &AdaptivePlanParams) -> HdRegion {
    let (x, y) = tracking
        .frontier
        .map(|s| s.cell())
        .or_else(|| tunnel.waypoints().first().copied())
        .unwrap_or((0, 0));
    HdRegion::new(x, y, params.region_radius)
}

/// Run the adaptive planner without observing intermediate iterations.
pub fn plan_adaptive(
    world: &World,
    costs: &CostTable,
    start: &HdState,
    goal: &GoalSpec,
    params: &AdaptivePlanParams,
    egraph: Option<&EGraph>,
) -> Result<AdaptiveResult, PlanError> {
    plan_adaptive_with_sink(world, costs, start, goal, params, egraph, &mut |_| {})
}

/// Run the adaptive planner, handing each finished iteration to `sink` in
/// order.
pub fn plan_adaptive_with_sink(
    world: &World,
    costs: &CostTable,
    start: &HdState,
    goal: &GoalSpec,
    params: &AdaptivePlanParams,
    egraph: Option<&EGraph>,
    sink: &mut dyn FnMut(&IterationRecord),
) -> Result<AdaptiveResult, PlanError> {
    check_query(world, start, goal)?;
    let heuristics = PlanHeuristics::new(world, costs, goal);
    let ectx = egraph.map(|eg| EGraphContext::new(world, costs, eg, goal, params.egraph));
    let mut graph = AdaptiveGraph::new(world, *costs, Vec::new());
    let mut iterations = Vec::new();
    let finish = |outcome, iterations| Ok(AdaptiveResult { outcome, iterations });

    for iteration in 1..=params.max_iterations.max(1) {
        let (phase1, plan_us) = timed(params.wall_clock, || {
            phase_one(&graph, start, goal, &heuristics, params)
        });
        let phase1 = phase1?;
        let mut record = IterationRecord {
            iteration,
            regions: graph.regions().to_vec(),
            plan: PhaseRecord {
                wall_micros: plan_us,
                ..PhaseRecord::of(&phase1)
            },
            pi_ad: phase1.path().cloned(),
            tunnel: None,
            tracking: None,
            region_added: None,
        };
        let pi_ad = match phase1.outcome {
            SearchOutcome::Path { path, .. } => path,
            SearchOutcome::Exhausted => {
                sink(&record);
                iterations.push(record);
                return finish(AdaptiveOutcome::NoPath, iterations);
            }
            SearchOutcome::Budget => {
                sink(&record);
                iterations.push(record);
                return finish(AdaptiveOutcome::Timeout, iterations);
            }
        };
        let tunnel = build_tunnel(&pi_ad.states(), params.tunnel_width);
        let (tracked, track_us) = timed(params.wall_clock, || {
            let setup = TrackingSetup::new(world, costs, &tunnel, graph.regions(), goal, ectx.as_ref());
            track(&setup, start, goal, params)
        });
        let tracked = tracked?;
        record.tracking = Some(PhaseRecord {
            wall_micros: track_us,
            ..PhaseRecord::of(&tracked)
        });
        if let SearchOutcome::Path { path, cost } = tracked.outcome {
            record.tunnel = Some(tunnel);
            sink(&record);
            iterations.push(record);
            return finish(AdaptiveOutcome::Executable { path, cost }, iterations);
        }
        let region = select_region(&tracked, &tunnel, params);
        log::debug!("iteration {iteration}: tracking failed, adding region {region:?}");
        record.tunnel = Some(tunnel);
        record.region_added = Some(region);
        sink(&record);
        iterations.push(record);
        graph = graph.add_hd_region(region);
    }
    finish(AdaptiveOutcome::IterationLimit, iterations)
}

/// Number of edges of `kind` in `path`.
pub fn count_kind(path: &Path, kind: TransitionKind) -> usize {
    path.edges.iter().filter(|e| e.kind == kind).count()
}

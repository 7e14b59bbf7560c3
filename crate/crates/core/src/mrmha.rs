//! Multi-representation multi-heuristic A* with shared open lists.
//!
//! One admissible anchor queue (`OPEN_0`) guards any number of inadmissible
//! queues. Each representation has its own list of enabled inadmissible
//! heuristics, and a generated state is only ever queued under the
//! heuristics of its own representation. Keys are exact rationals.

use std::cmp::Ordering;
use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::path::Path;
use crate::state::{AnyState, Cost, RepId, Transition, TransitionKind};

/// Exact queue priority.
pub type Key = Ratio<u64>;

/// A rational weight, at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Weight(Ratio<u64>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightError {
    #[error("weight `{0}` is not a rational number")]
    Parse(String),
    #[error("weight {0} is below 1")]
    BelowOne(String),
}

impl Weight {
    pub const ONE: Weight = Weight(Ratio::new_raw(1, 1));

    pub fn new(numer: u64, denom: u64) -> Result<Self, WeightError> {
        if denom == 0 {
            return Err(WeightError::Parse(format!("{numer}/{denom}")));
        }
        let r = Ratio::new(numer, denom);
        if r < Ratio::from_integer(1) {
            return Err(WeightError::BelowOne(r.to_string()));
        }
        Ok(Weight(r))
    }

    pub fn integer(n: u64) -> Self {
        Self::new(n, 1).expect("integer weight must be >= 1")
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }

    pub fn scale(&self, k: Key) -> Key {
        self.0 * k
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::ONE
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Weight {
    type Err = WeightError;

    /// Accepts `3`, `3/2` or a finite decimal such as `1.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WeightError::Parse(s.to_string());
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return Weight::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || frac.len() > 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let denom = 10u64.pow(frac.len() as u32);
            let int: u64 = if int.is_empty() {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            let frac: u64 = frac.parse().map_err(|_| bad())?;
            return Weight::new(int * denom + frac, denom);
        }
        Weight::new(s.parse().map_err(|_| bad())?, 1)
    }
}

impl From<Weight> for String {
    fn from(w: Weight) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Weight {
    type Error = WeightError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// `g + w1 * h`, exactly.
pub fn key(g: Cost, h: Cost, w1: Weight) -> Key {
    Ratio::from_integer(g) + w1.ratio() * Ratio::from_integer(h)
}

/// Index into the heuristic array; 0 is the anchor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HeuristicId(pub usize);

impl HeuristicId {
    pub const ANCHOR: HeuristicId = HeuristicId(0);
}

/// Per-representation heuristic assignment. The anchor is shared by every
/// representation; inadmissible lists may differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeuristicLists {
    inadmissible: BTreeMap<RepId, Vec<HeuristicId>>,
    heuristic_count: usize,
    unused: Vec<HeuristicId>,
}

impl HeuristicLists {
    pub fn anchor(&self) -> HeuristicId {
        HeuristicId::ANCHOR
    }

    pub fn inadmissible(&self, rep: RepId) -> &[HeuristicId] {
        self.inadmissible.get(&rep).map_or(&[], Vec::as_slice)
    }

    /// Whether a state of `rep` may sit in the queue of heuristic `id`.
    pub fn allows(&self, rep: RepId, id: HeuristicId) -> bool {
        id == HeuristicId::ANCHOR || self.inadmissible(rep).contains(&id)
    }

    /// Number of inadmissible heuristics (the `n` of the round robin).
    pub fn heuristic_count(&self) -> usize {
        self.heuristic_count
    }

    /// Heuristics enabled for no representation.
    pub fn unused(&self) -> &[HeuristicId] {
        &self.unused
    }

    pub fn reps(&self) -> impl Iterator<Item = RepId> + '_ {
        self.inadmissible.keys().copied()
    }
}

/// Build heuristic lists from an enable matrix whose row `k` describes
/// heuristic `k + 1` and whose columns follow `reps`.
pub fn init_heuristic_lists(reps: &[RepId], enable: &[Vec<bool>]) -> HeuristicLists {
    let mut inadmissible: BTreeMap<RepId, Vec<HeuristicId>> = reps.iter().map(|&r| (r, Vec::new())).collect();
    let mut unused = Vec::new();
    for (row, flags) in enable.iter().enumerate() {
        assert_eq!(flags.len(), reps.len(), "enable matrix column count must match reps");
        let id = HeuristicId(row + 1);
        for (&rep, _) in reps.iter().zip(flags).filter(|(_, &on)| on) {
            inadmissible.get_mut(&rep).unwrap().push(id);
        }
        if !flags.iter().any(|&f| f) {
            log::warn!("heuristic {} is enabled for no representation", id.0);
            unused.push(id);
        }
    }
    HeuristicLists {
        inadmissible,
        heuristic_count: enable.len(),
        unused,
    }
}

/// Anything that can enumerate outgoing transitions.
pub trait SearchGraph {
    fn successors(&self, s: &AnyState, out: &mut Vec<Transition>);
}

impl<F> SearchGraph for F
where
    F: Fn(&AnyState, &mut Vec<Transition>),
{
    fn successors(&self, s: &AnyState, out: &mut Vec<Transition>) {
        self(s, out)
    }
}

/// Cost-to-go estimate; `None` means the goal is unreachable.
pub trait Heuristic {
    fn estimate(&self, s: &AnyState) -> Option<Cost>;
}

impl<F> Heuristic for F
where
    F: Fn(&AnyState) -> Option<Cost>,
{
    fn estimate(&self, s: &AnyState) -> Option<Cost> {
        self(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub w1: Weight,
    pub w2: Weight,
    pub expansion_budget: u64,
    /// Record a per-expansion and per-insertion trace.
    pub trace: bool,
    /// Verify anchor admissibility at termination.
    pub debug_checks: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            w1: Weight::ONE,
            w2: Weight::ONE,
            expansion_budget: 1_000_000,
            trace: false,
            debug_checks: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("expansion budget must be positive")]
    ZeroBudget,
    #[error("heuristic list refers to heuristic {0} but only {1} were supplied")]
    MissingHeuristic(usize, usize),
    #[error("anchor heuristic is inadmissible: goal cost {goal_g} < h0(start) = {h0}")]
    InadmissibleAnchor { goal_g: Cost, h0: Cost },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Expansions per queue, anchor first.
    pub expansions: Vec<u64>,
    /// Largest number of live entries seen in each queue.
    pub peak_open: Vec<usize>,
    pub generated: u64,
}

impl SearchStats {
    pub fn total_expansions(&self) -> u64 {
        self.expansions.iter().sum()
    }
}

/// One line of the debug trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    Expand {
        queue: usize,
        state: AnyState,
        g: Cost,
        key: Key,
        anchor_min: Key,
    },
    Insert {
        queue: usize,
        state: AnyState,
        key: Key,
    },
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Expand {
                queue, state, g, key, ..
            } => {
                write!(f, "{queue}, {state}, {g}, {key}")
            }
            TraceEvent::Insert { queue, state, key } => write!(f, "+{queue}, {state}, {key}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Path { path: Path, cost: Cost },
    Exhausted,
    Budget,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
    /// For non-path outcomes: the most promising frontier state.
    pub frontier: Option<AnyState>,
    pub trace: Vec<TraceEvent>,
}

impl SearchResult {
    pub fn path(&self) -> Option<&Path> {
        match &self.outcome {
            SearchOutcome::Path { path, .. } => Some(path),
            _ => None,
        }
    }
}

/// Status of a (possibly resumed) run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Found,
    Exhausted,
    Paused,
}

const INF: Cost = Cost::MAX;

#[derive(Debug)]
struct Node {
    state: AnyState,
    g: Cost,
    bp: Option<(usize, Cost, TransitionKind)>,
    /// Heuristic values indexed by heuristic id; only those relevant to the
    /// node's representation are evaluated.
    h: Vec<Option<Cost>>,
    in_open: u64,
    closed_anchor: bool,
    closed_inadmissible: bool,
}

#[derive(Debug, PartialEq, Eq)]
struct QueueEntry {
    key: Key,
    g: Cost,
    state: AnyState,
    node: usize,
}

impl Ord for QueueEntry {
    // BinaryHeap pops the maximum: smallest key, then larger g, then
    // lexicographically smaller state.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .cmp(&self.key)
            .then(self.g.cmp(&other.g))
            .then(other.state.cmp(&self.state))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

enum Selection {
    Done(RunStatus),
    Expand(usize),
}

/// A resumable search instance.
pub struct MrMha<'a> {
    graph: &'a dyn SearchGraph,
    goal: &'a dyn Fn(&AnyState) -> bool,
    heuristics: &'a [&'a dyn Heuristic],
    lists: &'a HeuristicLists,
    params: SearchParams,
    start: usize,
    index: HashMap<AnyState, usize>,
    nodes: Vec<Node>,
    open: Vec<BinaryHeap<QueueEntry>>,
    open_len: Vec<usize>,
    cursor: usize,
    best_goal: Option<usize>,
    stats: SearchStats,
    trace: Vec<TraceEvent>,
    scratch: Vec<Transition>,
}

impl<'a> MrMha<'a> {
    pub fn new(
        graph: &'a dyn SearchGraph,
        start: AnyState,
        goal: &'a dyn Fn(&AnyState) -> bool,
        heuristics: &'a [&'a dyn Heuristic],
        lists: &'a HeuristicLists,
        params: SearchParams,
    ) -> Result<Self, SearchError> {
        if params.expansion_budget == 0 {
            return Err(SearchError::ZeroBudget);
        }
        let n = lists.heuristic_count();
        if heuristics.len() < n + 1 {
            return Err(SearchError::MissingHeuristic(n, heuristics.len().saturating_sub(1)));
        }
        assert!(n < 64, "at most 63 inadmissible heuristics");
        let mut search = Self {
            graph,
            goal,
            heuristics,
            lists,
            params,
            start: 0,
            index: HashMap::new(),
            nodes: Vec::new(),
            open: (0..=n).map(|_| BinaryHeap::new()).collect(),
            open_len: vec![0; n + 1],
            cursor: 1,
            best_goal: None,
            stats: SearchStats {
                expansions: vec![0; n + 1],
                peak_open: vec![0; n + 1],
                generated: 0,
            },
            trace: Vec::new(),
            scratch: Vec::new(),
        };
        let s = search.node_for(start);
        search.start = s;
        search.nodes[s].g = 0;
        if let Some(k0) = search.key_of(s, HeuristicId::ANCHOR) {
            search.insert(s, 0, k0);
            for &id in lists.inadmissible(start.rep()) {
                if let Some(k) = search.key_of(s, id) {
                    search.insert(s, id.0, k);
                }
            }
        }
        search.update_peaks();
        Ok(search)
    }

    fn node_for(&mut self, s: AnyState) -> usize {
        match self.index.entry(s) {
            MapEntry::Occupied(e) => *e.get(),
            MapEntry::Vacant(e) => {
                let n = self.heuristics.len();
                let mut h = vec![None; n];
                h[0] = self.heuristics[0].estimate(&s);
                for &id in self.lists.inadmissible(s.rep()) {
                    h[id.0] = self.heuristics[id.0].estimate(&s);
                }
                let idx = self.nodes.len();
                self.nodes.push(Node {
                    state: s,
                    g: INF,
                    bp: None,
                    h,
                    in_open: 0,
                    closed_anchor: false,
                    closed_inadmissible: false,
                });
                self.stats.generated += 1;
                *e.insert(idx)
            }
        }
    }

    fn key_of(&self, node: usize, id: HeuristicId) -> Option<Key> {
        let n = &self.nodes[node];
        n.h[id.0].map(|h| key(n.g, h, self.params.w1))
    }

    fn insert(&mut self, node: usize, queue: usize, k: Key) {
        let n = &mut self.nodes[node];
        if n.in_open & (1 << queue) == 0 {
            n.in_open |= 1 << queue;
            self.open_len[queue] += 1;
        }
        if self.params.trace {
            self.trace.push(TraceEvent::Insert {
                queue,
                state: n.state,
                key: k,
            });
        }
        self.open[queue].push(QueueEntry {
            key: k,
            g: n.g,
            state: n.state,
            node,
        });
    }

    fn min_key(&mut self, queue: usize) -> Option<Key> {
        while let Some(top) = self.open[queue].peek() {
            let n = &self.nodes[top.node];
            if n.in_open & (1 << queue) != 0 && n.g == top.g {
                return Some(top.key);
            }
            self.open[queue].pop();
        }
        None
    }

    fn best_goal_g(&self) -> Option<Cost> {
        self.best_goal.map(|i| self.nodes[i].g)
    }

    fn select(&mut self) -> Selection {
        let Some(m0) = self.min_key(0) else {
            return Selection::Done(if self.best_goal.is_some() {
                RunStatus::Found
            } else {
                RunStatus::Exhausted
            });
        };
        let n = self.lists.heuristic_count();
        let mut queue = 0;
        let mut bound = m0;
        if n > 0 {
            if let Some(mi) = self.min_key(self.cursor) {
                if mi <= self.params.w2.scale(m0) {
                    queue = self.cursor;
                    bound = mi;
                }
            }
        }
        if let Some(gg) = self.best_goal_g() {
            if Ratio::from_integer(gg) <= bound {
                return Selection::Done(RunStatus::Found);
            }
        }
        Selection::Expand(queue)
    }

    /// Run until the goal is proven, the graph is exhausted or `budget`
    /// further expansions have been made.
    pub fn run(&mut self, budget: u64) -> Result<RunStatus, SearchError> {
        let mut used = 0;
        loop {
            match self.select() {
                Selection::Done(status) => {
                    if status == RunStatus::Found {
                        self.check_anchor()?;
                    }
                    return Ok(status);
                }
                Selection::Expand(queue) => {
                    if used >= budget {
                        return Ok(RunStatus::Paused);
                    }
                    let n = self.lists.heuristic_count();
                    if n > 0 {
                        self.cursor = self.cursor % n + 1;
                    }
                    let top = self.open[queue].pop().expect("min_key left a live entry");
                    self.expand(top.node, queue);
                    used += 1;
                }
            }
        }
    }

    fn check_anchor(&self) -> Result<(), SearchError> {
        if !self.params.debug_checks {
            return Ok(());
        }
        let goal_g = self.best_goal_g().unwrap_or(INF);
        let h0 = self.nodes[self.start].h[0].unwrap_or(INF);
        if goal_g < h0 {
            return Err(SearchError::InadmissibleAnchor { goal_g, h0 });
        }
        Ok(())
    }

    fn expand(&mut self, node: usize, queue: usize) {
        let (state, g) = (self.nodes[node].state, self.nodes[node].g);
        if self.params.trace {
            let key = self.key_of(node, HeuristicId(queue)).expect("queued with finite key");
            let anchor_min = self.open[0]
                .peek()
                .map(|e| e.key)
                .into_iter()
                .chain(self.key_of(node, HeuristicId::ANCHOR).filter(|_| queue == 0))
                .min()
                .unwrap_or(key);
            self.trace.push(TraceEvent::Expand {
                queue,
                state,
                g,
                key,
                anchor_min,
            });
        }
        {
            let n = &mut self.nodes[node];
            for q in 0..self.open_len.len() {
                if n.in_open & (1 << q) != 0 {
                    self.open_len[q] -= 1;
                }
            }
            n.in_open = 0;
            if queue == 0 {
                n.closed_anchor = true;
            } else {
                n.closed_inadmissible = true;
            }
        }
        self.stats.expansions[queue] += 1;
        if (self.goal)(&state) && self.best_goal_g().is_none_or(|bg| g < bg) {
            self.best_goal = Some(node);
        }

        let mut succ = std::mem::take(&mut self.scratch);
        succ.clear();
        self.graph.successors(&state, &mut succ);
        for t in &succ {
            let new_g = g + t.cost;
            let j = self.node_for(t.to);
            if new_g >= self.nodes[j].g {
                continue;
            }
            self.nodes[j].g = new_g;
            self.nodes[j].bp = Some((node, t.cost, t.kind));
            if self.nodes[j].closed_anchor {
                continue;
            }
            let Some(k0) = self.key_of(j, HeuristicId::ANCHOR) else {
                continue;
            };
            self.insert(j, 0, k0);
            if self.nodes[j].closed_inadmissible {
                continue;
            }
            let limit = self.params.w2.scale(k0);
            for &id in self.lists.inadmissible(t.to.rep()) {
                if let Some(k) = self.key_of(j, id) {
                    if k <= limit {
                        self.insert(j, id.0, k);
                    }
                }
            }
        }
        self.scratch = succ;
        self.update_peaks();
    }

    fn update_peaks(&mut self) {
        for (peak, &len) in self.stats.peak_open.iter_mut().zip(&self.open_len) {
            *peak = (*peak).max(len);
        }
    }

    pub fn stats(&self) -> &SearchStats {
        &self.stats
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn take_trace(&mut self) -> Vec<TraceEvent> {
        std::mem::take(&mut self.trace)
    }

    pub fn start_state(&self) -> AnyState {
        self.nodes[self.start].state
    }

    pub fn g(&self, s: &AnyState) -> Option<Cost> {
        self.index.get(s).map(|&i| self.nodes[i].g).filter(|&g| g != INF)
    }

    /// Goal path found so far, if any.
    pub fn goal_path(&self) -> Option<Path> {
        self.best_goal.map(|i| self.path_to_node(i))
    }

    pub fn path_to(&self, s: &AnyState) -> Option<Path> {
        let &i = self.index.get(s)?;
        (self.nodes[i].g != INF).then(|| self.path_to_node(i))
    }

    fn path_to_node(&self, mut i: usize) -> Path {
        let mut edges = Vec::new();
        while let Some((p, cost, kind)) = self.nodes[i].bp {
            edges.push(Transition {
                from: self.nodes[p].state,
                to: self.nodes[i].state,
                cost,
                kind,
            });
            i = p;
        }
        edges.reverse();
        Path {
            start: self.nodes[self.start].state,
            edges,
        }
    }

    /// Every state expanded at least once.
    pub fn closed_states(&self) -> impl Iterator<Item = &AnyState> + '_ {
        self.nodes
            .iter()
            .filter(|n| n.closed_anchor || n.closed_inadmissible)
            .map(|n| &n.state)
    }

    /// The most promising state to resume from: among live anchor-queue
    /// entries (or all expanded states once the queue is empty), the one
    /// with the largest `progress`, ties broken by the smaller anchor key
    /// and then by state order.
    pub fn frontier(&self, progress: &dyn Fn(&AnyState) -> u64) -> Option<AnyState> {
        let live: Vec<&Node> = self.nodes.iter().filter(|n| n.in_open & 1 != 0).collect();
        let pool: Vec<&Node> = if live.is_empty() {
            self.nodes
                .iter()
                .filter(|n| n.closed_anchor || n.closed_inadmissible)
                .collect()
        } else {
            live
        };
        pool.into_iter()
            .filter(|n| n.g != INF)
            .min_by(|a, b| {
                let ka = a.h[0].map(|h| key(a.g, h, self.params.w1));
                let kb = b.h[0].map(|h| key(b.g, h, self.params.w1));
                progress(&b.state)
                    .cmp(&progress(&a.state))
                    .then_with(|| match (ka, kb) {
                        (Some(x), Some(y)) => x.cmp(&y),
                        (Some(_), None) => Ordering::Less,
                        (None, Some(_)) => Ordering::Greater,
                        (None, None) => Ordering::Equal,
                    })
                    .then(a.state.cmp(&b.state))
            })
            .map(|n| n.state)
    }

    /// Package the current status into a [`SearchResult`].
    pub fn result(&mut self, status: RunStatus, progress: &dyn Fn(&AnyState) -> u64) -> SearchResult {
        let (outcome, frontier) = match status {
            RunStatus::Found => {
                let path = self.goal_path().expect("found implies a goal");
                let cost = path.cost();
                (SearchOutcome::Path { path, cost }, None)
            }
            RunStatus::Exhausted => (SearchOutcome::Exhausted, self.frontier(progress)),
            RunStatus::Paused => (SearchOutcome::Budget, self.frontier(progress)),
        };
        SearchResult {
            outcome,
            stats: self.stats.clone(),
            frontier,
            trace: self.take_trace(),
        }
    }
}

/// Run a complete search within `params.expansion_budget` expansions.
pub fn plan(
    graph: &dyn SearchGraph,
    start: AnyState,
    goal: &dyn Fn(&AnyState) -> bool,
    heuristics: &[&dyn Heuristic],
    lists: &HeuristicLists,
    params: SearchParams,
) -> Result<SearchResult, SearchError> {
    let mut search = MrMha::new(graph, start, goal, heuristics, lists, params)?;
    let status = search.run(params.expansion_budget)?;
    Ok(search.result(status, &|_| 0))
}

//! Interleaved planning and execution against simulated controllers.
//!
//! The planner runs the adaptive loop, but tracking advances in bursts of
//! `lookahead` expansions. After each burst the path to the most advanced
//! frontier state is committed and handed to the meta-controller, which
//! splits it into homogeneous segments and runs them one after another on a
//! simulated clock. Planning time is one tick per expansion.

use std::sync::mpsc;

use serde::{Deserialize, Serialize};

use crate::adaptive::{
    build_tunnel, check_query, phase_one, select_region, timed, AdaptiveOutcome, AdaptivePlanParams, AdaptiveResult,
    EGraphContext, IterationRecord, PhaseOutcome, PhaseRecord, PlanError, PlanHeuristics, TrackingSetup,
};
use crate::domain::{is_goal, CostTable, GoalSpec, World};
use crate::egraph::EGraph;
use crate::graph::AdaptiveGraph;
use crate::mrmha::{MrMha, RunStatus, SearchOutcome, SearchResult, SearchStats};
use crate::path::Path;
use crate::state::{AnyState, Controller, Cost, HdState};

/// Maximal run of path edges executed by one controller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub controller: Controller,
    pub path: Path,
}

impl Segment {
    pub fn cost(&self) -> Cost {
        self.path.cost()
    }
}

/// Split a path into maximal single-controller runs, in order.
///
/// # Panics
/// On edges no controller can execute.
pub fn split_segments(path: &Path) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for e in &path.edges {
        let ctrl = e
            .kind
            .controller()
            .unwrap_or_else(|| panic!("edge {e} has no controller"));
        match out.last_mut() {
            Some(seg) if seg.controller == ctrl => seg.path.edges.push(*e),
            _ => out.push(Segment {
                controller: ctrl,
                path: Path {
                    start: e.from,
                    edges: vec![*e],
                },
            }),
        }
    }
    out
}

/// Concatenate segments back into one path starting at `start`.
pub fn concat_segments(start: AnyState, segments: &[Segment]) -> Path {
    let mut p = Path::empty(start);
    for s in segments {
        p.extend(&s.path);
    }
    p
}

/// Execution speed of each controller, in ticks per unit of cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecRates {
    pub walk: u64,
    pub crawl: u64,
    pub fullbody: u64,
}

impl Default for ExecRates {
    fn default() -> Self {
        Self {
            walk: 20,
            crawl: 30,
            fullbody: 40,
        }
    }
}

impl ExecRates {
    pub fn of(&self, c: Controller) -> u64 {
        match c {
            Controller::Walk => self.walk,
            Controller::Crawl => self.crawl,
            Controller::FullBody => self.fullbody,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    /// The planner committed `edges` more edges ending at `end`.
    PathExtended {
        edges: usize,
        end: AnyState,
    },
    SegmentDispatched {
        segment: usize,
        controller: Controller,
    },
    WaypointReached {
        segment: usize,
        state: AnyState,
    },
    SegmentDone {
        segment: usize,
    },
    TrackingFailed {
        iteration: u32,
    },
    TrackingComplete,
    GoalReached,
    Abort {
        at: AnyState,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecEvent {
    pub tick: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Simulated executor state and the event log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecTrace {
    pub rates: ExecRates,
    pub events: Vec<ExecEvent>,
    /// Tick at which the executor finishes its current work.
    pub clock: u64,
    /// Ticks the executor spent waiting for work.
    pub idle: u64,
    pub segments: usize,
}

impl ExecTrace {
    pub fn new(rates: ExecRates) -> Self {
        Self {
            rates,
            events: Vec::new(),
            clock: 0,
            idle: 0,
            segments: 0,
        }
    }

    pub fn record(&mut self, tick: u64, kind: EventKind) {
        self.events.push(ExecEvent { tick, kind });
    }

    /// Run `segment` once it is available at `ready` and the executor is
    /// free. Returns the completion tick.
    pub fn execute(&mut self, segment: &Segment, ready: u64) -> u64 {
        if ready > self.clock {
            self.idle += ready - self.clock;
            self.clock = ready;
        }
        let id = self.segments;
        self.segments += 1;
        self.record(
            self.clock,
            EventKind::SegmentDispatched {
                segment: id,
                controller: segment.controller,
            },
        );
        let rate = self.rates.of(segment.controller);
        for e in &segment.path.edges {
            self.clock += e.cost * rate;
            self.record(
                self.clock,
                EventKind::WaypointReached {
                    segment: id,
                    state: e.to,
                },
            );
        }
        self.record(self.clock, EventKind::SegmentDone { segment: id });
        self.clock
    }

    /// Meta-controller: split a committed partial path and run its segments
    /// in order.
    pub fn dispatch(&mut self, partial: &Path, ready: u64) {
        for seg in split_segments(partial) {
            self.execute(&seg, ready);
        }
    }

    /// Events ordered by tick; ties keep their recording order.
    pub fn sorted(&self) -> Vec<ExecEvent> {
        let mut ev = self.events.clone();
        ev.sort_by_key(|e| e.tick);
        ev
    }

    pub fn first_tick(&self, pred: impl Fn(&EventKind) -> bool) -> Option<u64> {
        self.events.iter().filter(|e| pred(&e.kind)).map(|e| e.tick).min()
    }
}

/// Run one segment on the executor's own clock.
pub fn simulate_execute(trace: &mut ExecTrace, segment: &Segment) -> u64 {
    let ready = trace.clock;
    trace.execute(segment, ready)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaveParams {
    /// Tracking expansions per burst; `None` tracks to completion.
    pub lookahead: Option<u64>,
    pub rates: ExecRates,
    /// Run the executor on its own thread.
    pub threaded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterleaveResult {
    pub result: AdaptiveResult,
    /// Everything handed to the executor, in order.
    pub executed: Path,
    pub trace: ExecTrace,
    /// Planner tick at which tracking found the goal, if it did.
    pub tracking_complete: Option<u64>,
}

enum Message {
    Event(u64, EventKind),
    Commit(u64, Path),
    Finish,
}

/// Where the planner sends its output.
trait Executor {
    fn event(&mut self, tick: u64, kind: EventKind);
    fn commit(&mut self, tick: u64, partial: Path);
    /// The last committed edge ends at the goal.
    fn finish(&mut self);
}

impl Executor for ExecTrace {
    fn event(&mut self, tick: u64, kind: EventKind) {
        self.record(tick, kind);
    }

    fn commit(&mut self, tick: u64, partial: Path) {
        self.dispatch(&partial, tick);
    }

    fn finish(&mut self) {
        self.record(self.clock, EventKind::GoalReached);
    }
}

struct Remote {
    tx: mpsc::Sender<Message>,
    acks: mpsc::Receiver<u64>,
    acked: u64,
}

impl Executor for Remote {
    fn event(&mut self, tick: u64, kind: EventKind) {
        self.tx.send(Message::Event(tick, kind)).expect("executor alive");
    }

    fn commit(&mut self, tick: u64, partial: Path) {
        self.tx.send(Message::Commit(tick, partial)).expect("executor alive");
        while let Ok(done) = self.acks.try_recv() {
            self.acked = self.acked.max(done);
        }
    }

    fn finish(&mut self) {
        self.tx.send(Message::Finish).expect("executor alive");
    }
}

/// Plan with interleaved execution. With `lookahead = None` the final path
/// is the one [`crate::adaptive::plan_adaptive`] returns.
pub fn interleave_run(
    world: &World,
    costs: &CostTable,
    start: &HdState,
    goal: &GoalSpec,
    params: &AdaptivePlanParams,
    egraph: Option<&EGraph>,
    ip: &InterleaveParams,
) -> Result<InterleaveResult, PlanError> {
    if let Some(0) = ip.lookahead {
        panic!("lookahead must be positive");
    }
    if !ip.threaded {
        let mut trace = ExecTrace::new(ip.rates);
        let (result, executed, done) = drive(world, costs, start, goal, params, egraph, ip, &mut trace)?;
        trace.events = trace.sorted();
        return Ok(InterleaveResult {
            result,
            executed,
            trace,
            tracking_complete: done,
        });
    }
    let (tx, rx) = mpsc::channel::<Message>();
    let (ack_tx, ack_rx) = mpsc::channel::<u64>();
    let rates = ip.rates;
    std::thread::scope(|scope| {
        let worker = scope.spawn(move || {
            let mut trace = ExecTrace::new(rates);
            for msg in rx {
                match msg {
                    Message::Event(t, k) => trace.record(t, k),
                    Message::Commit(t, p) => {
                        trace.dispatch(&p, t);
                        let _ = ack_tx.send(trace.clock);
                    }
                    Message::Finish => trace.record(trace.clock, EventKind::GoalReached),
                }
            }
            trace.events = trace.sorted();
            trace
        });
        let mut remote = Remote {
            tx,
            acks: ack_rx,
            acked: 0,
        };
        let planned = drive(world, costs, start, goal, params, egraph, ip, &mut remote);
        log::debug!("executor acknowledged work up to tick {}", remote.acked);
        drop(remote);
        let trace = worker.join().expect("executor thread panicked");
        let (result, executed, done) = planned?;
        Ok(InterleaveResult {
            result,
            executed,
            trace,
            tracking_complete: done,
        })
    })
}

fn add_stats(acc: &mut SearchStats, s: &SearchStats) {
    if acc.expansions.len() < s.expansions.len() {
        acc.expansions.resize(s.expansions.len(), 0);
        acc.peak_open.resize(s.peak_open.len(), 0);
    }
    for (a, b) in acc.expansions.iter_mut().zip(&s.expansions) {
        *a += b;
    }
    for (a, b) in acc.peak_open.iter_mut().zip(&s.peak_open) {
        *a = (*a).max(*b);
    }
    acc.generated += s.generated;
}

#[allow(clippy::too_many_arguments)]
fn drive(
    world: &World,
    costs: &CostTable,
    start: &HdState,
    goal: &GoalSpec,
    params: &AdaptivePlanParams,
    egraph: Option<&EGraph>,
    ip: &InterleaveParams,
    exec: &mut dyn Executor,
) -> Result<(AdaptiveResult, Path, Option<u64>), PlanError> {
    check_query(world, start, goal)?;
    let heuristics = PlanHeuristics::new(world, costs, goal);
    let ectx = egraph.map(|eg| EGraphContext::new(world, costs, eg, goal, params.egraph));
    let mut graph = AdaptiveGraph::new(world, *costs, Vec::new());
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut executed = Path::empty((*start).into());
    let mut tail = *start;
    let mut tick = 0u64;
    let goal_test = |s: &AnyState| is_goal(goal, s);

    let abort = |exec: &mut dyn Executor, tick: u64, tail: HdState, executed: &Path| {
        if !executed.is_empty() {
            exec.event(tick, EventKind::Abort { at: tail.into() });
        }
    };

    for iteration in 1..=params.max_iterations.max(1) {
        let (phase1, plan_us) = timed(params.wall_clock, || {
            phase_one(&graph, &tail, goal, &heuristics, params)
        });
        let phase1 = phase1?;
        tick += phase1.stats.total_expansions();
        let track_start = params.wall_clock.then(std::time::Instant::now);
        let track_us = || track_start.map(|t| t.elapsed().as_micros() as u64);
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
            other => {
                iterations.push(record);
                abort(exec, tick, tail, &executed);
                let outcome = if other == SearchOutcome::Exhausted {
                    AdaptiveOutcome::NoPath
                } else {
                    AdaptiveOutcome::Timeout
                };
                return Ok((AdaptiveResult { outcome, iterations }, executed, None));
            }
        };
        let tunnel = build_tunnel(&pi_ad.states(), params.tunnel_width);
        let setup = TrackingSetup::new(world, costs, &tunnel, graph.regions(), goal, ectx.as_ref());
        let hs = setup.heuristics();
        let progress = |s: &AnyState| setup.progress(s);
        let mut remaining = params.track_budget;
        let mut stats = SearchStats::default();
        let failure: SearchResult = loop {
            let mut search = MrMha::new(
                &setup.graph,
                tail.into(),
                &goal_test,
                &hs,
                setup.lists(),
                params.track_search(),
            )?;
            let outcome = loop {
                let burst = ip.lookahead.unwrap_or(remaining).min(remaining);
                let before = search.stats().total_expansions();
                let status = search.run(burst)?;
                let used = search.stats().total_expansions() - before;
                tick += used;
                remaining -= used;
                match status {
                    RunStatus::Found => break Ok(search.goal_path().expect("goal found")),
                    RunStatus::Exhausted => break Err(search.result(status, &progress)),
                    RunStatus::Paused if remaining == 0 => break Err(search.result(status, &progress)),
                    RunStatus::Paused => {
                        let Some(front) = search.frontier(&progress) else {
                            continue;
                        };
                        if progress(&front) > progress(&tail.into()) {
                            let partial = search.path_to(&front).expect("frontier reached");
                            break Ok(partial);
                        }
                    }
                }
            };
            add_stats(&mut stats, search.stats());
            match outcome {
                Ok(partial) => {
                    let reached_goal = is_goal(goal, &partial.end());
                    exec.event(
                        tick,
                        EventKind::PathExtended {
                            edges: partial.len(),
                            end: partial.end(),
                        },
                    );
                    if reached_goal {
                        exec.event(tick, EventKind::TrackingComplete);
                    }
                    executed.extend(&partial);
                    tail = *partial.end().as_hd().expect("tracking yields full-body states");
                    exec.commit(tick, partial);
                    if reached_goal {
                        exec.finish();
                        record.tracking = Some(PhaseRecord {
                            outcome: PhaseOutcome::Path,
                            cost: Some(executed.cost()),
                            stats,
                            wall_micros: track_us(),
                        });
                        record.tunnel = Some(tunnel.clone());
                        iterations.push(record);
                        let cost = executed.cost();
                        let result = AdaptiveResult {
                            outcome: AdaptiveOutcome::Executable {
                                path: executed.clone(),
                                cost,
                            },
                            iterations,
                        };
                        return Ok((result, executed, Some(tick)));
                    }
                }
                Err(failed) => break failed,
            }
        };
        let region = select_region(&failure, &tunnel, params);
        exec.event(tick, EventKind::TrackingFailed { iteration });
        record.tracking = Some(PhaseRecord {
            stats,
            wall_micros: track_us(),
            ..PhaseRecord::of(&failure)
        });
        record.tunnel = Some(tunnel.clone());
        record.region_added = Some(region);
        iterations.push(record);
        graph = graph.add_hd_region(region);
    }
    abort(exec, tick, tail, &executed);
    Ok((
        AdaptiveResult {
            outcome: AdaptiveOutcome::IterationLimit,
            iterations,
        },
        executed,
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{Stance, Transition, TransitionKind};

    fn hd(x: i32, k: TransitionKind, cost: Cost) -> Transition {
        Transition::new(
            HdState::new(x, 0, 0, Stance::Stand, 0),
            HdState::new(x + 1, 0, 0, Stance::Stand, 0),
            cost,
            k,
        )
    }

    fn path(kinds: &[TransitionKind]) -> Path {
        Path {
            start: HdState::new(0, 0, 0, Stance::Stand, 0).into(),
            edges: kinds.iter().enumerate().map(|(i, &k)| hd(i as i32, k, 2)).collect(),
        }
    }

    const WALK: TransitionKind = TransitionKind::HdMacro(Controller::Walk);
    const CRAWL: TransitionKind = TransitionKind::HdMacro(Controller::Crawl);

    #[test]
    fn split_examples() {
        assert_eq!(split_segments(&path(&[WALK, WALK, CRAWL])).len(), 2);
        assert!(split_segments(&path(&[])).is_empty());
        let segs = split_segments(&path(&[WALK, TransitionKind::HdPrimitive, TransitionKind::Snap, WALK]));
        let ctrls: Vec<_> = segs.iter().map(|s| s.controller).collect();
        assert_eq!(ctrls, vec![Controller::Walk, Controller::FullBody, Controller::Walk]);
    }

    #[test]
    fn concat_inverts_split() {
        let p = path(&[WALK, TransitionKind::HdPrimitive, CRAWL, CRAWL]);
        assert_eq!(concat_segments(p.start, &split_segments(&p)), p);
    }

    #[test]
    fn execution_timing() {
        let rates = ExecRates {
            walk: 3,
            crawl: 1,
            fullbody: 1,
        };
        let mut trace = ExecTrace::new(rates);
        let p = Path {
            start: HdState::new(0, 0, 0, Stance::Stand, 0).into(),
            edges: (0..5).map(|i| hd(i, WALK, 2)).collect(),
        };
        let seg = &split_segments(&p)[0];
        assert_eq!(simulate_execute(&mut trace, seg), 30);

        let empty = Segment {
            controller: Controller::Walk,
            path: Path::empty(p.end()),
        };
        let mut t2 = ExecTrace::new(rates);
        t2.clock = 7;
        assert_eq!(simulate_execute(&mut t2, &empty), 7);
        assert_eq!(
            t2.events.last().unwrap(),
            &ExecEvent {
                tick: 7,
                kind: EventKind::SegmentDone { segment: 0 }
            }
        );

        let first_done = trace.clock;
        simulate_execute(&mut trace, seg);
        let second = trace
            .events
            .iter()
            .find(|e| {
                e.kind
                    == EventKind::SegmentDispatched {
                        segment: 1,
                        controller: Controller::Walk,
                    }
            })
            .unwrap();
        assert_eq!(second.tick, first_done);
    }
}

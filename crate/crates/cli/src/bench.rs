//! Batch runs over evenly spread start configurations.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use mrplan::adaptive::{plan_adaptive, AdaptiveOutcome, AdaptivePlanParams, PhaseOutcome};
use mrplan::egraph::EGraph;
use mrplan::{CostTable, GoalSpec, HdState, Stance, Terrain, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// One tick per expansion; fully reproducible.
    Sim,
    /// Seconds measured on the host.
    Wall,
}

/// Starts on a `stride` grid offset by `stride / 2`, skipping walls, with
/// all eight headings. The stance is the one the terrain allows.
pub fn bench_starts(w: &World, stride: usize) -> Vec<HdState> {
    let stride = stride.max(1);
    let off = stride / 2;
    let mut out = Vec::new();
    for y in (off..w.height()).step_by(stride) {
        for x in (off..w.width()).step_by(stride) {
            let (x, y) = (x as i32, y as i32);
            if w.terrain(x, y) == Terrain::Wall {
                continue;
            }
            let stance = if w.admits(x, y, Stance::Stand) {
                Stance::Stand
            } else {
                Stance::Crouch
            };
            out.extend((0..8).map(|theta| HdState::new(x, y, theta, stance, 0)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub id: usize,
    pub start: HdState,
    pub goal: GoalSpec,
    pub outcome: String,
    pub plan_success: bool,
    pub track_success: bool,
    /// In ticks or seconds depending on the clock.
    pub plan_time: f64,
    pub track_time: f64,
    /// Host time for the whole query, whatever the clock.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub goal: GoalSpec,
    pub queries: usize,
    pub plan_success_pct: f64,
    /// Relative to the queries whose first phase succeeded.
    pub track_success_pct: f64,
    pub plan_mean_time: f64,
    pub track_mean_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub clock: Clock,
    pub rows: Vec<BenchRow>,
    pub queries: Vec<QueryRecord>,
}

pub const CSV_HEADER: &str = "goal,plan_success_pct,track_success_pct,plan_mean_time,track_mean_time";

impl BenchReport {
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        // Ticks are large integers; seconds need more digits.
        let digits = match self.clock {
            Clock::Sim => 3,
            Clock::Wall => 6,
        };
        for r in &self.rows {
            writeln!(
                s,
                "\"({},{})\",{:.1},{:.1},{:.digits$},{:.digits$}",
                r.goal.x, r.goal.y, r.plan_success_pct, r.track_success_pct, r.plan_mean_time, r.track_mean_time
            )
            .unwrap();
        }
        s
    }
}

pub struct BenchInput<'a> {
    pub world: &'a World,
    pub costs: &'a CostTable,
    pub params: AdaptivePlanParams,
    pub egraph: Option<&'a EGraph>,
    pub goals: &'a [GoalSpec],
    pub stride: usize,
    pub clock: Clock,
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
}

fn run_query(input: &BenchInput, id: usize, start: HdState, goal: GoalSpec) -> QueryRecord {
    let mut params = input.params;
    params.wall_clock = input.clock == Clock::Wall;
    let t0 = std::time::Instant::now();
    let result = plan_adaptive(input.world, input.costs, &start, &goal, &params, input.egraph);
    let wall_seconds = t0.elapsed().as_secs_f64();
    let Ok(r) = result else {
        return QueryRecord {
            id,
            start,
            goal,
            outcome: "ERROR".into(),
            plan_success: false,
            track_success: false,
            plan_time: 0.0,
            track_time: 0.0,
            wall_seconds,
        };
    };
    let plan_success = r
        .iterations
        .first()
        .is_some_and(|i| i.plan.outcome == PhaseOutcome::Path);
    let track_success = matches!(r.outcome, AdaptiveOutcome::Executable { .. });
    let (plan_time, track_time) = match input.clock {
        Clock::Sim => (r.plan_expansions() as f64, r.track_expansions() as f64),
        Clock::Wall => {
            let us = |v: Option<u64>| v.unwrap_or(0) as f64 / 1e6;
            let plan: f64 = r.iterations.iter().map(|i| us(i.plan.wall_micros)).sum();
            let track: f64 = r
                .iterations
                .iter()
                .map(|i| us(i.tracking.as_ref().and_then(|t| t.wall_micros)))
                .sum();
            (plan, track)
        }
    };
    QueryRecord {
        id,
        start,
        goal,
        outcome: r.outcome.name().into(),
        plan_success,
        track_success,
        plan_time,
        track_time,
        wall_seconds,
    }
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Run every start against every goal. Rows follow the goal order and
/// query records are sorted by id, whatever the number of workers.
pub fn run_bench(input: &BenchInput) -> Result<BenchReport> {
    let starts = bench_starts(input.world, input.stride);
    let queries: Vec<(usize, HdState, GoalSpec)> = input
        .goals
        .iter()
        .flat_map(|g| starts.iter().map(move |s| (*s, *g)))
        .enumerate()
        .map(|(i, (s, g))| (i, s, g))
        .collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = input.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("cannot start worker pool")?;
    let mut records: Vec<QueryRecord> =
        pool.install(|| queries.par_iter().map(|&(i, s, g)| run_query(input, i, s, g)).collect());
    records.sort_by_key(|r| r.id);
    let rows = input
        .goals
        .iter()
        .map(|g| {
            let mine: Vec<&QueryRecord> = records.iter().filter(|r| r.goal == *g).collect();
            let planned: Vec<&&QueryRecord> = mine.iter().filter(|r| r.plan_success).collect();
            BenchRow {
                goal: *g,
                queries: mine.len(),
                plan_success_pct: pct(planned.len(), mine.len()),
                track_success_pct: pct(planned.iter().filter(|r| r.track_success).count(), planned.len()),
                plan_mean_time: mean(mine.iter().map(|r| r.plan_time)),
                track_mean_time: mean(planned.iter().map(|r| r.track_time)),
            }
        })
        .collect();
    Ok(BenchReport {
        clock: input.clock,
        rows,
        queries: records,
    })
}

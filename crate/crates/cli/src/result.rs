//! Self-contained result files.

use std::path::Path as FsPath;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mrplan::adaptive::{validate_path, AdaptiveOutcome, AdaptiveResult, IterationRecord};
use mrplan::egraph::Waypoint;
use mrplan::executive::ExecTrace;
use mrplan::{CostTable, GoalSpec, HdState, World};

use crate::scenario::{Params, Resolved};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Tool {
    pub fn current() -> Self {
        Self {
            name: "mrplan".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub iterations: usize,
    pub plan_expansions: u64,
    pub track_expansions: u64,
    /// Summed phase durations; present only for wall-clock runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan_wall_micros: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub track_wall_micros: Option<u64>,
}

impl Stats {
    pub fn of(r: &AdaptiveResult) -> Self {
        let sum = |f: &dyn Fn(&IterationRecord) -> Option<u64>| -> Option<u64> {
            let v: Vec<u64> = r.iterations.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum())
        };
        Self {
            iterations: r.iterations.len(),
            plan_expansions: r.plan_expansions(),
            track_expansions: r.track_expansions(),
            plan_wall_micros: sum(&|i| i.plan.wall_micros),
            track_wall_micros: sum(&|i| i.tracking.as_ref().and_then(|t| t.wall_micros)),
        }
    }
}

/// Everything needed to re-check a plan without the scenario: the map text,
/// cost table and query travel with the path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultFile {
    pub tool: Tool,
    pub outcome: AdaptiveOutcome,
    pub map: String,
    pub costs: CostTable,
    pub start: HdState,
    pub goal: GoalSpec,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demonstrations: Vec<Vec<Waypoint>>,
    pub stats: Stats,
    pub iterations: Vec<IterationRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exec_trace: Option<ExecTrace>,
}

impl ResultFile {
    pub fn new(r: &Resolved, result: AdaptiveResult, exec_trace: Option<ExecTrace>) -> Self {
        Self {
            tool: Tool::current(),
            stats: Stats::of(&result),
            outcome: result.outcome,
            map: r.map_text.clone(),
            costs: r.costs,
            start: r.start,
            goal: r.goal,
            params: r.params,
            demonstrations: r.demonstrations.clone(),
            iterations: result.iterations,
            exec_trace,
        }
    }

    pub fn world(&self) -> Result<World> {
        World::parse(&self.map).context("result file carries an invalid map")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("result serializes");
        s.push('\n');
        s
    }

    pub fn read(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read result {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("cannot parse result {}", path.display()))
    }

    pub fn write(&self, path: &FsPath) -> Result<()> {
        std::fs::write(path, self.to_json()).with_context(|| format!("cannot write {}", path.display()))
    }

    /// Re-check the stored path against the stored map and costs.
    pub fn validate(&self) -> Result<()> {
        let AdaptiveOutcome::Executable { path, cost } = &self.outcome else {
            bail!("outcome is {}, there is no path to validate", self.outcome.name());
        };
        if path.cost() != *cost {
            bail!("recorded cost {cost} differs from the path cost {}", path.cost());
        }
        let w = self.world()?;
        validate_path(
            &w,
            &self.costs,
            path,
            &self.start,
            &self.goal,
            self.params.snap_cost_per_field,
        )?;
        Ok(())
    }
}

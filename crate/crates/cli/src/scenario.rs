//! Scenario files: a map, a query and planner parameters.

use std::path::{Path as FsPath, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use mrplan::adaptive::AdaptivePlanParams;
use mrplan::egraph::{load_demonstrations, parse_demonstration, EGraph, EGraphParams, Waypoint};
use mrplan::maps::{gen_random_map, Densities};
use mrplan::mrmha::Weight;
use mrplan::{CostTable, GoalSpec, HdState, Stance, World};

/// Start configuration; `phase` defaults to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartSpec {
    pub x: i32,
    pub y: i32,
    #[serde(default)]
    pub theta: u8,
    #[serde(default = "stand")]
    pub stance: Stance,
    #[serde(default)]
    pub phase: u8,
}

fn stand() -> Stance {
    Stance::Stand
}

impl StartSpec {
    pub fn state(&self) -> HdState {
        HdState::new(self.x, self.y, self.theta, self.stance, self.phase)
    }

    /// `x,y[,theta[,stance[,phase]]]`
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 5 {
            bail!("start `{text}` must be x,y[,theta[,stance[,phase]]]");
        }
        let num = |i: usize| -> Result<i64> {
            parts[i]
                .parse::<i64>()
                .with_context(|| format!("start `{text}`: `{}` is not a number", parts[i]))
        };
        let theta = if parts.len() > 2 { num(2)? } else { 0 };
        let stance = match parts.get(3) {
            Some(s) => s.parse::<Stance>().map_err(anyhow::Error::msg)?,
            None => Stance::Stand,
        };
        let phase = if parts.len() > 4 { num(4)? } else { 0 };
        if !(0..8).contains(&theta) || !(0..4).contains(&phase) {
            bail!("start `{text}`: theta must be 0..7 and phase 0..3");
        }
        Ok(Self {
            x: num(0)? as i32,
            y: num(1)? as i32,
            theta: theta as u8,
            stance,
            phase: phase as u8,
        })
    }
}

impl From<HdState> for StartSpec {
    fn from(s: HdState) -> Self {
        Self {
            x: s.x,
            y: s.y,
            theta: s.theta,
            stance: s.stance,
            phase: s.phase,
        }
    }
}

/// `x,y`
pub fn parse_cell(text: &str) -> Result<GoalSpec> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [x, y] = parts[..] else {
        bail!("cell `{text}` must be x,y");
    };
    Ok(GoalSpec::new(
        x.parse().with_context(|| format!("bad x in `{text}`"))?,
        y.parse().with_context(|| format!("bad y in `{text}`"))?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomMap {
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub densities: Densities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub w1_plan: Weight,
    pub w2_plan: Weight,
    pub w1_track: Weight,
    pub w2_track: Weight,
    pub tunnel_width: u32,
    pub region_radius: u32,
    pub eps_e: Weight,
    pub snap_cost_per_field: u64,
    /// Tracking expansions per interleaving burst.
    pub lookahead: Option<u64>,
    pub budget_plan: u64,
    pub budget_track: u64,
    pub max_iterations: u32,
    pub seed: u64,
}

impl Default for Params {
    fn default() -> Self {
        let p = AdaptivePlanParams::default();
        Self {
            w1_plan: p.w1_plan,
            w2_plan: p.w2_plan,
            w1_track: p.w1_track,
            w2_track: p.w2_track,
            tunnel_width: p.tunnel_width,
            region_radius: p.region_radius,
            eps_e: p.egraph.eps_e,
            snap_cost_per_field: p.egraph.snap_cost_per_field,
            lookahead: None,
            budget_plan: p.plan_budget,
            budget_track: p.track_budget,
            max_iterations: p.max_iterations,
            seed: 0,
        }
    }
}

impl Params {
    pub fn check(&self) -> Result<()> {
        for (name, w) in [
            ("w1_plan", self.w1_plan),
            ("w2_plan", self.w2_plan),
            ("w1_track", self.w1_track),
            ("w2_track", self.w2_track),
            ("eps_e", self.eps_e),
        ] {
            if w < Weight::ONE {
                bail!("{name} must be at least 1, got {w}");
            }
        }
        if self.tunnel_width > 16 {
            bail!("tunnel_width must be at most 16");
        }
        if self.region_radius > 16 {
            bail!("region_radius must be at most 16");
        }
        if self.lookahead == Some(0) {
            bail!("lookahead must be positive");
        }
        if self.budget_plan == 0 || self.budget_track == 0 {
            bail!("budgets must be positive");
        }
        if self.max_iterations == 0 {
            bail!("max_iterations must be positive");
        }
        Ok(())
    }

    pub fn planner(&self) -> AdaptivePlanParams {
        AdaptivePlanParams {
            w1_plan: self.w1_plan,
            w2_plan: self.w2_plan,
            w1_track: self.w1_track,
            w2_track: self.w2_track,
            tunnel_width: self.tunnel_width,
            region_radius: self.region_radius,
            max_iterations: self.max_iterations,
            plan_budget: self.budget_plan,
            track_budget: self.budget_track,
            egraph: EGraphParams {
                eps_e: self.eps_e,
                snap_cost_per_field: self.snap_cost_per_field,
            },
            debug_checks: false,
            wall_clock: false,
        }
    }
}

/// On-disk scenario. Relative paths resolve against the scenario's own
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<PathBuf>,
    /// Generated from `params.seed` when no map file is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_map: Option<RandomMap>,
    pub start: StartSpec,
    pub goal: GoalSpec,
    /// Extra goals used by `bench`; `goal` is always the first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bench_goals: Vec<GoalSpec>,
    #[serde(default)]
    pub costs: CostTable,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demonstrations: Vec<PathBuf>,
}

impl Scenario {
    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read scenario {}", path.display()))?;
        let mut s: Scenario =
            serde_json::from_str(&text).with_context(|| format!("cannot parse scenario {}", path.display()))?;
        let base = path.parent().unwrap_or(FsPath::new("."));
        s.map = s.map.map(|m| base.join(m));
        s.demonstrations = s.demonstrations.iter().map(|d| base.join(d)).collect();
        Ok(s)
    }

    pub fn goals(&self) -> Vec<GoalSpec> {
        let mut g = vec![self.goal];
        g.extend(self.bench_goals.iter().filter(|b| **b != self.goal));
        g
    }

    /// Resolve files and check the query against the map.
    pub fn resolve(&self) -> Result<Resolved> {
        self.params.check()?;
        let costs = CostTable::new(self.costs).context("invalid cost table")?;
        let (world, map_text) = match (&self.map, &self.random_map) {
            (Some(path), _) => {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("cannot read map {}", path.display()))?;
                let w = World::parse(&text).with_context(|| format!("invalid map {}", path.display()))?;
                (w, text)
            }
            (None, Some(r)) => {
                let keep: Vec<(i32, i32)> = std::iter::once((self.start.x, self.start.y))
                    .chain(self.goals().iter().map(GoalSpec::cell))
                    .collect();
                let w = gen_random_map(self.params.seed, r.width, r.height, r.densities, &keep);
                let text = w.to_string();
                (w, text)
            }
            (None, None) => bail!("scenario names neither a map nor a random map"),
        };
        let mut demos = Vec::new();
        for (i, path) in self.demonstrations.iter().enumerate() {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read demonstration {}", path.display()))?;
            demos.push(parse_demonstration(i, &text).with_context(|| path.display().to_string())?);
        }
        let egraph = if demos.is_empty() {
            None
        } else {
            Some(load_demonstrations(&world, &costs, &demos).context("invalid demonstration")?)
        };
        Ok(Resolved {
            world,
            map_text,
            costs,
            start: self.start.state(),
            goal: self.goal,
            params: self.params,
            demonstrations: demos,
            egraph,
        })
    }
}

/// A scenario with every file loaded.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub world: World,
    pub map_text: String,
    pub costs: CostTable,
    pub start: HdState,
    pub goal: GoalSpec,
    pub params: Params,
    pub demonstrations: Vec<Vec<Waypoint>>,
    pub egraph: Option<EGraph>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn start_parsing() {
        let s = StartSpec::parse("3,4").unwrap();
        assert_eq!(s.state(), HdState::new(3, 4, 0, Stance::Stand, 0));
        let s = StartSpec::parse("3, 4, 2, crouch, 1").unwrap();
        assert_eq!(s.state(), HdState::new(3, 4, 2, Stance::Crouch, 1));
        assert!(StartSpec::parse("3").is_err());
        assert!(StartSpec::parse("3,4,9").is_err());
    }

    #[test]
    fn minimal_scenario_uses_defaults() {
        let s: Scenario =
            serde_json::from_str(r#"{"map":"m.map","start":{"x":1,"y":2},"goal":{"x":5,"y":2}}"#).unwrap();
        assert_eq!(s.params, Params::default());
        assert_eq!(s.costs, CostTable::default());
        assert_eq!(s.start.stance, Stance::Stand);
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let r: Result<Scenario, _> =
            serde_json::from_str(r#"{"map":"m","start":{"x":1,"y":2},"goal":{"x":5,"y":2},"params":{"w3":1}}"#);
        assert!(r.is_err());
    }

    #[test]
    fn weights_below_one_are_rejected() {
        assert!("1/2".parse::<Weight>().is_err());
        let r: Result<Scenario, _> = serde_json::from_str(
            r#"{"map":"m","start":{"x":1,"y":2},"goal":{"x":5,"y":2},"params":{"w1_plan":"1/2"}}"#,
        );
        assert!(r.is_err());
        let p = Params {
            lookahead: Some(0),
            ..Params::default()
        };
        assert!(p.check().is_err());
    }
}

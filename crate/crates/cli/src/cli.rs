use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mrplan::adaptive::{plan_adaptive, AdaptiveOutcome};
use mrplan::executive::{interleave_run, ExecRates, InterleaveParams};
use mrplan::mrmha::Weight;
use mrplan::World;

use crate::bench::{run_bench, BenchInput, Clock};
use crate::oracle::run_oracle;
use crate::render::render_svg;
use crate::result::ResultFile;
use crate::scenario::{parse_cell, Params, Scenario, StartSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_PATH: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mrplan", version, about = "Multi-representation adaptive planner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plan one query and write a result file.
    Plan(PlanArgs),
    /// Run many starts against one or more goals and print a CSV table.
    Bench(BenchArgs),
    /// Brute-force optimal cost over the full state space.
    Oracle(OracleArgs),
    /// Re-check the path stored in a result file.
    Validate(ValidateArgs),
    /// Draw a result file (or a bare map) as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args, Default)]
pub struct QueryArgs {
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// x,y[,theta[,stance[,phase]]]
    #[arg(long)]
    pub start: Option<String>,
    /// x,y
    #[arg(long)]
    pub goal: Option<String>,
    /// Demonstration file; repeatable.
    #[arg(long = "demo")]
    pub demos: Vec<PathBuf>,
    #[command(flatten)]
    pub params: ParamArgs,
}

#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Heuristic inflation for both phases.
    #[arg(long)]
    pub w1: Option<Weight>,
    /// Anchor slack for both phases.
    #[arg(long)]
    pub w2: Option<Weight>,
    #[arg(long)]
    pub w1_plan: Option<Weight>,
    #[arg(long)]
    pub w2_plan: Option<Weight>,
    #[arg(long)]
    pub w1_track: Option<Weight>,
    #[arg(long)]
    pub w2_track: Option<Weight>,
    #[arg(long)]
    pub tunnel_width: Option<u32>,
    #[arg(long)]
    pub region_radius: Option<u32>,
    #[arg(long)]
    pub eps_egraph: Option<Weight>,
    #[arg(long)]
    pub lookahead: Option<u64>,
    #[arg(long)]
    pub budget_plan: Option<u64>,
    #[arg(long)]
    pub budget_track: Option<u64>,
    #[arg(long)]
    pub max_iterations: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ParamArgs {
    fn apply(&self, p: &mut Params) {
        let set = |dst: &mut Weight, v: Option<Weight>| {
            if let Some(v) = v {
                *dst = v;
            }
        };
        set(&mut p.w1_plan, self.w1);
        set(&mut p.w1_track, self.w1);
        set(&mut p.w2_plan, self.w2);
        set(&mut p.w2_track, self.w2);
        set(&mut p.w1_plan, self.w1_plan);
        set(&mut p.w2_plan, self.w2_plan);
        set(&mut p.w1_track, self.w1_track);
        set(&mut p.w2_track, self.w2_track);
        set(&mut p.eps_e, self.eps_egraph);
        p.tunnel_width = self.tunnel_width.unwrap_or(p.tunnel_width);
        p.region_radius = self.region_radius.unwrap_or(p.region_radius);
        p.lookahead = self.lookahead.or(p.lookahead);
        p.budget_plan = self.budget_plan.unwrap_or(p.budget_plan);
        p.budget_track = self.budget_track.unwrap_or(p.budget_track);
        p.max_iterations = self.max_iterations.unwrap_or(p.max_iterations);
        p.seed = self.seed.unwrap_or(p.seed);
    }
}

impl QueryArgs {
    /// Scenario file (if any) with command-line overrides applied.
    pub fn scenario(&self, need_start: bool) -> Result<Scenario> {
        let mut s = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => {
                let Some(goal) = &self.goal else {
                    bail!("either --scenario or --goal is required")
                };
                if self.map.is_none() {
                    bail!("either --scenario or --map is required");
                }
                let start = match &self.start {
                    Some(s) => StartSpec::parse(s)?,
                    None if need_start => bail!("--start is required without --scenario"),
                    None => StartSpec::parse("0,0")?,
                };
                Scenario {
                    map: None,
                    random_map: None,
                    start,
                    goal: parse_cell(goal)?,
                    bench_goals: Vec::new(),
                    costs: Default::default(),
                    params: Params::default(),
                    demonstrations: Vec::new(),
                }
            }
        };
        if let Some(m) = &self.map {
            s.map = Some(m.clone());
            s.random_map = None;
        }
        if let Some(st) = &self.start {
            s.start = StartSpec::parse(st)?;
        }
        if let (Some(g), Some(_)) = (&self.goal, &self.scenario) {
            s.goal = parse_cell(g)?;
        }
        s.demonstrations.extend(self.demos.iter().cloned());
        self.params.apply(&mut s.params);
        Ok(s)
    }
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Result file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// SVG file to write.
    #[arg(long)]
    pub render: Option<PathBuf>,
    /// Interleave tracking with simulated execution.
    #[arg(long)]
    pub interleave: bool,
    /// Run the simulated executor on its own thread.
    #[arg(long, requires = "interleave")]
    pub threaded: bool,
    /// Record wall-clock phase durations in the result.
    #[arg(long, value_enum, default_value = "sim")]
    pub clock: Clock,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long, default_value_t = 4)]
    pub stride: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Additional goal cells (x,y); repeatable.
    #[arg(long = "bench-goal")]
    pub bench_goals: Vec<String>,
    #[arg(long, value_enum, default_value = "sim")]
    pub clock: Clock,
    /// CSV file to write instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-query records as JSON.
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub query: QueryArgs,
    /// Accept maps above the size limit.
    #[arg(long)]
    pub allow_large: bool,
    /// Print a JSON report with a summary of the optimal route.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub result: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long, conflicts_with = "map", required_unless_present = "map")]
    pub result: Option<PathBuf>,
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn outcome_code(o: &AdaptiveOutcome) -> i32 {
    match o {
        AdaptiveOutcome::Executable { .. } => EXIT_OK,
        AdaptiveOutcome::NoPath => EXIT_NO_PATH,
        AdaptiveOutcome::IterationLimit | AdaptiveOutcome::Timeout => EXIT_LIMIT,
    }
}

fn cmd_plan(a: &PlanArgs) -> Result<i32> {
    let scenario = a.query.scenario(true)?;
    let r = scenario.resolve()?;
    let mut params = r.params.planner();
    params.wall_clock = a.clock == Clock::Wall;
    let (result, trace) = if a.interleave {
        let ip = InterleaveParams {
            lookahead: r.params.lookahead,
            rates: ExecRates::default(),
            threaded: a.threaded,
        };
        let out = interleave_run(&r.world, &r.costs, &r.start, &r.goal, &params, r.egraph.as_ref(), &ip)?;
        (out.result, Some(out.trace))
    } else {
        (
            plan_adaptive(&r.world, &r.costs, &r.start, &r.goal, &params, r.egraph.as_ref())?,
            None,
        )
    };
    let file = ResultFile::new(&r, result, trace);
    let cost = file
        .outcome
        .path()
        .map(|p| p.cost().to_string())
        .unwrap_or_else(|| "-".into());
    println!(
        "{} cost {} iterations {} plan_expansions {} track_expansions {}",
        file.outcome.name(),
        cost,
        file.stats.iterations,
        file.stats.plan_expansions,
        file.stats.track_expansions
    );
    if let Some(out) = &a.out {
        file.write(out)?;
    }
    if let Some(svg) = &a.render {
        let regions = regions_of(&file);
        std::fs::write(svg, render_svg(&r.world, file.outcome.path(), &regions))
            .with_context(|| format!("cannot write {}", svg.display()))?;
    }
    Ok(outcome_code(&file.outcome))
}

fn regions_of(f: &ResultFile) -> Vec<mrplan::HdRegion> {
    let mut out = f.iterations.first().map(|r| r.regions.clone()).unwrap_or_default();
    out.extend(f.iterations.iter().filter_map(|r| r.region_added));
    out
}

fn cmd_bench(a: &BenchArgs) -> Result<i32> {
    let scenario = a.query.scenario(false)?;
    let r = scenario.resolve()?;
    let mut goals = scenario.goals();
    for g in &a.bench_goals {
        let g = parse_cell(g)?;
        if !goals.contains(&g) {
            goals.push(g);
        }
    }
    let report = run_bench(&BenchInput {
        world: &r.world,
        costs: &r.costs,
        params: r.params.planner(),
        egraph: r.egraph.as_ref(),
        goals: &goals,
        stride: a.stride,
        clock: a.clock,
        jobs: a.jobs,
    })?;
    let csv = report.csv();
    match &a.out {
        Some(p) => std::fs::write(p, &csv).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{csv}"),
    }
    if let Some(p) = &a.queries {
        let text = serde_json::to_string_pretty(&report.queries)?;
        std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs) -> Result<i32> {
    let scenario = a.query.scenario(true)?;
    let r = scenario.resolve()?;
    let report = run_oracle(&r.world, &r.costs, &r.start, &r.goal, a.allow_large)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("{}", report.line());
    }
    Ok(if report.cost.is_some() { EXIT_OK } else { EXIT_NO_PATH })
}

fn cmd_validate(a: &ValidateArgs) -> Result<i32> {
    let f = ResultFile::read(&a.result)?;
    f.validate()?;
    println!("ok");
    Ok(EXIT_OK)
}

fn cmd_render(a: &RenderArgs) -> Result<i32> {
    let svg = match (&a.result, &a.map) {
        (Some(p), _) => {
            let f = ResultFile::read(p)?;
            render_svg(&f.world()?, f.outcome.path(), &regions_of(&f))
        }
        (None, Some(m)) => {
            let text = std::fs::read_to_string(m).with_context(|| format!("cannot read map {}", m.display()))?;
            render_svg(&World::parse(&text)?, None, &[])
        }
        (None, None) => bail!("either --result or --map is required"),
    };
    std::fs::write(&a.out, svg).with_context(|| format!("cannot write {}", a.out.display()))?;
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Render(a) => cmd_render(a),
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

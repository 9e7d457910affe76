use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prioplan::harness::experiment::{
    aggregate, parse_ssi, run_experiment, write_aggregate_csv, write_runs_csv, MapSource, MethodKind,
};
use prioplan::harness::formats::{format_solution, parse_scenario, parse_solution};
use prioplan::harness::metrics::metrics;
use prioplan::harness::validate::{validate_solution, validate_start_protection};
use prioplan::prioritized::solve;
use prioplan::{Clock, Connectivity, ExperimentConfig, GridMap, Instance, MoveModel, OrderingPolicy, TimeCap};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "prioplan", version, about = "Prioritized planning for disk robots on grid maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write its solution.
    Solve(SolveArgs),
    /// Run an experiment sweep and write per-run and aggregate CSVs.
    Bench(BenchArgs),
    /// Check a solution file against its scenario.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, default_value = "8", value_parser = parse_connect)]
    connect: Connectivity,
    #[arg(long, default_value_t = 0.499999)]
    radius: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    /// Solution file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "0", value_parser = parse_ssi_arg)]
    ssi: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Det)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Shortest)]
    policy: PolicyArg,
    #[arg(long, default_value_t = 300.0)]
    time_cap: f64,
    #[arg(long, value_enum, default_value_t = ClockArg::Wall)]
    clock: ClockArg,
    /// Seed of the random method.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML file with any of the sweep settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `warehouse`, `empty:WxH` or a map file.
    #[arg(long)]
    map: Option<String>,
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<usize>>,
    #[arg(long)]
    instances: Option<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_ssi_arg)]
    ssi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', value_enum)]
    method: Option<Vec<MethodArg>>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    #[arg(long)]
    time_cap: Option<f64>,
    #[arg(long, value_enum)]
    clock: Option<ClockArg>,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_parser = parse_connect)]
    connect: Option<Connectivity>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Also check that no robot enters another's start disk before k.
    #[arg(long, default_value = "0", value_parser = parse_ssi_arg)]
    ssi: f64,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    None,
    Det,
    Rand,
}

impl From<MethodArg> for MethodKind {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::None => MethodKind::None,
            MethodArg::Det => MethodKind::Deterministic,
            MethodArg::Rand => MethodKind::Random,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Shortest,
    Longest,
}

impl From<PolicyArg> for OrderingPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Shortest => OrderingPolicy::ShortestFirst,
            PolicyArg::Longest => OrderingPolicy::LongestFirst,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Wall,
    Work,
}

impl From<ClockArg> for Clock {
    fn from(c: ClockArg) -> Self {
        match c {
            ClockArg::Wall => Clock::Wall,
            ClockArg::Work => Clock::Work,
        }
    }
}

fn parse_ssi_arg(s: &str) -> Result<f64, String> {
    parse_ssi(s).map_err(|e| e.to_string())
}

fn parse_connect(s: &str) -> Result<Connectivity, String> {
    s.parse().ok().and_then(Connectivity::from_degree).ok_or_else(|| format!("expected 4 or 8, got {s:?}"))
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BenchFile {
    map: Option<String>,
    agents: Option<Vec<usize>>,
    instances: Option<usize>,
    ssi: Option<Vec<toml::Value>>,
    methods: Option<Vec<String>>,
    policy: Option<String>,
    time_cap: Option<f64>,
    clock: Option<String>,
    connect: Option<u32>,
    radius: Option<f64>,
    repeats: Option<usize>,
    jobs: Option<usize>,
}

/// Failure modes mapped to exit codes.
enum Failure {
    /// Bad flags, unreadable or malformed input, unwritable output.
    Input(String),
    /// The planner gave up or the checker found a violation.
    Negative,
}

fn input<T>(what: &Path, r: prioplan::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(format!("{}: {e}", what.display())))
}

fn load_instance(map: &Path, scen: &Path, model: &ModelArgs) -> Result<Instance, Failure> {
    let grid = input(map, GridMap::from_file(map))?;
    let text = input(scen, fs::read_to_string(scen).map_err(Into::into))?;
    let robots = input(scen, parse_scenario(&text))?;
    input(scen, Instance::new(grid, robots, MoveModel::new(model.connect, model.radius)))
}

fn run_solve(a: SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.map, &a.scen, &a.model)?;
    let method = MethodKind::from(a.method).with_seed(a.seed);
    let cap = TimeCap { seconds: a.time_cap, clock: a.clock.into() };
    if !(a.time_cap > 0.0) {
        return Err(Failure::Input("time cap must be positive".into()));
    }
    eprintln!("solving {} robots on a {}x{} map", inst.len(), inst.map().width(), inst.map().height());
    let res = solve(&inst, method, a.policy.into(), a.ssi, cap).map_err(|e| Failure::Input(e.to_string()))?;
    if !res.is_success() {
        if res.timed_out {
            eprintln!("time cap reached after {} attempts", res.attempts);
        } else if let Some(r) = res.failed_robot {
            eprintln!("no solution; robot {r} failed in the last of {} attempts", res.attempts);
        }
        println!("SR=0 t={:.6} Msp= Flt= attempts={}", res.elapsed, res.attempts);
        return Err(Failure::Negative);
    }
    let text = format_solution(&res.trajectories);
    match &a.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    let (msp, flt) = metrics(&res.trajectories);
    println!("SR=1 t={:.6} Msp={msp:.6} Flt={flt:.6} attempts={}", res.elapsed, res.attempts);
    Ok(())
}

fn run_validate(a: ValidateArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.map, &a.scen, &a.model)?;
    let text = input(&a.solution, fs::read_to_string(&a.solution).map_err(Into::into))?;
    let trajs = input(&a.solution, parse_solution(&text))?;
    if trajs.is_empty() && !inst.is_empty() {
        return Err(Failure::Input(format!("{}: no trajectories for {} robots", a.solution.display(), inst.len())));
    }
    let checked = validate_solution(&inst, &trajs).and_then(|_| validate_start_protection(&inst, &trajs, a.ssi));
    match checked {
        Ok(()) => {
            println!("valid");
            Ok(())
        }
        Err(v) => {
            println!("{v}");
            Err(Failure::Negative)
        }
    }
}

fn bench_config(a: &BenchArgs) -> Result<ExperimentConfig, Failure> {
    let file: BenchFile = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?
        }
        None => BenchFile::default(),
    };
    let bad = |m: String| Failure::Input(m);
    let map = a.map.clone().or(file.map).unwrap_or_else(|| "warehouse".into());
    let mut cfg = ExperimentConfig::new(map.parse::<MapSource>().map_err(|e| bad(e.to_string()))?, a.seed);
    if let Some(v) = a.agents.clone().or(file.agents) {
        cfg.agents = v;
    }
    if let Some(v) = a.instances.or(file.instances) {
        cfg.instances = v;
    }
    if let Some(v) = &a.ssi {
        cfg.ssi = v.clone();
    } else if let Some(v) = file.ssi {
        cfg.ssi = v
            .iter()
            .map(|x| match x {
                toml::Value::String(s) => parse_ssi(s),
                toml::Value::Integer(i) => parse_ssi(&i.to_string()),
                toml::Value::Float(f) => parse_ssi(&f.to_string()),
                other => parse_ssi(&other.to_string()),
            })
            .collect::<prioplan::Result<_>>()
            .map_err(|e| bad(e.to_string()))?;
    }
    if let Some(v) = &a.method {
        cfg.methods = v.iter().map(|&m| m.into()).collect();
    } else if let Some(v) = file.methods {
        cfg.methods = v.iter().map(|m| m.parse()).collect::<prioplan::Result<_>>().map_err(|e| bad(e.to_string()))?;
    }
    if let Some(p) = a.policy {
        cfg.policy = p.into();
    } else if let Some(p) = file.policy {
        cfg.policy = PolicyArg::from_str(&p, true).map_err(bad)?.into();
    }
    if let Some(v) = a.time_cap.or(file.time_cap) {
        cfg.time_cap = v;
    }
    if let Some(c) = a.clock {
        cfg.clock = c.into();
    } else if let Some(c) = file.clock {
        cfg.clock = ClockArg::from_str(&c, true).map_err(bad)?.into();
    }
    if let Some(c) = a.connect {
        cfg.connectivity = c;
    } else if let Some(k) = file.connect {
        cfg.connectivity = Connectivity::from_degree(k).ok_or_else(|| bad(format!("connect must be 4 or 8, got {k}")))?;
    }
    if let Some(v) = a.radius.or(file.radius) {
        cfg.radius = v;
    }
    if let Some(v) = a.repeats.or(file.repeats) {
        cfg.repeats = v;
    }
    if let Some(v) = a.jobs.or(file.jobs) {
        cfg.jobs = v;
    }
    cfg.check().map_err(|e| bad(e.to_string()))?;
    Ok(cfg)
}

fn run_bench(a: BenchArgs) -> Result<(), Failure> {
    let cfg = bench_config(&a)?;
    let out = run_experiment(&cfg).map_err(|e| Failure::Input(e.to_string()))?;
    let create = |name: &str| {
        let p = a.out_dir.join(name);
        fs::File::create(&p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))
    };
    let io = |e: prioplan::Error| Failure::Input(e.to_string());
    write_runs_csv(&out.records, create("runs.csv")?).map_err(io)?;
    let aggs = aggregate(&out.records);
    write_aggregate_csv(&aggs, create("aggregate.csv")?).map_err(io)?;
    for (rec, v) in &out.violations {
        eprintln!("checker: {} agents, instance {}, {}: {v}", rec.agents, rec.instance, rec.method);
    }
    for g in &aggs {
        eprintln!(
            "{} agents={} ssi={} method={} SR={:.3}",
            g.map,
            g.agents,
            prioplan::harness::experiment::format_ssi(g.ssi),
            g.method,
            g.success_rate()
        );
    }
    println!("runs={} violations={}", out.records.len(), out.violations.len());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Negative) => ExitCode::from(2),
    }
}

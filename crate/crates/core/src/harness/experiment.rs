//! Factorial experiment driver and CSV output.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Connectivity, GridMap, MoveModel};
use crate::harness::generate::{generate_instance, GeneratorOptions};
use crate::harness::maps::{builtin_empty, builtin_warehouse};
use crate::harness::metrics::metrics;
use crate::harness::validate::{validate_solution, validate_start_protection, Violation};
use crate::prioritized::{solve, Clock, Instance, Method, OrderingPolicy, TimeCap};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

pub const RUN_HEADER: [&str; 11] =
    ["map", "agents", "ssi", "method", "seed", "repeat", "success", "runtime_s", "makespan", "flowtime", "attempts"];
pub const AGGREGATE_HEADER: [&str; 9] =
    ["map", "agents", "ssi", "method", "runs", "success_rate", "mean_runtime_s", "mean_makespan", "mean_flowtime"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MapSource {
    File(PathBuf),
    Empty { width: usize, height: usize },
    Warehouse,
}

impl MapSource {
    pub fn load(&self) -> Result<GridMap> {
        match self {
            MapSource::File(p) => GridMap::from_file(p),
            MapSource::Empty { width, height } => Ok(builtin_empty(*width, *height)),
            MapSource::Warehouse => Ok(builtin_warehouse()),
        }
    }

    /// Short name used in the `map` CSV column.
    pub fn id(&self) -> String {
        match self {
            MapSource::File(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            MapSource::Empty { width, height } => format!("empty{width}x{height}"),
            MapSource::Warehouse => "warehouse".into(),
        }
    }
}

impl FromStr for MapSource {
    type Err = Error;

    /// `warehouse`, `empty:WxH`, or a map file path.
    fn from_str(s: &str) -> Result<Self> {
        if s == "warehouse" {
            return Ok(MapSource::Warehouse);
        }
        if let Some(dims) = s.strip_prefix("empty:") {
            let parsed = dims
                .split_once('x')
                .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
                .filter(|&(w, h): &(usize, usize)| w > 0 && h > 0);
            return match parsed {
                Some((width, height)) => Ok(MapSource::Empty { width, height }),
                None => Err(Error::Config(format!("bad empty map size {dims:?}, expected WxH"))),
            };
        }
        Ok(MapSource::File(PathBuf::from(s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MethodKind {
    None,
    Deterministic,
    Random,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::None => "none",
            MethodKind::Deterministic => "det",
            MethodKind::Random => "rand",
        }
    }

    pub fn with_seed(self, seed: u64) -> Method {
        match self {
            MethodKind::None => Method::NoRescheduling,
            MethodKind::Deterministic => Method::Deterministic,
            MethodKind::Random => Method::Random { seed },
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(MethodKind::None),
            "det" | "deterministic" => Ok(MethodKind::Deterministic),
            "rand" | "random" => Ok(MethodKind::Random),
            _ => Err(Error::Config(format!("unknown method {s:?}, expected none, det or rand"))),
        }
    }
}

/// Parses an SSI endpoint: a non-negative number or `inf`.
pub fn parse_ssi<S: Scalar>(s: &str) -> Result<S> {
    let s = s.trim();
    if matches!(s, "inf" | "infinity" | "∞") {
        return Ok(S::infinity());
    }
    match s.parse::<f64>() {
        Ok(k) if k >= 0.0 && k.is_finite() => Ok(S::lit(k)),
        _ => Err(Error::Config(format!("bad ssi value {s:?}, expected a non-negative number or inf"))),
    }
}

pub fn format_ssi<S: Scalar>(k: S) -> String {
    if k.is_infinite() {
        "inf".into()
    } else {
        format!("{}", k.to_f64_lossy())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig<S> {
    pub map: MapSource,
    pub agents: Vec<usize>,
    pub instances: usize,
    pub ssi: Vec<S>,
    pub methods: Vec<MethodKind>,
    pub policy: OrderingPolicy,
    pub time_cap: f64,
    /// Defaults to the work clock so that reruns are byte-identical.
    pub clock: Clock,
    pub base_seed: u64,
    pub connectivity: Connectivity,
    pub radius: S,
    /// Runs per instance of the random method.
    pub repeats: usize,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl<S: Scalar> ExperimentConfig<S> {
    pub fn new(map: MapSource, base_seed: u64) -> Self {
        Self {
            map,
            agents: vec![1],
            instances: 1,
            ssi: vec![S::zero()],
            methods: vec![MethodKind::Deterministic],
            policy: OrderingPolicy::default(),
            time_cap: 300.0,
            clock: Clock::Work,
            base_seed,
            connectivity: Connectivity::Eight,
            radius: S::lit(0.499999),
            repeats: 10,
            jobs: 0,
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.agents.is_empty() || self.agents.contains(&0) {
            return bad("agent counts must be a non-empty list of positive numbers");
        }
        if self.instances == 0 {
            return bad("instances must be at least 1");
        }
        if self.ssi.is_empty() || self.ssi.iter().any(|k| !(*k >= S::zero())) {
            return bad("ssi must be a non-empty list of non-negative values");
        }
        if self.methods.is_empty() {
            return bad("at least one method is required");
        }
        if !(self.time_cap > 0.0) {
            return bad("time cap must be positive");
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if !(self.radius > S::zero() && self.radius < S::half()) {
            return bad("radius must lie in (0, 0.5)");
        }
        Ok(())
    }

    pub fn model(&self) -> MoveModel<S> {
        MoveModel::new(self.connectivity, self.radius)
    }

    pub fn instance_seed(&self, agents: usize, index: usize) -> u64 {
        derive_seed(&[self.base_seed, agents as u64, index as u64])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<S> {
    pub map: String,
    pub agents: usize,
    pub ssi: S,
    pub method: MethodKind,
    /// Index of the instance within its agent count.
    pub instance: usize,
    pub seed: u64,
    pub repeat: usize,
    pub success: bool,
    pub runtime: f64,
    pub makespan: Option<S>,
    pub flowtime: Option<S>,
    pub attempts: usize,
    pub timed_out: bool,
}

impl<S: Scalar> RunRecord<S> {
    /// Whether the first ordering tried did not solve the instance.
    pub fn first_attempt_failed(&self) -> bool {
        !self.success || self.attempts > 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate<S> {
    pub map: String,
    pub agents: usize,
    pub ssi: S,
    pub method: MethodKind,
    pub runs: usize,
    pub successes: usize,
    pub mean_runtime: Option<f64>,
    pub mean_makespan: Option<f64>,
    pub mean_flowtime: Option<f64>,
}

impl<S> Aggregate<S> {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput<S> {
    /// Sorted by agent count, ssi, method, instance, repeat, each in the
    /// order given by the config.
    pub records: Vec<RunRecord<S>>,
    /// Checker findings on successful runs; expected to stay empty.
    pub violations: Vec<(RunRecord<S>, Violation)>,
}

struct Task {
    agents_idx: usize,
    instance: usize,
    ssi_idx: usize,
    method_idx: usize,
    repeat: usize,
}

/// Runs the full factorial of `cfg`. Every successful run is checked with
/// the independent validator.
pub fn run_experiment<S: Scalar>(cfg: &ExperimentConfig<S>) -> Result<ExperimentOutput<S>> {
    cfg.check()?;
    let map = cfg.map.load()?;
    let map_id = cfg.map.id();
    let model = cfg.model();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let cells: Vec<(usize, usize)> =
        (0..cfg.agents.len()).flat_map(|a| (0..cfg.instances).map(move |i| (a, i))).collect();
    let instances: Vec<Instance<S>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, i)| {
                let n = cfg.agents[a];
                generate_instance(&map, n, model, cfg.instance_seed(n, i), GeneratorOptions::default())
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut tasks = Vec::new();
    for agents_idx in 0..cfg.agents.len() {
        for ssi_idx in 0..cfg.ssi.len() {
            for (method_idx, m) in cfg.methods.iter().enumerate() {
                let repeats = if *m == MethodKind::Random { cfg.repeats } else { 1 };
                for instance in 0..cfg.instances {
                    for repeat in 0..repeats {
                        tasks.push(Task { agents_idx, instance, ssi_idx, method_idx, repeat });
                    }
                }
            }
        }
    }

    let cap = TimeCap { seconds: cfg.time_cap, clock: cfg.clock };
    let results: Vec<(RunRecord<S>, Option<Violation>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|t| {
                let inst = &instances[t.agents_idx * cfg.instances + t.instance];
                let agents = cfg.agents[t.agents_idx];
                let seed = cfg.instance_seed(agents, t.instance);
                let ssi = cfg.ssi[t.ssi_idx];
                let kind = cfg.methods[t.method_idx];
                let method = kind.with_seed(derive_seed(&[seed, t.repeat as u64]));
                let res = solve(inst, method, cfg.policy, ssi, cap)?;
                let (makespan, flowtime) = if res.is_success() {
                    let (m, f) = metrics(&res.trajectories);
                    (Some(m), Some(f))
                } else {
                    (None, None)
                };
                let violation = if res.is_success() {
                    validate_solution(inst, &res.trajectories)
                        .and_then(|_| validate_start_protection(inst, &res.trajectories, ssi))
                        .err()
                } else {
                    None
                };
                let record = RunRecord {
                    map: map_id.clone(),
                    agents,
                    ssi,
                    method: kind,
                    instance: t.instance,
                    seed,
                    repeat: t.repeat,
                    success: res.is_success(),
                    runtime: res.elapsed,
                    makespan,
                    flowtime,
                    attempts: res.attempts,
                    timed_out: res.timed_out,
                };
                Ok((record, violation))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut records = Vec::with_capacity(results.len());
    let mut violations = Vec::new();
    for (rec, v) in results {
        if let Some(v) = v {
            violations.push((rec.clone(), v));
        }
        records.push(rec);
    }
    Ok(ExperimentOutput { records, violations })
}

/// Per-cell summary, keeping the record order of first appearance.
pub fn aggregate<S: Scalar>(records: &[RunRecord<S>]) -> Vec<Aggregate<S>> {
    let mut order: Vec<Aggregate<S>> = Vec::new();
    let mut sums: Vec<(f64, f64, f64)> = Vec::new();
    let mut index: BTreeMap<(usize, String, u64, MethodKind), usize> = BTreeMap::new();
    for r in records {
        let key = (r.agents, r.map.clone(), r.ssi.to_f64_lossy().to_bits(), r.method);
        let k = *index.entry(key).or_insert_with(|| {
            order.push(Aggregate {
                map: r.map.clone(),
                agents: r.agents,
                ssi: r.ssi,
                method: r.method,
                runs: 0,
                successes: 0,
                mean_runtime: None,
                mean_makespan: None,
                mean_flowtime: None,
            });
            sums.push((0.0, 0.0, 0.0));
            order.len() - 1
        });
        order[k].runs += 1;
        if r.success {
            order[k].successes += 1;
            let s = &mut sums[k];
            s.0 += r.runtime;
            s.1 += r.makespan.map_or(0.0, |m| m.to_f64_lossy());
            s.2 += r.flowtime.map_or(0.0, |f| f.to_f64_lossy());
        }
    }
    for (a, s) in order.iter_mut().zip(&sums) {
        if a.successes > 0 {
            let n = a.successes as f64;
            a.mean_runtime = Some(s.0 / n);
            a.mean_makespan = Some(s.1 / n);
            a.mean_flowtime = Some(s.2 / n);
        }
    }
    order
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Config(format!("csv: {other:?}")),
    }
}

pub fn write_runs_csv<S: Scalar, W: Write>(records: &[RunRecord<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RUN_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.map.clone(),
            r.agents.to_string(),
            format_ssi(r.ssi),
            r.method.to_string(),
            r.seed.to_string(),
            r.repeat.to_string(),
            u8::from(r.success).to_string(),
            format!("{:.6}", r.runtime),
            opt(r.makespan.map(|m| m.to_f64_lossy())),
            opt(r.flowtime.map(|f| f.to_f64_lossy())),
            r.attempts.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv<S: Scalar, W: Write>(aggs: &[Aggregate<S>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_HEADER).map_err(csv_err)?;
    for a in aggs {
        w.write_record([
            a.map.clone(),
            a.agents.to_string(),
            format_ssi(a.ssi),
            a.method.to_string(),
            a.runs.to_string(),
            format!("{:.6}", a.success_rate()),
            opt(a.mean_runtime),
            opt(a.mean_makespan),
            opt(a.mean_flowtime),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

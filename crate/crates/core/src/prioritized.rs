//! Prioritized multi-robot planning: initial orderings, sequential
//! planning with safe-start-interval (SSI) protection, deterministic
//! re-scheduling and the random-restart baseline.
//!
//! Robots are planned one by one. Each treats the trajectories of the
//! robots planned before it as moving obstacles and, while `t < k`, the
//! start disks of every other robot as well (`k = 0` disables this,
//! `k = inf` protects starts forever).

use std::collections::HashSet;
use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{push_point_unsafe, MotionSegment, Point};
use crate::grid::{Cell, GridMap, MoveGraph, MoveModel};
use crate::interval::IntervalSet;
use crate::rng::Rng;
use crate::scalar::{cmp, Scalar};
use crate::sipp::{DynamicObstacle, ObstacleSet, PatchedTable, SafeIntervalTable, SippPlanner, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Robot {
    pub id: usize,
    pub start: Cell,
    pub goal: Cell,
}

/// A validated planning problem.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    map: GridMap,
    robots: Vec<Robot>,
    model: MoveModel<S>,
}

impl<S: Scalar> Instance<S> {
    /// Checks ids, static validity of every endpoint, pairwise separation
    /// of starts and of goals, and that every robot can reach its goal
    /// ignoring the others.
    pub fn new(map: GridMap, robots: Vec<Robot>, model: MoveModel<S>) -> Result<Self> {
        if !(model.radius > S::zero()) {
            return Err(Error::InvalidInstance("radius must be positive".into()));
        }
        let mut ids = HashSet::new();
        for r in &robots {
            if !ids.insert(r.id) {
                return Err(Error::InvalidInstance(format!("duplicate robot id {}", r.id)));
            }
            for (what, c) in [("start", r.start), ("goal", r.goal)] {
                map.check_free(c)
                    .map_err(|e| Error::InvalidInstance(format!("robot {} {what}: {e}", r.id)))?;
                if !map.is_statically_valid(c, model.radius) {
                    return Err(Error::InvalidInstance(format!(
                        "robot {} {what} {c} is too close to a blocked cell",
                        r.id
                    )));
                }
            }
        }
        let sep = model.separation();
        for (what, pick) in [("starts", 0), ("goals", 1)] {
            let pts: Vec<(usize, Point<S>)> = robots
                .iter()
                .map(|r| (r.id, if pick == 0 { r.start } else { r.goal }.center()))
                .collect();
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[i + 1..] {
                    if a.1.dist(b.1) < sep {
                        return Err(Error::InvalidInstance(format!(
                            "{what} of robots {} and {} are closer than 2r",
                            a.0, b.0
                        )));
                    }
                }
            }
        }
        let graph = MoveGraph::new(&map, model);
        let comp = graph.components(&map);
        for r in &robots {
            if comp[map.index(r.start)] != comp[map.index(r.goal)] {
                return Err(Error::InvalidInstance(format!("robot {} cannot reach its goal", r.id)));
            }
        }
        Ok(Self { map, robots, model })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }

    pub fn model(&self) -> &MoveModel<S> {
        &self.model
    }

    pub fn radius(&self) -> S {
        self.model.radius
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn position_of(&self, id: usize) -> Option<usize> {
        self.robots.iter().position(|r| r.id == id)
    }

    /// Agent-free optimal path cost per robot, in instance order.
    pub fn path_estimates(&self) -> Vec<S> {
        let graph = MoveGraph::new(&self.map, self.model);
        self.robots
            .iter()
            .map(|r| graph.distances_from(self.map.index(r.goal))[self.map.index(r.start)])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum OrderingPolicy {
    #[default]
    ShortestFirst,
    LongestFirst,
}

/// Robot ids, highest priority first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PriorityOrdering(pub Vec<usize>);

impl PriorityOrdering {
    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    /// `failed` moved to the front; everyone else keeps their relative order.
    pub fn promote(&self, failed: usize) -> Self {
        let mut ids = Vec::with_capacity(self.0.len());
        ids.push(failed);
        ids.extend(self.0.iter().copied().filter(|&id| id != failed));
        Self(ids)
    }
}

impl fmt::Display for PriorityOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|id| id.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Orderings already investigated during one solve.
#[derive(Debug, Clone, Default)]
pub struct OrderingHistory {
    seen: HashSet<Vec<usize>>,
}

impl OrderingHistory {
    /// Returns `false` if the ordering was already present.
    pub fn record(&mut self, ord: &PriorityOrdering) -> bool {
        self.seen.insert(ord.0.clone())
    }

    pub fn contains(&self, ord: &PriorityOrdering) -> bool {
        self.seen.contains(&ord.0)
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Sorts `(id, estimate)` pairs by estimate, ties by ascending id.
pub fn ordering_from_estimates<S: Scalar>(estimates: &[(usize, S)], policy: OrderingPolicy) -> PriorityOrdering {
    let mut v = estimates.to_vec();
    v.sort_by(|a, b| {
        let by_len = match policy {
            OrderingPolicy::ShortestFirst => cmp(a.1, b.1),
            OrderingPolicy::LongestFirst => cmp(b.1, a.1),
        };
        by_len.then(a.0.cmp(&b.0))
    });
    PriorityOrdering(v.into_iter().map(|(id, _)| id).collect())
}

pub fn initial_ordering<S: Scalar>(inst: &Instance<S>, policy: OrderingPolicy) -> PriorityOrdering {
    let est: Vec<(usize, S)> = inst.robots.iter().map(|r| r.id).zip(inst.path_estimates()).collect();
    ordering_from_estimates(&est, policy)
}

/// Outcome of planning under one fixed ordering.
#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome<S> {
    /// One trajectory per robot, in instance order.
    AllPlanned(Vec<Trajectory<S>>),
    FailedAt { robot: usize, position: usize },
}

/// Which clock enforces the time cap and fills `elapsed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    #[default]
    Wall,
    /// Deterministic work clock: every single-robot search state expansion
    /// counts as one microsecond.
    Work,
}

impl Clock {
    pub const SECONDS_PER_EXPANSION: f64 = 1e-6;
}

#[derive(Debug, Clone, Copy)]
struct Stopwatch {
    clock: Clock,
    started: Instant,
    expansions: u64,
}

impl Stopwatch {
    fn start(clock: Clock) -> Self {
        Self { clock, started: Instant::now(), expansions: 0 }
    }

    fn elapsed(&self) -> f64 {
        match self.clock {
            Clock::Wall => self.started.elapsed().as_secs_f64(),
            Clock::Work => self.expansions as f64 * Clock::SECONDS_PER_EXPANSION,
        }
    }
}

/// Time cap in seconds of the chosen clock. `inf` means unlimited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeCap {
    pub seconds: f64,
    pub clock: Clock,
}

impl TimeCap {
    pub fn unlimited() -> Self {
        Self { seconds: f64::INFINITY, clock: Clock::Wall }
    }

    pub fn wall(seconds: f64) -> Self {
        Self { seconds, clock: Clock::Wall }
    }

    pub fn work(seconds: f64) -> Self {
        Self { seconds, clock: Clock::Work }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
}

#[derive(Debug, Clone)]
pub struct SolveResult<S> {
    pub status: Status,
    /// One per robot in instance order; empty unless successful.
    pub trajectories: Vec<Trajectory<S>>,
    /// Robot that failed in the last unsuccessful attempt.
    pub failed_robot: Option<usize>,
    /// Number of orderings planned.
    pub attempts: usize,
    pub elapsed: f64,
    pub timed_out: bool,
    /// Every ordering tried, in order.
    pub orderings: Vec<PriorityOrdering>,
}

impl<S> SolveResult<S> {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }
}

/// Re-scheduling strategy after a failed attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Single attempt with the initial ordering.
    NoRescheduling,
    /// Promote the failed robot; stop on a repeated ordering.
    Deterministic,
    /// Uniformly random orderings after the first attempt.
    Random { seed: u64 },
}

/// Shared per-instance state reused by every attempt.
struct Planner<'a, S: Scalar> {
    inst: &'a Instance<S>,
    graph: MoveGraph<S>,
    ssi_k: S,
    /// SSI disks of every robot, tagged with the robot's index
    base_obstacles: ObstacleSet<S>,
    base_table: SafeIntervalTable<S>,
    /// per robot index, cells covered by its start disk
    disk_cells: Vec<Vec<usize>>,
    /// per cell, robot indices whose start disk covers it
    disk_owners: Vec<Vec<usize>>,
    id_to_index: std::collections::HashMap<usize, usize>,
}

impl<'a, S: Scalar> Planner<'a, S> {
    fn new(inst: &'a Instance<S>, ssi_k: S) -> Result<Self> {
        if !(ssi_k >= S::zero()) {
            return Err(Error::Config("ssi endpoint must be non-negative".into()));
        }
        let map = &inst.map;
        let sep = inst.model.separation();
        let graph = MoveGraph::new(map, inst.model);
        let mut base_obstacles = ObstacleSet::new(map, sep);
        let mut base_table = SafeIntervalTable::new(map);
        let mut disk_cells = vec![Vec::new(); inst.len()];
        let mut disk_owners = vec![Vec::new(); map.len()];
        if ssi_k > S::zero() {
            for (i, r) in inst.robots.iter().enumerate() {
                let disk = DynamicObstacle::SsiDisk { center: r.start.center(), until: ssi_k };
                base_obstacles.insert(&disk, Some(i));
                base_table.subtract_obstacle(&disk, sep);
                for c in cells_within(map, r.start.center(), sep) {
                    disk_cells[i].push(c);
                    disk_owners[c].push(i);
                }
            }
        }
        let id_to_index = inst.robots.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
        Ok(Self { inst, graph, ssi_k, base_obstacles, base_table, disk_cells, disk_owners, id_to_index })
    }

    fn check_ordering(&self, ord: &PriorityOrdering) -> Result<Vec<usize>> {
        let n = self.inst.len();
        if ord.0.len() != n {
            return Err(Error::InvalidOrdering(format!("expected {n} ids, got {}", ord.0.len())));
        }
        let mut seen = vec![false; n];
        let mut idx = Vec::with_capacity(n);
        for id in &ord.0 {
            let &i = self
                .id_to_index
                .get(id)
                .ok_or_else(|| Error::InvalidOrdering(format!("unknown robot id {id}")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidOrdering(format!("robot id {id} appears twice")));
            }
            idx.push(i);
        }
        Ok(idx)
    }

    /// `None` when `watch` passes `cap` before every robot is planned.
    fn plan(&self, ord: &PriorityOrdering, watch: &mut Stopwatch, cap: f64) -> Result<Option<PlanOutcome<S>>> {
        let order = self.check_ordering(ord)?;
        let inst = self.inst;
        let map = &inst.map;
        let sep = inst.model.separation();
        let with_ssi = self.ssi_k > S::zero();
        let mut obstacles = self.base_obstacles.clone();
        let mut table = self.base_table.clone();
        // trajectory-only table, needed to lift a robot's own disk
        let mut traj_table = if with_ssi { Some(SafeIntervalTable::new(map)) } else { None };
        let mut planned: Vec<Option<Trajectory<S>>> = vec![None; inst.len()];
        let planner = SippPlanner::new(map, &self.graph);

        for (position, &i) in order.iter().enumerate() {
            let robot = inst.robots[i];
            let patches = match &traj_table {
                Some(tt) => self.own_disk_patches(i, tt, sep),
                None => Vec::new(),
            };
            let view = PatchedTable { base: &table, patches };
            let out = planner.search(robot.id, robot.start, robot.goal, &view, &obstacles, Some(i));
            watch.expansions += out.expansions as u64;
            let Some(traj) = out.trajectory else {
                return Ok(Some(PlanOutcome::FailedAt { robot: robot.id, position }));
            };
            if position + 1 < order.len() && watch.elapsed() > cap {
                return Ok(None);
            }
            let obstacle = DynamicObstacle::Trajectory(traj);
            obstacles.insert(&obstacle, None);
            table.subtract_obstacle(&obstacle, sep);
            if let Some(tt) = traj_table.as_mut() {
                tt.subtract_obstacle(&obstacle, sep);
            }
            let DynamicObstacle::Trajectory(traj) = obstacle else { unreachable!() };
            planned[i] = Some(traj);
        }
        Ok(Some(PlanOutcome::AllPlanned(planned.into_iter().map(|t| t.expect("all planned")).collect())))
    }

    /// Safe intervals of the cells under robot `i`'s own start disk with
    /// only the other robots' disks removed.
    fn own_disk_patches(&self, i: usize, traj_table: &SafeIntervalTable<S>, sep: S) -> Vec<(usize, IntervalSet<S>)> {
        let map = &self.inst.map;
        self.disk_cells[i]
            .iter()
            .map(|&c| {
                let mut set = traj_table.get(c).clone();
                let p = map.cell(c).center::<S>();
                for &k in &self.disk_owners[c] {
                    if k == i {
                        continue;
                    }
                    let seg = MotionSegment::wait(self.inst.robots[k].start.center(), S::zero(), self.ssi_k);
                    let mut unsafe_times = IntervalSet::empty();
                    push_point_unsafe(p, &seg, sep, &mut unsafe_times);
                    for iv in unsafe_times.iter() {
                        set.remove(iv.start, iv.end);
                    }
                }
                (c, set)
            })
            .collect()
    }
}

fn cells_within<S: Scalar>(map: &GridMap, center: Point<S>, sep: S) -> Vec<usize> {
    let seg = MotionSegment::wait(center, S::zero(), S::one());
    let mut out = Vec::new();
    let reach = sep.ceil().to_usize().unwrap_or(0);
    let (cx, cy) = (center.x.round().to_usize().unwrap_or(0), center.y.round().to_usize().unwrap_or(0));
    for y in cy.saturating_sub(reach)..=(cy + reach).min(map.height() - 1) {
        for x in cx.saturating_sub(reach)..=(cx + reach).min(map.width() - 1) {
            let c = Cell::new(x, y);
            if !map.is_free(c) {
                continue;
            }
            let mut hit = IntervalSet::empty();
            push_point_unsafe(c.center(), &seg, sep, &mut hit);
            if !hit.is_empty() {
                out.push(map.index(c));
            }
        }
    }
    out
}

/// Plans every robot in `ord` sequentially; stops at the first robot for
/// which no trajectory exists.
pub fn plan_with_ordering<S: Scalar>(inst: &Instance<S>, ord: &PriorityOrdering, ssi_k: S) -> Result<PlanOutcome<S>> {
    let planner = Planner::new(inst, ssi_k)?;
    Ok(planner.plan(ord, &mut Stopwatch::start(Clock::Wall), f64::INFINITY)?.expect("no cap"))
}

/// Solves `inst` with the given re-scheduling method.
pub fn solve<S: Scalar>(
    inst: &Instance<S>,
    method: Method,
    policy: OrderingPolicy,
    ssi_k: S,
    cap: TimeCap,
) -> Result<SolveResult<S>> {
    let mut watch = Stopwatch::start(cap.clock);
    let planner = Planner::new(inst, ssi_k)?;
    let mut ordering = initial_ordering(inst, policy);
    let mut history = OrderingHistory::default();
    let mut rng = match method {
        Method::Random { seed } => Some(Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut result = SolveResult {
        status: Status::Failure,
        trajectories: Vec::new(),
        failed_robot: None,
        attempts: 0,
        elapsed: 0.0,
        timed_out: false,
        orderings: Vec::new(),
    };
    loop {
        history.record(&ordering);
        result.attempts += 1;
        result.orderings.push(ordering.clone());
        let Some(outcome) = planner.plan(&ordering, &mut watch, cap.seconds)? else {
            result.timed_out = true;
            break;
        };
        match outcome {
            PlanOutcome::AllPlanned(trajs) => {
                result.status = Status::Success;
                result.trajectories = trajs;
                break;
            }
            PlanOutcome::FailedAt { robot, .. } => {
                result.failed_robot = Some(robot);
                let next = match (method, rng.as_mut()) {
                    (Method::NoRescheduling, _) => break,
                    (Method::Deterministic, _) => {
                        let next = ordering.promote(robot);
                        if history.contains(&next) {
                            break;
                        }
                        next
                    }
                    (Method::Random { .. }, Some(rng)) => {
                        let mut ids = ordering.0.clone();
                        ids.sort_unstable();
                        rng.shuffle(&mut ids);
                        PriorityOrdering(ids)
                    }
                    (Method::Random { .. }, None) => unreachable!(),
                };
                if watch.elapsed() > cap.seconds {
                    result.timed_out = true;
                    break;
                }
                ordering = next;
            }
        }
    }
    result.elapsed = watch.elapsed();
    Ok(result)
}

/// Promote-the-failed-robot re-scheduling.
pub fn deterministic_reschedule<S: Scalar>(
    inst: &Instance<S>,
    policy: OrderingPolicy,
    ssi_k: S,
    cap: TimeCap,
) -> Result<SolveResult<S>> {
    solve(inst, Method::Deterministic, policy, ssi_k, cap)
}

/// Random-restart re-scheduling. The first attempt uses the policy's
/// ordering; later attempts draw uniform permutations from `seed`. With an
/// unlimited cap this only returns on success.
pub fn random_reschedule<S: Scalar>(
    inst: &Instance<S>,
    policy: OrderingPolicy,
    ssi_k: S,
    cap: TimeCap,
    seed: u64,
) -> Result<SolveResult<S>> {
    solve(inst, Method::Random { seed }, policy, ssi_k, cap)
}

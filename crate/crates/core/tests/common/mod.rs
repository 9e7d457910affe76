//! Brute-force oracles shared by the integration and acceptance tests.
//! Nothing here calls into the planner's geometry or search code.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};

use prioplan::geometry::{MotionSegment, Point};
use prioplan::grid::{Cell, Connectivity, GridMap, MoveModel};
use prioplan::harness::generate::{generate_instance, GeneratorOptions};
use prioplan::harness::validate::{validate_solution, validate_start_protection};
use prioplan::interval::IntervalSet;
use prioplan::prioritized::{
    deterministic_reschedule, plan_with_ordering, Instance, OrderingPolicy, PlanOutcome, SolveResult, Status,
    TimeCap,
};
use prioplan::rng::Rng;
use prioplan::sipp::{Trajectory, Waypoint};

pub type P = (f64, f64);

fn sub(a: P, b: P) -> P {
    (a.0 - b.0, a.1 - b.1)
}

fn norm(a: P) -> f64 {
    (a.0 * a.0 + a.1 * a.1).sqrt()
}

/// Position of a segment at `t`, or `None` outside `[depart, arrive]`.
pub fn segment_at(seg: &MotionSegment<f64>, t: f64) -> Option<P> {
    if t < seg.depart || t > seg.arrive {
        return None;
    }
    if seg.arrive.is_infinite() || seg.arrive == seg.depart {
        return Some((seg.from.x, seg.from.y));
    }
    let s = (t - seg.depart) / (seg.arrive - seg.depart);
    Some((seg.from.x + (seg.to.x - seg.from.x) * s, seg.from.y + (seg.to.y - seg.from.y) * s))
}

/// Minimum of `|d0 + dv * s|` over `s` in `[0, len]`.
pub fn min_linear(d0: P, dv: P, len: f64) -> f64 {
    let vv = dv.0 * dv.0 + dv.1 * dv.1;
    let s = if vv > 0.0 { (-(d0.0 * dv.0 + d0.1 * dv.1) / vv).clamp(0.0, len) } else { 0.0 };
    norm((d0.0 + dv.0 * s, d0.1 + dv.1 * s))
}

/// Whether a robot leaving `from` at `t0` at unit speed towards `to` comes
/// closer than `sep` to the disk following `seg` while both exist.
pub fn move_hits(from: P, to: P, t0: f64, seg: &MotionSegment<f64>, sep: f64) -> bool {
    let d = norm(sub(to, from));
    let lo = t0.max(seg.depart);
    let hi = (t0 + d).min(seg.arrive);
    if lo > hi {
        return false;
    }
    let u = if d > 0.0 { ((to.0 - from.0) / d, (to.1 - from.1) / d) } else { (0.0, 0.0) };
    let agent = |t: f64| (from.0 + u.0 * (t - t0), from.1 + u.1 * (t - t0));
    let obs_v = if seg.arrive.is_finite() && seg.arrive > seg.depart {
        let len = seg.arrive - seg.depart;
        ((seg.to.x - seg.from.x) / len, (seg.to.y - seg.from.y) / len)
    } else {
        (0.0, 0.0)
    };
    let a0 = agent(lo);
    let o0 = segment_at(seg, lo).expect("inside segment");
    min_linear(sub(a0, o0), sub(u, obs_v), hi - lo) < sep
}

/// Largest distance from `t` to the nearest finite endpoint of `set`.
pub fn dist_to_boundary(set: &IntervalSet<f64>, t: f64) -> f64 {
    set.iter()
        .flat_map(|iv| [iv.start, iv.end])
        .filter(|b| b.is_finite())
        .map(|b| (b - t).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Samples `[lo, hi]` every `dt` and returns the largest distance from a
/// sample where `truth` and `set` disagree to the nearest boundary of `set`.
pub fn worst_disagreement(set: &IntervalSet<f64>, lo: f64, hi: f64, dt: f64, truth: impl Fn(f64) -> bool) -> f64 {
    let n = ((hi - lo) / dt).ceil() as usize;
    let mut worst: f64 = 0.0;
    for k in 0..=n {
        let t = lo + k as f64 * dt;
        if truth(t) != set.contains(t) {
            worst = worst.max(dist_to_boundary(set, t));
        }
    }
    worst
}

pub fn random_point(rng: &mut Rng, span: f64) -> Point<f64> {
    let u = |rng: &mut Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    Point::new(u(rng) * span, u(rng) * span)
}

pub fn unit(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Random obstacle segment: a unit-speed move between lattice points, a
/// wait, or an infinite parking.
pub fn random_segment(rng: &mut Rng) -> MotionSegment<f64> {
    let c = |rng: &mut Rng| Point::new(rng.below(5) as f64, rng.below(5) as f64);
    let depart = (unit(rng) * 6.0 * 8.0).round() / 8.0 + if rng.below(3) == 0 { unit(rng) } else { 0.0 };
    match rng.below(4) {
        0 => MotionSegment::wait(c(rng), depart, depart + 0.5 + 3.0 * unit(rng)),
        1 => MotionSegment::parked(c(rng), depart),
        _ => {
            let from = c(rng);
            let dirs = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];
            let (dx, dy) = dirs[rng.below(8) as usize];
            let len = 1 + rng.below(3) as i32;
            let to = Point::new(from.x + (dx * len) as f64, from.y + (dy * len) as f64);
            MotionSegment::travel(from, to, depart)
        }
    }
}

/// Obstacle known only by its positions at times `0, dt, 2dt, ...`; it
/// moves linearly between them and stays at the last one forever.
#[derive(Debug, Clone)]
pub struct SampledObstacle {
    pub knots: Vec<(P, f64)>,
}

impl SampledObstacle {
    pub fn from_trajectory(t: &Trajectory<f64>) -> Self {
        Self { knots: t.waypoints.iter().map(|w| ((w.at.x, w.at.y), w.t)).collect() }
    }

    fn at(&self, t: f64) -> P {
        let k = &self.knots;
        if t <= k[0].1 {
            return k[0].0;
        }
        let i = k.partition_point(|q| q.1 <= t);
        if i >= k.len() {
            return k[k.len() - 1].0;
        }
        let (a, b) = (k[i - 1], k[i]);
        let s = (t - a.1) / (b.1 - a.1);
        (a.0 .0 + (b.0 .0 - a.0 .0) * s, a.0 .1 + (b.0 .1 - a.0 .1) * s)
    }

    fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1].1
    }

    /// Minimum distance to a robot moving linearly from `a` at `t0` to `b`
    /// at `t1`.
    pub fn min_distance(&self, a: P, b: P, t0: f64, t1: f64) -> f64 {
        let mut cuts: Vec<f64> = vec![t0, t1];
        cuts.extend(self.knots.iter().map(|k| k.1).filter(|&t| t > t0 && t < t1));
        cuts.sort_by(f64::total_cmp);
        let robot = |t: f64| {
            if t1 == t0 {
                return a;
            }
            let s = (t - t0) / (t1 - t0);
            (a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s)
        };
        let mut best = f64::INFINITY;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let d0 = sub(robot(lo), self.at(lo));
            let d1 = sub(robot(hi), self.at(hi));
            let len = hi - lo;
            let dv = if len > 0.0 { ((d1.0 - d0.0) / len, (d1.1 - d0.1) / len) } else { (0.0, 0.0) };
            best = best.min(min_linear(d0, dv, len));
        }
        best.min(norm(sub(robot(t0), self.at(t0))))
    }
}

/// Earliest arrival at `goal` over a time lattice of step `1 / steps`:
/// 4-connected unit-speed moves that start on lattice times, and waits of
/// one step. A state counts as a goal only if parking there
/// forever is safe. Collision means centers strictly closer than `sep`.
pub fn lattice_astar(
    map: &GridMap,
    start: Cell,
    goal: Cell,
    obstacles: &[SampledObstacle],
    sep: f64,
    steps: u32,
    horizon: f64,
) -> Option<f64> {
    let dt = 1.0 / steps as f64;
    let max_k = (horizon / dt).round() as u64;
    let center = |c: Cell| (c.x as f64, c.y as f64);
    let clear = |a: Cell, b: Cell, k: u64, dur: u64| {
        let (t0, t1) = (k as f64 * dt, (k + dur) as f64 * dt);
        obstacles.iter().all(|o| o.min_distance(center(a), center(b), t0, t1) >= sep)
    };
    let parks = |c: Cell, k: u64| {
        let t0 = k as f64 * dt;
        obstacles.iter().all(|o| o.min_distance(center(c), center(c), t0, t0.max(o.end()) + 1.0) >= sep)
    };
    let step = steps as u64;
    let h = |c: Cell| (c.x.abs_diff(goal.x) + c.y.abs_diff(goal.y)) as u64 * step;
    if !obstacles.iter().all(|o| o.min_distance(center(start), center(start), 0.0, 0.0) >= sep) {
        return None;
    }
    let mut open = BinaryHeap::new();
    let mut seen = HashSet::new();
    open.push(Reverse((h(start), 0u64, start.x, start.y)));
    while let Some(Reverse((_, k, x, y))) = open.pop() {
        if !seen.insert((k, x, y)) {
            continue;
        }
        let c = Cell::new(x, y);
        if c == goal && parks(c, k) {
            return Some(k as f64 * dt);
        }
        let mut push = |n: Cell, dur: u64| {
            let nk = k + dur;
            if nk <= max_k && !seen.contains(&(nk, n.x, n.y)) && clear(c, n, k, dur) {
                open.push(Reverse((nk + h(n), nk, n.x, n.y)));
            }
        };
        push(c, 1);
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= map.width() as i64 || ny >= map.height() as i64 {
                continue;
            }
            if !map.is_blocked_xy(nx as usize, ny as usize) {
                push(Cell::new(nx as usize, ny as usize), step);
            }
        }
    }
    None
}

/// 4-connected BFS path between free cells, or `None`.
pub fn bfs_path(map: &GridMap, a: Cell, b: Cell) -> Option<Vec<Cell>> {
    let mut prev = vec![usize::MAX; map.len()];
    let mut q = VecDeque::from([a]);
    prev[map.index(a)] = map.index(a);
    while let Some(c) = q.pop_front() {
        if c == b {
            let mut path = vec![b];
            let mut cur = map.index(b);
            while cur != map.index(a) {
                cur = prev[cur];
                path.push(map.cell(cur));
            }
            path.reverse();
            return Some(path);
        }
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (c.x as i64 + dx, c.y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= map.width() as i64 || ny >= map.height() as i64 {
                continue;
            }
            let n = Cell::new(nx as usize, ny as usize);
            if map.is_free(n) && prev[map.index(n)] == usize::MAX {
                prev[map.index(n)] = map.index(c);
                q.push_back(n);
            }
        }
    }
    None
}

/// Unit-speed trajectory along `path` on integer timestamps, with random
/// one-step waits.
pub fn integer_trajectory(robot: usize, path: &[Cell], rng: &mut Rng) -> Trajectory<f64> {
    let mut t = 0.0;
    let mut wps = vec![Waypoint::new(path[0].center(), 0.0)];
    for w in path.windows(2) {
        while rng.below(4) == 0 {
            t += 1.0;
            wps.push(Waypoint::new(w[0].center(), t));
        }
        t += 1.0;
        wps.push(Waypoint::new(w[1].center(), t));
    }
    Trajectory::new(robot, wps)
}

/// Random 8x8 map with about `density` blocked cells.
pub fn random_map(rng: &mut Rng, w: usize, h: usize, density: f64) -> GridMap {
    let mut map = GridMap::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            if unit(rng) < density {
                map.set_blocked(Cell::new(x, y), true);
            }
        }
    }
    map
}

pub fn random_free_cell(rng: &mut Rng, map: &GridMap) -> Option<Cell> {
    let free: Vec<Cell> = map.free_cells().collect();
    if free.is_empty() {
        None
    } else {
        Some(free[rng.below(free.len() as u64) as usize])
    }
}

/// One randomized optimality case: an 8x8 map, a robot, and up to two
/// obstacle robots on integer timestamps.
pub struct OracleCase {
    pub map: GridMap,
    pub start: Cell,
    pub goal: Cell,
    pub obstacles: Vec<Trajectory<f64>>,
}

pub fn oracle_case(seed: u64) -> OracleCase {
    let mut rng = Rng::seed_from_u64(seed);
    loop {
        let map = random_map(&mut rng, 8, 8, 0.15);
        let (Some(start), Some(goal)) = (random_free_cell(&mut rng, &map), random_free_cell(&mut rng, &map)) else {
            continue;
        };
        if bfs_path(&map, start, goal).is_none() {
            continue;
        }
        let n = rng.below(3) as usize;
        let mut obstacles = Vec::new();
        let mut used_starts = vec![start];
        let mut used_goals = vec![goal];
        for id in 0..n {
            let (Some(a), Some(b)) = (random_free_cell(&mut rng, &map), random_free_cell(&mut rng, &map)) else {
                break;
            };
            if used_starts.contains(&a) || used_goals.contains(&b) {
                continue;
            }
            if let Some(path) = bfs_path(&map, a, b) {
                used_starts.push(a);
                used_goals.push(b);
                obstacles.push(integer_trajectory(id + 1, &path, &mut rng));
            }
        }
        return OracleCase { map, start, goal, obstacles };
    }
}

/// Small random instance on an 8x8 map with 4 to 10 robots, and an SSI
/// endpoint drawn from {0, 2, 5, inf}.
pub fn random_instance(seed: u64) -> (Instance<f64>, f64) {
    let mut rng = Rng::seed_from_u64(seed);
    loop {
        let map = random_map(&mut rng, 8, 8, 0.12);
        let n = 4 + rng.below(7) as usize;
        let mm = MoveModel::new(Connectivity::Eight, 0.499999);
        if let Ok(inst) = generate_instance(&map, n, mm, rng.next_u64(), GeneratorOptions::default()) {
            let ssi = [0.0, 2.0, 5.0, f64::INFINITY][rng.below(4) as usize];
            return (inst, ssi);
        }
    }
}

/// Runs deterministic re-scheduling and checks its contract: orderings
/// never repeat, each one promotes the robot that failed under the
/// previous one, the first robot never fails when `ssi` is finite, it
/// stops only on success or a repeat, and successes are collision-free
/// and respect the start protection.
pub fn check_rescheduling(inst: &Instance<f64>, ssi: f64) -> Result<SolveResult<f64>, String> {
    let res = deterministic_reschedule(inst, OrderingPolicy::ShortestFirst, ssi, TimeCap::unlimited())
        .map_err(|e| e.to_string())?;
    let history = &res.orderings;
    if res.attempts != history.len() {
        return Err(format!("{} attempts but {} orderings", res.attempts, history.len()));
    }
    for (i, a) in history.iter().enumerate() {
        if history[..i].contains(a) {
            return Err(format!("ordering {a} tried twice"));
        }
    }
    for w in history.windows(2) {
        match plan_with_ordering(inst, &w[0], ssi).map_err(|e| e.to_string())? {
            PlanOutcome::FailedAt { robot, position } => {
                if ssi.is_finite() && position == 0 {
                    return Err(format!("first robot {robot} failed under {}", w[0]));
                }
                if w[1] != w[0].promote(robot) {
                    return Err(format!("{} does not follow {} after robot {robot} failed", w[1], w[0]));
                }
            }
            PlanOutcome::AllPlanned(_) => return Err(format!("rescheduled after {} succeeded", w[0])),
        }
    }
    if res.status == Status::Success {
        validate_solution(inst, &res.trajectories).map_err(|v| v.to_string())?;
        validate_start_protection(inst, &res.trajectories, ssi).map_err(|v| v.to_string())?;
    } else {
        let last = history.last().ok_or("no orderings")?;
        let failed = res.failed_robot.ok_or("failure without a failed robot")?;
        if !history.contains(&last.promote(failed)) {
            return Err("stopped before reaching a repeated ordering".into());
        }
    }
    Ok(res)
}

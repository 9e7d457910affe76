//! Solution checker that shares no code with the planner.
//!
//! Everything is re-derived in `f64`: trajectory well-formedness, static
//! clearance against blocked squares, and pairwise separation, the latter
//! both analytically (closest approach on every common linear piece) and by
//! sampling at a fixed step. The two pairwise checks must agree.

use std::collections::HashMap;
use std::fmt;

use crate::prioritized::Instance;
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

pub const SAMPLE_DT: f64 = 0.01;
/// Allowed mismatch between a move's length and its duration; solution
/// files carry six decimals.
const SPEED_TOL: f64 = 1e-5;
const ENDPOINT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Trajectory shape: count, endpoints, timing, speed.
    Malformed,
    /// A swept disk touches a blocked cell.
    Static,
    /// Two robots closer than `2r`.
    Pairwise,
    /// A robot enters another robot's protected start disk.
    StartIntrusion,
    /// The sampled and analytic pairwise checks disagree.
    CheckerDisagreement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub robots: Vec<usize>,
    pub time: f64,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.robots.iter().map(|r| r.to_string()).collect();
        write!(f, "{:?} violation (robots {}) at t={:.6}: {}", self.kind, ids.join(","), self.time, self.detail)
    }
}

impl std::error::Error for Violation {}

#[derive(Debug, Clone, Copy)]
struct P {
    x: f64,
    y: f64,
}

impl P {
    fn sub(self, o: P) -> P {
        P { x: self.x - o.x, y: self.y - o.y }
    }
    fn dot(self, o: P) -> f64 {
        self.x * o.x + self.y * o.y
    }
    fn len(self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// A trajectory flattened to `f64` `(x, y, t)` knots.
struct Path {
    id: usize,
    knots: Vec<(P, f64)>,
}

impl Path {
    fn from<S: Scalar>(t: &Trajectory<S>) -> Self {
        let knots = t
            .waypoints
            .iter()
            .map(|w| (P { x: w.at.x.to_f64_lossy(), y: w.at.y.to_f64_lossy() }, w.t.to_f64_lossy()))
            .collect();
        Self { id: t.robot, knots }
    }

    fn end(&self) -> f64 {
        self.knots.last().map(|k| k.1).unwrap_or(0.0)
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
        let dt = b.1 - a.1;
        if dt <= 0.0 {
            return b.0;
        }
        let s = (t - a.1) / dt;
        P { x: a.0.x + (b.0.x - a.0.x) * s, y: a.0.y + (b.0.y - a.0.y) * s }
    }
}

fn violation(kind: ViolationKind, robots: Vec<usize>, time: f64, detail: impl Into<String>) -> Violation {
    Violation { kind, robots, time, detail: detail.into() }
}

/// Checks a full solution: one trajectory per robot of `inst`.
pub fn validate_solution<S: Scalar>(inst: &Instance<S>, trajs: &[Trajectory<S>]) -> Result<(), Violation> {
    let r = inst.radius().to_f64_lossy();
    let sep = 2.0 * r;
    let tol = S::CHECK_EPS;
    if trajs.len() != inst.len() {
        return Err(violation(
            ViolationKind::Malformed,
            vec![],
            0.0,
            format!("expected {} trajectories, got {}", inst.len(), trajs.len()),
        ));
    }
    let by_id: HashMap<usize, &Trajectory<S>> = trajs.iter().map(|t| (t.robot, t)).collect();
    let mut paths = Vec::with_capacity(trajs.len());
    for robot in inst.robots() {
        let t = by_id.get(&robot.id).ok_or_else(|| {
            violation(ViolationKind::Malformed, vec![robot.id], 0.0, "missing trajectory")
        })?;
        let path = Path::from(*t);
        let start = P { x: robot.start.x as f64, y: robot.start.y as f64 };
        let goal = P { x: robot.goal.x as f64, y: robot.goal.y as f64 };
        check_shape(&path, start, goal)?;
        check_static(&path, inst, r - tol)?;
        paths.push(path);
    }

    let analytic = pairwise_analytic(&paths, sep - tol);
    let horizon = paths.iter().map(Path::end).fold(0.0, f64::max) + 1.0;
    let sampled = pairwise_sampled(&paths, sep - tol, horizon);
    match (analytic, sampled) {
        (None, None) => Ok(()),
        (Some(v), _) => Err(v),
        (None, Some(v)) => Err(Violation { kind: ViolationKind::CheckerDisagreement, ..v }),
    }
}

fn check_shape(path: &Path, start: P, goal: P) -> Result<(), Violation> {
    let id = path.id;
    let k = &path.knots;
    if k.is_empty() {
        return Err(violation(ViolationKind::Malformed, vec![id], 0.0, "no waypoints"));
    }
    if k[0].1 != 0.0 {
        return Err(violation(ViolationKind::Malformed, vec![id], k[0].1, "first waypoint time must be 0"));
    }
    if k[0].0.sub(start).len() > ENDPOINT_TOL {
        return Err(violation(ViolationKind::Malformed, vec![id], 0.0, "does not begin at its start"));
    }
    if k[k.len() - 1].0.sub(goal).len() > ENDPOINT_TOL {
        return Err(violation(ViolationKind::Malformed, vec![id], path.end(), "does not end at its goal"));
    }
    for w in k.windows(2) {
        let ((a, ta), (b, tb)) = (w[0], w[1]);
        if !(tb >= ta) || !tb.is_finite() {
            return Err(violation(ViolationKind::Malformed, vec![id], ta, "waypoint times decrease"));
        }
        let d = b.sub(a).len();
        if d > 0.0 && (d - (tb - ta)).abs() > SPEED_TOL {
            return Err(violation(
                ViolationKind::Malformed,
                vec![id],
                ta,
                format!("move of length {d:.6} takes {:.6}", tb - ta),
            ));
        }
    }
    Ok(())
}

/// Distance between segment `ab` and the closed unit square at `c`:
/// zero if they meet, else the minimum over the square's four edges.
fn seg_square_dist(a: P, b: P, c: P) -> f64 {
    let inside = |p: P| (p.x - c.x).abs() <= 0.5 && (p.y - c.y).abs() <= 0.5;
    if inside(a) || inside(b) {
        return 0.0;
    }
    let corners = [
        P { x: c.x - 0.5, y: c.y - 0.5 },
        P { x: c.x + 0.5, y: c.y - 0.5 },
        P { x: c.x + 0.5, y: c.y + 0.5 },
        P { x: c.x - 0.5, y: c.y + 0.5 },
    ];
    (0..4)
        .map(|i| seg_seg_dist(a, b, corners[i], corners[(i + 1) % 4]))
        .fold(f64::INFINITY, f64::min)
}

fn point_seg_dist(p: P, a: P, b: P) -> f64 {
    let ab = b.sub(a);
    let l2 = ab.dot(ab);
    let s = if l2 > 0.0 { (p.sub(a).dot(ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    P { x: a.x + ab.x * s - p.x, y: a.y + ab.y * s - p.y }.len()
}

fn seg_seg_dist(a: P, b: P, c: P, d: P) -> f64 {
    let orient = |p: P, q: P, r: P| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return 0.0;
    }
    point_seg_dist(a, c, d)
        .min(point_seg_dist(b, c, d))
        .min(point_seg_dist(c, a, b))
        .min(point_seg_dist(d, a, b))
}

fn check_static<S: Scalar>(path: &Path, inst: &Instance<S>, r: f64) -> Result<(), Violation> {
    let map = inst.map();
    let (w, h) = (map.width() as f64, map.height() as f64);
    for (p, t) in &path.knots {
        if p.x < -0.5 || p.y < -0.5 || p.x > w - 0.5 || p.y > h - 0.5 {
            return Err(violation(ViolationKind::Static, vec![path.id], *t, "waypoint outside the map"));
        }
    }
    let pairs: Vec<(P, P, f64)> = if path.knots.len() == 1 {
        vec![(path.knots[0].0, path.knots[0].0, 0.0)]
    } else {
        path.knots.windows(2).map(|w| (w[0].0, w[1].0, w[0].1)).collect()
    };
    for (a, b, t) in pairs {
        let lo_x = (a.x.min(b.x) - r - 1.0).floor().max(0.0) as usize;
        let hi_x = ((a.x.max(b.x) + r + 1.0).ceil() as usize).min(map.width() - 1);
        let lo_y = (a.y.min(b.y) - r - 1.0).floor().max(0.0) as usize;
        let hi_y = ((a.y.max(b.y) + r + 1.0).ceil() as usize).min(map.height() - 1);
        for y in lo_y..=hi_y {
            for x in lo_x..=hi_x {
                if map.is_blocked_xy(x, y) && seg_square_dist(a, b, P { x: x as f64, y: y as f64 }) < r {
                    return Err(violation(
                        ViolationKind::Static,
                        vec![path.id],
                        t,
                        format!("sweeps into blocked cell ({x}, {y})"),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Minimum of `|d0 + dv * s|` for `s` in `[0, len]`, and where it occurs.
fn closest(d0: P, dv: P, len: f64) -> (f64, f64) {
    let vv = dv.dot(dv);
    let s = if vv > 0.0 && len.is_finite() {
        (-d0.dot(dv) / vv).clamp(0.0, len)
    } else {
        0.0
    };
    (P { x: d0.x + dv.x * s, y: d0.y + dv.y * s }.len(), s)
}

fn pairwise_analytic(paths: &[Path], limit: f64) -> Option<Violation> {
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            if let Some(v) = pair_analytic(&paths[i], &paths[j], limit) {
                return Some(v);
            }
        }
    }
    None
}

fn pair_analytic(a: &Path, b: &Path, limit: f64) -> Option<Violation> {
    let mut times: Vec<f64> = a.knots.iter().chain(&b.knots).map(|k| k.1).collect();
    times.sort_by(|x, y| x.total_cmp(y));
    times.dedup();
    let last = *times.last().unwrap_or(&0.0);
    let check = |t0: f64, t1: f64| -> Option<Violation> {
        let (pa, pb) = (a.at(t0), b.at(t0));
        let d0 = pa.sub(pb);
        let (dv, len) = if t1.is_finite() && t1 > t0 {
            let (qa, qb) = (a.at(t1), b.at(t1));
            let dt = t1 - t0;
            (P { x: (qa.x - qb.x - d0.x) / dt, y: (qa.y - qb.y - d0.y) / dt }, dt)
        } else {
            (P { x: 0.0, y: 0.0 }, 0.0)
        };
        let (dist, s) = closest(d0, dv, len);
        (dist < limit).then(|| {
            violation(
                ViolationKind::Pairwise,
                vec![a.id, b.id],
                t0 + s,
                format!("centers {dist:.9} apart"),
            )
        })
    };
    for w in times.windows(2) {
        if let Some(v) = check(w[0], w[1]) {
            return Some(v);
        }
    }
    check(last, f64::INFINITY)
}

fn pairwise_sampled(paths: &[Path], limit: f64, horizon: f64) -> Option<Violation> {
    let steps = (horizon / SAMPLE_DT).ceil() as usize;
    let cell = limit.max(1e-3);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for k in 0..=steps {
        let t = k as f64 * SAMPLE_DT;
        grid.clear();
        let pos: Vec<P> = paths.iter().map(|p| p.at(t)).collect();
        for (i, p) in pos.iter().enumerate() {
            grid.entry(((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)).or_default().push(i);
        }
        for (i, p) in pos.iter().enumerate() {
            let (cx, cy) = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    let Some(list) = grid.get(&(cx + dx, cy + dy)) else { continue };
                    for &j in list {
                        if j > i && pos[j].sub(*p).len() < limit {
                            return Some(violation(
                                ViolationKind::Pairwise,
                                vec![paths[i].id, paths[j].id],
                                t,
                                format!("sampled centers {:.9} apart", pos[j].sub(*p).len()),
                            ));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Checks that during `[0, k - eps]` no robot comes within `2r` of any
/// other robot's start center.
pub fn validate_start_protection<S: Scalar>(inst: &Instance<S>, trajs: &[Trajectory<S>], k: S) -> Result<(), Violation> {
    let sep = 2.0 * inst.radius().to_f64_lossy() - S::CHECK_EPS;
    let until = k.to_f64_lossy() - S::TIME_EPS;
    if until <= 0.0 {
        return Ok(());
    }
    for t in trajs {
        let path = Path::from(t);
        for other in inst.robots() {
            if other.id == t.robot {
                continue;
            }
            let c = P { x: other.start.x as f64, y: other.start.y as f64 };
            let mut knots: Vec<(P, f64)> = path.knots.iter().copied().filter(|k| k.1 < until).collect();
            let tail = until.min(path.end().max(0.0) + 1.0).max(knots.last().map_or(0.0, |k| k.1));
            knots.push((path.at(tail), tail));
            for w in knots.windows(2).map(|w| (w[0], w[1])).chain(std::iter::once((knots[0], knots[0]))) {
                let ((a, ta), (b, _)) = w;
                let d = point_seg_dist(c, a, b);
                if d < sep {
                    return Err(violation(
                        ViolationKind::StartIntrusion,
                        vec![t.robot, other.id],
                        ta,
                        format!("{d:.9} from the protected start"),
                    ));
                }
            }
        }
    }
    Ok(())
}

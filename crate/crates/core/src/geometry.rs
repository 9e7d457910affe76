//! Continuous-time collision mathematics for equal disks moving at unit
//! speed along straight segments.
//!
//! Cell `(i, j)` has its center at `(i, j)`; a blocked cell is the closed
//! unit square around its center. Two disks collide iff their centers are
//! strictly closer than `sep = 2r`. Every unsafe interval is inflated by
//! [`Scalar::TIME_EPS`] on both ends and stored half-open.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::grid::GridMap;
use crate::interval::{Interval, IntervalSet};
use crate::scalar::Scalar;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn zero() -> Self {
        Self::new(S::zero(), S::zero())
    }

    pub fn dot(self, o: Self) -> S {
        self.x * o.x + self.y * o.y
    }

    pub fn norm2(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Self) -> S {
        (self - o).norm()
    }

    /// z component of the 2D cross product.
    pub fn cross(self, o: Self) -> S {
        self.x * o.y - self.y * o.x
    }
}

impl<S: Scalar> Add for Point<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Scalar> Sub for Point<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Scalar> Mul<S> for Point<S> {
    type Output = Self;
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<S: Scalar> Neg for Point<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Straight unit-speed motion, or a wait when `from == to`.
///
/// `arrive` may be `+inf` only for waits (a robot parked forever).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionSegment<S> {
    pub from: Point<S>,
    pub to: Point<S>,
    pub depart: S,
    pub arrive: S,
}

impl<S: Scalar> MotionSegment<S> {
    /// Unit-speed move departing at `depart`.
    pub fn travel(from: Point<S>, to: Point<S>, depart: S) -> Self {
        Self { from, to, depart, arrive: depart + from.dist(to) }
    }

    pub fn wait(at: Point<S>, depart: S, arrive: S) -> Self {
        Self { from: at, to: at, depart, arrive }
    }

    pub fn parked(at: Point<S>, since: S) -> Self {
        Self::wait(at, since, S::infinity())
    }

    pub fn is_wait(&self) -> bool {
        self.from == self.to
    }

    pub fn duration(&self) -> S {
        self.arrive - self.depart
    }

    /// Velocity vector; zero for waits.
    pub fn velocity(&self) -> Point<S> {
        if self.is_wait() {
            return Point::zero();
        }
        let dur = self.duration();
        if dur > S::zero() {
            (self.to - self.from) * (S::one() / dur)
        } else {
            Point::zero()
        }
    }

    /// Position at `t`, clamped to the segment's time span.
    pub fn position_at(&self, t: S) -> Point<S> {
        if self.is_wait() || t <= self.depart {
            return self.from;
        }
        if t >= self.arrive {
            return self.to;
        }
        self.from + self.velocity() * (t - self.depart)
    }
}

/// Open sub-interval of `(lo, hi)` on which `a x^2 + b x + c < 0`.
///
/// `a >= 0` is assumed (squared norms). Near-tangent roots (normalized
/// discriminant below `eps^2`) count as no contact.
pub(crate) fn negative_span<S: Scalar>(a: S, b: S, c: S, lo: S, hi: S) -> Option<(S, S)> {
    let eps = S::eps();
    let tiny = eps * eps;
    let (r1, r2) = if a > tiny {
        let p = b / a;
        let q = c / a;
        let disc = p * p - S::lit(4.0) * q;
        if disc <= tiny {
            return None;
        }
        let sq = disc.sqrt();
        let t = -S::half() * (p + sq.copysign(p));
        let (x, y) = (t, q / t);
        if x < y {
            (x, y)
        } else {
            (y, x)
        }
    } else if b.abs() <= tiny {
        if c < -tiny {
            (S::neg_infinity(), S::infinity())
        } else {
            return None;
        }
    } else {
        let root = -c / b;
        if b > S::zero() {
            (S::neg_infinity(), root)
        } else {
            (root, S::infinity())
        }
    };
    let start = if r1 > lo { r1 } else { lo };
    let end = if r2 < hi { r2 } else { hi };
    (end > start).then_some((start, end))
}

fn inflated<S: Scalar>(start: S, end: S) -> Interval<S> {
    Interval::new(start - S::eps(), end + S::eps())
}

/// Times at which a disk fixed at `p` and the disk following `segment` are
/// closer than `sep`.
pub fn point_unsafe_intervals<S: Scalar>(p: Point<S>, segment: &MotionSegment<S>, sep: S) -> IntervalSet<S> {
    let mut out = IntervalSet::empty();
    push_point_unsafe(p, segment, sep, &mut out);
    out
}

pub(crate) fn push_point_unsafe<S: Scalar>(
    p: Point<S>,
    segment: &MotionSegment<S>,
    sep: S,
    out: &mut IntervalSet<S>,
) {
    if segment.arrive < segment.depart {
        return;
    }
    let rel = segment.from - p;
    let v = segment.velocity();
    let span = negative_span(v.norm2(), S::two() * rel.dot(v), rel.norm2() - sep * sep, S::zero(), segment.duration());
    if let Some((a, b)) = span {
        // a degenerate (zero-length) window still counts when inside
        let iv = inflated(segment.depart + a, segment.depart + b);
        out.insert(iv.start, iv.end);
    } else if segment.duration() == S::zero() && rel.norm2() < sep * sep - S::eps() * S::eps() {
        let iv = inflated(segment.depart, segment.depart);
        out.insert(iv.start, iv.end);
    }
}

/// Union of [`point_unsafe_intervals`] over every segment of `traj`,
/// including the implicit parking at its goal after arrival.
pub fn trajectory_unsafe_intervals<S: Scalar>(p: Point<S>, traj: &Trajectory<S>, sep: S) -> IntervalSet<S> {
    let mut out = IntervalSet::empty();
    for seg in traj.segments() {
        push_point_unsafe(p, &seg, sep, &mut out);
    }
    out
}

/// Departure times `t0` at which an agent leaving `from` at unit speed
/// towards `to` gets closer than `sep` to the disk following `obstacle`.
///
/// The set of `(progress, departure)` pairs in contact is convex, so the
/// result is a single interval. Its bounds come from the contact boundary
/// on the four edges of the feasible parallelogram and from the two
/// extreme points of the contact ellipse.
pub fn move_forbidden_departures<S: Scalar>(
    from: Point<S>,
    to: Point<S>,
    obstacle: &MotionSegment<S>,
    sep: S,
) -> IntervalSet<S> {
    match forbidden_departure_span(from, to, obstacle, sep) {
        Some(iv) => IntervalSet::single(iv.start, iv.end),
        None => IntervalSet::empty(),
    }
}

pub(crate) fn forbidden_departure_span<S: Scalar>(
    from: Point<S>,
    to: Point<S>,
    obstacle: &MotionSegment<S>,
    sep: S,
) -> Option<Interval<S>> {
    let d = from.dist(to);
    if d == S::zero() {
        let set = point_unsafe_intervals(from, obstacle, sep);
        return set.as_slice().first().copied();
    }
    let u = (to - from) * (S::one() / d);
    let (s, e) = (obstacle.depart, obstacle.arrive);
    let sep2 = sep * sep;

    if e.is_infinite() {
        // parked: contact is independent of the departure time
        let c = from - obstacle.from;
        let (_, t_hi) = negative_span(S::one(), S::two() * c.dot(u), c.norm2() - sep2, S::zero(), d)?;
        return Some(inflated(s - t_hi, S::infinity()));
    }

    let v = obstacle.velocity();
    let w = u - v;
    // relative offset at (progress 0, departure 0)
    let c = from - obstacle.from + v * s;

    let mut lo = S::infinity();
    let mut hi = S::neg_infinity();
    let mut take = |t: S| {
        if t < lo {
            lo = t;
        }
        if t > hi {
            hi = t;
        }
    };

    let span = |d0: Point<S>, slope: Point<S>, x0: S, x1: S| {
        negative_span(slope.norm2(), S::two() * d0.dot(slope), d0.norm2() - sep2, x0, x1)
    };

    // progress = 0, departure in [s, e]
    if let Some((a, b)) = span(c, -v, s, e) {
        take(a);
        take(b);
    }
    // progress = d, departure in [s - d, e - d]
    if let Some((a, b)) = span(c + w * d, -v, s - d, e - d) {
        take(a);
        take(b);
    }
    // departure + progress = s (obstacle just starting) and = e (just ending)
    let at_start = from - obstacle.from;
    if let Some((a, b)) = span(at_start, u, S::zero(), d) {
        take(s - b);
        take(s - a);
    }
    let at_end = from - obstacle.to;
    if let Some((a, b)) = span(at_end, u, S::zero(), d) {
        take(e - b);
        take(e - a);
    }

    // interior extremes of the ellipse |c + w*progress - v*t0| < sep
    let det = v.x * w.y - w.x * v.y;
    if det.abs() > S::lit(1e-9) {
        let inv = S::one() / det;
        let row_prog = Point::new(-v.y * inv, v.x * inv);
        let row_dep = Point::new(-w.y * inv, w.x * inv);
        let n = row_dep.norm();
        if n > S::zero() {
            for sign in [S::one(), -S::one()] {
                let rel = row_dep * (sign * sep / n) - c;
                let prog = row_prog.dot(rel);
                let t0 = row_dep.dot(rel);
                let tt = prog + t0;
                if prog >= S::zero() && prog <= d && tt >= s && tt <= e {
                    take(t0);
                }
            }
        }
    }

    (hi > lo).then(|| inflated(lo, hi))
}

/// Euclidean distance from `q` to the closed axis-aligned square centered
/// at `center` with side 1.
fn point_square_distance<S: Scalar>(q: Point<S>, center: Point<S>) -> S {
    let h = S::half();
    let dx = ((q.x - center.x).abs() - h).max(S::zero());
    let dy = ((q.y - center.y).abs() - h).max(S::zero());
    (dx * dx + dy * dy).sqrt()
}

fn point_segment_distance<S: Scalar>(q: Point<S>, a: Point<S>, b: Point<S>) -> S {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == S::zero() {
        return q.dist(a);
    }
    let t = ((q - a).dot(ab) / len2).max(S::zero()).min(S::one());
    q.dist(a + ab * t)
}

/// Liang-Barsky test of the segment against the closed unit square.
fn segment_hits_square<S: Scalar>(a: Point<S>, b: Point<S>, center: Point<S>) -> bool {
    let h = S::half();
    let dir = b - a;
    let (mut t0, mut t1) = (S::zero(), S::one());
    for (p, q) in [
        (-dir.x, a.x - (center.x - h)),
        (dir.x, (center.x + h) - a.x),
        (-dir.y, a.y - (center.y - h)),
        (dir.y, (center.y + h) - a.y),
    ] {
        if p == S::zero() {
            if q < S::zero() {
                return false;
            }
        } else {
            let r = q / p;
            if p < S::zero() {
                if r > t1 {
                    return false;
                }
                if r > t0 {
                    t0 = r;
                }
            } else {
                if r < t0 {
                    return false;
                }
                if r < t1 {
                    t1 = r;
                }
            }
        }
    }
    t0 <= t1
}

/// Minimum distance between segment `ab` and the unit square at `center`.
pub fn segment_square_distance<S: Scalar>(a: Point<S>, b: Point<S>, center: Point<S>) -> S {
    if segment_hits_square(a, b, center) {
        return S::zero();
    }
    let h = S::half();
    let mut best = point_square_distance(a, center).min(point_square_distance(b, center));
    for (sx, sy) in [(-h, -h), (-h, h), (h, -h), (h, h)] {
        let corner = Point::new(center.x + sx, center.y + sy);
        best = best.min(point_segment_distance(corner, a, b));
    }
    best
}

/// Whether a disk of radius `r` sweeping along `segment` stays clear of
/// every blocked square (touching is allowed).
pub fn segment_clears_static<S: Scalar>(segment: &MotionSegment<S>, map: &GridMap, r: S) -> Result<bool> {
    let h = S::half();
    let (w, ht) = (S::lit(map.width() as f64), S::lit(map.height() as f64));
    for p in [segment.from, segment.to] {
        if !(p.x >= -h && p.x <= w - h && p.y >= -h && p.y <= ht - h) {
            return Err(Error::OutOfBounds {
                x: p.x.round().to_i64().unwrap_or(i64::MIN),
                y: p.y.round().to_i64().unwrap_or(i64::MIN),
                width: map.width(),
                height: map.height(),
            });
        }
    }
    let (a, b) = (segment.from, segment.to);
    let reach = r + h;
    let x0 = (a.x.min(b.x) - reach).floor().max(S::zero()).to_usize().unwrap_or(0);
    let y0 = (a.y.min(b.y) - reach).floor().max(S::zero()).to_usize().unwrap_or(0);
    let x1 = (a.x.max(b.x) + reach).ceil().to_usize().unwrap_or(0).min(map.width() - 1);
    let y1 = (a.y.max(b.y) + reach).ceil().to_usize().unwrap_or(0).min(map.height() - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if map.is_blocked_xy(x, y) {
                let center = Point::new(S::lit(x as f64), S::lit(y as f64));
                if segment_square_distance(a, b, center) < r {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point<f64> {
        Point::new(x, y)
    }

    const EPS: f64 = 1e-6;

    #[test]
    fn parked_on_point_is_unsafe_forever() {
        let set = point_unsafe_intervals(p(0.0, 0.0), &MotionSegment::parked(p(0.0, 0.0), 0.0), 1.0);
        assert_eq!(set.len(), 1);
        let iv = set.as_slice()[0];
        assert!(iv.start <= 0.0 && iv.end.is_infinite());
    }

    #[test]
    fn head_on_pass_unsafe_between_four_and_six() {
        let seg = MotionSegment::travel(p(5.0, 0.0), p(-5.0, 0.0), 0.0);
        let set = point_unsafe_intervals(p(0.0, 0.0), &seg, 1.0);
        let iv = set.as_slice()[0];
        assert!((iv.start - (4.0 - EPS)).abs() < 1e-12);
        assert!((iv.end - (6.0 + EPS)).abs() < 1e-12);
    }

    #[test]
    fn distant_lane_is_safe() {
        let seg = MotionSegment::travel(p(5.0, 3.0), p(-5.0, 3.0), 0.0);
        assert!(point_unsafe_intervals(p(0.0, 0.0), &seg, 1.0).is_empty());
    }

    #[test]
    fn tangent_pass_is_safe() {
        let seg = MotionSegment::travel(p(5.0, 1.0), p(-5.0, 1.0), 0.0);
        assert!(point_unsafe_intervals(p(0.0, 0.0), &seg, 1.0).is_empty());
    }

    #[test]
    fn obstacle_parked_at_target_forbids_every_departure() {
        let obs = MotionSegment::parked(p(4.0, 0.0), 0.0);
        let set = move_forbidden_departures(p(0.0, 0.0), p(4.0, 0.0), &obs, 1.0);
        let iv = set.as_slice()[0];
        assert!(iv.start <= 0.0 && iv.end.is_infinite());
    }

    #[test]
    fn parallel_lanes_never_conflict() {
        let obs = MotionSegment::travel(p(0.0, 3.0), p(4.0, 3.0), 0.0);
        assert!(move_forbidden_departures(p(0.0, 0.0), p(4.0, 0.0), &obs, 1.0).is_empty());
        let obs = MotionSegment::travel(p(4.0, 3.0), p(0.0, 3.0), 2.0);
        assert!(move_forbidden_departures(p(0.0, 0.0), p(4.0, 0.0), &obs, 1.0).is_empty());
    }

    #[test]
    fn head_on_swap_forbids_around_zero() {
        let obs = MotionSegment::travel(p(4.0, 0.0), p(0.0, 0.0), 0.0);
        let set = move_forbidden_departures(p(0.0, 0.0), p(4.0, 0.0), &obs, 1.0);
        assert!(set.contains(0.0));
        // leaving once the obstacle has arrived at the origin is still blocked
        // until it is gone; it parks at `to` = (0,0) only until t = 4 here
        let iv = set.as_slice()[0];
        assert!(iv.start < -3.9 && iv.end > 3.9);
    }

    #[test]
    fn corridor_centerline_clears_neighbouring_rows() {
        let map = GridMap::parse("height 3\nwidth 5\n@@@@@\n.....\n@@@@@\n").unwrap();
        let seg = MotionSegment::travel(p(0.0, 1.0), p(4.0, 1.0), 0.0);
        assert!(segment_clears_static(&seg, &map, 0.4).unwrap());
        assert!(!segment_clears_static(&seg, &map, 0.51).unwrap());
    }

    #[test]
    fn diagonal_past_blocked_corner_is_rejected() {
        // blocked (1,0); row 0 is the first line
        let map = GridMap::parse("height 2\nwidth 2\n.@\n..\n").unwrap();
        let seg = MotionSegment::travel(p(0.0, 0.0), p(1.0, 1.0), 0.0);
        assert!(!segment_clears_static(&seg, &map, 0.3).unwrap());
        let through = MotionSegment::travel(p(0.0, 0.0), p(1.0, 0.0), 0.0);
        assert!(!segment_clears_static(&through, &map, 0.3).unwrap());
    }

    #[test]
    fn out_of_bounds_endpoint_is_an_error() {
        let map = GridMap::parse("height 1\nwidth 2\n..\n").unwrap();
        let seg = MotionSegment::travel(p(0.0, 0.0), p(2.0, 0.0), 0.0);
        assert!(segment_clears_static(&seg, &map, 0.3).is_err());
    }

    #[test]
    fn negative_span_cases() {
        // (x-1)(x-3) < 0
        assert_eq!(negative_span(1.0, -4.0, 3.0, 0.0, 10.0), Some((1.0, 3.0)));
        // double root at 2: tangency
        assert_eq!(negative_span(1.0, -4.0, 4.0, 0.0, 10.0), None);
        // linear, 2x - 2 < 0
        assert_eq!(negative_span(0.0, 2.0, -2.0, 0.0, 10.0), Some((0.0, 1.0)));
        // constant
        assert_eq!(negative_span(0.0, 0.0, -1.0, 0.0, f64::INFINITY), Some((0.0, f64::INFINITY)));
        assert_eq!(negative_span(0.0, 0.0, 0.0, 0.0, 1.0), None);
    }
}

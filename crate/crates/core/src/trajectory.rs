use crate::geometry::{MotionSegment, Point};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint<S> {
    pub at: Point<S>,
    pub t: S,
}

impl<S: Scalar> Waypoint<S> {
    pub fn new(at: Point<S>, t: S) -> Self {
        Self { at, t }
    }
}

/// Timed waypoints of one robot. Consecutive waypoints are either a
/// unit-speed move or a wait; the robot rests at the last waypoint forever.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub robot: usize,
    pub waypoints: Vec<Waypoint<S>>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn new(robot: usize, waypoints: Vec<Waypoint<S>>) -> Self {
        assert!(!waypoints.is_empty(), "a trajectory needs at least one waypoint");
        Self { robot, waypoints }
    }

    /// A robot that never leaves `at`.
    pub fn stationary(robot: usize, at: Point<S>) -> Self {
        Self::new(robot, vec![Waypoint::new(at, S::zero())])
    }

    pub fn start(&self) -> Point<S> {
        self.waypoints[0].at
    }

    pub fn goal(&self) -> Point<S> {
        self.waypoints[self.waypoints.len() - 1].at
    }

    /// Time of the last waypoint.
    pub fn arrival(&self) -> S {
        self.waypoints[self.waypoints.len() - 1].t
    }

    /// All motion and wait segments, ending with the infinite parking
    /// segment at the goal.
    pub fn segments(&self) -> impl Iterator<Item = MotionSegment<S>> + '_ {
        let moves = self.waypoints.windows(2).map(|w| MotionSegment {
            from: w[0].at,
            to: w[1].at,
            depart: w[0].t,
            arrive: w[1].t,
        });
        let last = self.waypoints[self.waypoints.len() - 1];
        moves.chain(std::iter::once(MotionSegment::parked(last.at, last.t)))
    }

    pub fn position_at(&self, t: S) -> Point<S> {
        let wps = &self.waypoints;
        if t <= wps[0].t {
            return wps[0].at;
        }
        let idx = wps.partition_point(|w| w.t <= t);
        if idx >= wps.len() {
            return wps[wps.len() - 1].at;
        }
        let (a, b) = (wps[idx - 1], wps[idx]);
        let dur = b.t - a.t;
        if dur <= S::zero() {
            return b.at;
        }
        a.at + (b.at - a.at) * ((t - a.t) / dur)
    }
}

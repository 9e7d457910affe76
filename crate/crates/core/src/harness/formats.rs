//! Scenario and solution text formats.
//!
//! Scenario: a header line `agents N` followed by `N` lines
//! `id sx sy gx gy` of cell indices. Solution: one line per robot,
//! `id: (x,y,t); (x,y,t); ...` with six-decimal fixed-point values.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::grid::Cell;
use crate::prioritized::Robot;
use crate::scalar::Scalar;
use crate::trajectory::{Trajectory, Waypoint};

pub fn parse_scenario(text: &str) -> Result<Vec<Robot>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, head) = lines.next().ok_or_else(|| Error::parse(1, "empty scenario"))?;
    let n: usize = match head.split_whitespace().collect::<Vec<_>>()[..] {
        ["agents", n] => n.parse().map_err(|_| Error::parse(1, format!("bad agent count {n:?}")))?,
        _ => return Err(Error::parse(1, "expected `agents N`")),
    };
    let mut robots = Vec::with_capacity(n);
    let mut ids = HashSet::new();
    let mut last = 1;
    for (line, l) in lines {
        last = line;
        if l.is_empty() {
            continue;
        }
        if robots.len() == n {
            return Err(Error::parse(line, format!("more than {n} robot lines")));
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::parse(line, format!("expected `id sx sy gx gy`, found {} fields", fields.len())));
        }
        let mut v = [0usize; 5];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f.parse().map_err(|_| Error::parse(line, format!("not a non-negative integer: {f:?}")))?;
        }
        if !ids.insert(v[0]) {
            return Err(Error::parse(line, format!("duplicate robot id {}", v[0])));
        }
        robots.push(Robot { id: v[0], start: Cell::new(v[1], v[2]), goal: Cell::new(v[3], v[4]) });
    }
    if robots.len() != n {
        return Err(Error::parse(last, format!("expected {n} robot lines, found {}", robots.len())));
    }
    Ok(robots)
}

pub fn format_scenario(robots: &[Robot]) -> String {
    let mut out = format!("agents {}\n", robots.len());
    for r in robots {
        let _ = writeln!(out, "{} {} {} {} {}", r.id, r.start.x, r.start.y, r.goal.x, r.goal.y);
    }
    out
}

/// One line per trajectory, in the order given.
pub fn format_solution<S: Scalar>(trajs: &[Trajectory<S>]) -> String {
    let mut out = String::new();
    for t in trajs {
        let _ = write!(out, "{}:", t.robot);
        for (k, w) in t.waypoints.iter().enumerate() {
            let sep = if k == 0 { " " } else { "; " };
            let _ = write!(
                out,
                "{sep}({:.6},{:.6},{:.6})",
                w.at.x.to_f64_lossy(),
                w.at.y.to_f64_lossy(),
                w.t.to_f64_lossy()
            );
        }
        out.push('\n');
    }
    out
}

pub fn parse_solution<S: Scalar>(text: &str) -> Result<Vec<Trajectory<S>>> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        let (id, rest) = l.split_once(':').ok_or_else(|| Error::parse(line, "expected `id: (x,y,t); ...`"))?;
        let id: usize = id.trim().parse().map_err(|_| Error::parse(line, format!("bad robot id {id:?}")))?;
        if !ids.insert(id) {
            return Err(Error::parse(line, format!("duplicate robot id {id}")));
        }
        let mut waypoints = Vec::new();
        for item in rest.split(';') {
            let inner = item
                .trim()
                .strip_prefix('(')
                .and_then(|s| s.strip_suffix(')'))
                .ok_or_else(|| Error::parse(line, format!("expected `(x,y,t)`, found {:?}", item.trim())))?;
            let nums: Vec<&str> = inner.split(',').map(str::trim).collect();
            if nums.len() != 3 {
                return Err(Error::parse(line, format!("expected 3 values in {inner:?}")));
            }
            let mut v = [S::zero(); 3];
            for (slot, s) in v.iter_mut().zip(&nums) {
                let x: f64 = s.parse().map_err(|_| Error::parse(line, format!("not a number: {s:?}")))?;
                if !x.is_finite() {
                    return Err(Error::parse(line, format!("not a finite number: {s:?}")));
                }
                *slot = S::lit(x);
            }
            waypoints.push(Waypoint::new(Point::new(v[0], v[1]), v[2]));
        }
        out.push(Trajectory::new(id, waypoints));
    }
    Ok(out)
}

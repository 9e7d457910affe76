//! Static grid environment, move generation and agent-free shortest paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{segment_clears_static, MotionSegment, Point};
use crate::scalar::{cmp, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn center<S: Scalar>(self) -> Point<S> {
        Point::new(S::lit(self.x as f64), S::lit(self.y as f64))
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Rectangular map of free (`.`) and blocked (`@`) unit cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn new(width: usize, height: usize, blocked: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Config("map dimensions must be at least 1x1".into()));
        }
        if blocked.len() != width * height {
            return Err(Error::Config(format!(
                "expected {} cells, got {}",
                width * height,
                blocked.len()
            )));
        }
        Ok(Self { width, height, blocked })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![false; width * height]).expect("positive dimensions")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn index(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    pub fn cell(&self, idx: usize) -> Cell {
        Cell::new(idx % self.width, idx / self.width)
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn is_blocked_xy(&self, x: usize, y: usize) -> bool {
        self.blocked[y * self.width + x]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.blocked[self.index(c)]
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        let i = self.index(c);
        self.blocked[i] = blocked;
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).filter(|&i| !self.blocked[i]).map(|i| self.cell(i))
    }

    pub fn check_free(&self, c: Cell) -> Result<()> {
        if !self.in_bounds(c) {
            return Err(Error::OutOfBounds {
                x: c.x as i64,
                y: c.y as i64,
                width: self.width,
                height: self.height,
            });
        }
        if self.blocked[self.index(c)] {
            return Err(Error::Blocked { x: c.x, y: c.y });
        }
        Ok(())
    }

    /// Whether a disk of radius `r` resting at the center of `c` clears
    /// every blocked square.
    pub fn is_statically_valid<S: Scalar>(&self, c: Cell, r: S) -> bool {
        self.is_free(c)
            && segment_clears_static(&MotionSegment::wait(c.center(), S::zero(), S::zero()), self, r)
                .unwrap_or(false)
    }

    /// Parses the map format: `height H`, `width W`, then `H` rows of `W`
    /// characters from `{'.', '@'}`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        let height = header(lines.next(), "height", 1)?;
        let width = header(lines.next(), "width", 2)?;
        if height == 0 || width == 0 {
            return Err(Error::parse(1, "map dimensions must be at least 1x1"));
        }
        let mut blocked = Vec::with_capacity(width * height);
        for row in 0..height {
            let line_no = row + 3;
            let line = lines
                .next()
                .ok_or_else(|| Error::parse(line_no, format!("expected {height} map rows, found {row}")))?;
            let mut n = 0;
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '.' => blocked.push(false),
                    '@' => blocked.push(true),
                    other => {
                        return Err(Error::parse(
                            line_no,
                            format!("illegal character {other:?} at column {}", col + 1),
                        ))
                    }
                }
                n += 1;
            }
            if n != width {
                return Err(Error::parse(line_no, format!("expected {width} characters, found {n}")));
            }
        }
        for (k, rest) in lines.enumerate() {
            if !rest.is_empty() {
                return Err(Error::parse(height + 3 + k, "unexpected content after the last map row"));
            }
        }
        Self::new(width, height, blocked)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

fn header(line: Option<&str>, key: &str, line_no: usize) -> Result<usize> {
    let line = line.ok_or_else(|| Error::parse(line_no, format!("missing `{key}` header")))?;
    let rest = line
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::parse(line_no, format!("expected `{key} <n>`")))?;
    rest.parse()
        .map_err(|_| Error::parse(line_no, format!("invalid {key} value {rest:?}")))
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "height {}", self.height)?;
        writeln!(f, "width {}", self.width)?;
        for y in 0..self.height {
            let row: String = (0..self.width)
                .map(|x| if self.is_blocked_xy(x, y) { '@' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for GridMap {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn from_degree(k: u32) -> Option<Self> {
        match k {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn degree(self) -> u32 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// Move set and robot radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveModel<S> {
    pub connectivity: Connectivity,
    pub radius: S,
}

impl<S: Scalar> MoveModel<S> {
    pub fn new(connectivity: Connectivity, radius: S) -> Self {
        Self { connectivity, radius }
    }

    /// Just under half a cell, so robots on adjacent cells never touch.
    pub fn default_radius() -> S {
        S::lit(0.5) - S::eps()
    }

    pub fn separation(&self) -> S {
        self.radius * S::two()
    }
}

impl<S: Scalar> Default for MoveModel<S> {
    fn default() -> Self {
        Self::new(Connectivity::Eight, Self::default_radius())
    }
}

const CARDINAL: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const DIAGONAL: [(i64, i64); 4] = [(1, 1), (-1, 1), (-1, -1), (1, -1)];

/// Successors of `c`: cardinal moves cost 1, diagonal moves sqrt(2); each
/// move's swept disk must clear every blocked square.
pub fn neighbors<S: Scalar>(c: Cell, map: &GridMap, mm: &MoveModel<S>) -> Result<Vec<(Cell, S)>> {
    map.check_free(c)?;
    let mut out = Vec::with_capacity(8);
    let mut push = |dx: i64, dy: i64, cost: S| -> Result<()> {
        let (nx, ny) = (c.x as i64 + dx, c.y as i64 + dy);
        if nx < 0 || ny < 0 {
            return Ok(());
        }
        let n = Cell::new(nx as usize, ny as usize);
        if !map.is_free(n) {
            return Ok(());
        }
        let seg = MotionSegment::travel(c.center(), n.center(), S::zero());
        if segment_clears_static(&seg, map, mm.radius)? {
            out.push((n, cost));
        }
        Ok(())
    };
    for (dx, dy) in CARDINAL {
        push(dx, dy, S::one())?;
    }
    if mm.connectivity == Connectivity::Eight {
        for (dx, dy) in DIAGONAL {
            push(dx, dy, S::SQRT_2())?;
        }
    }
    Ok(out)
}

/// Manhattan distance for 4-connected moves, octile for 8-connected.
pub fn heuristic<S: Scalar>(c: Cell, goal: Cell, mm: &MoveModel<S>) -> S {
    let dx = S::lit(c.x.abs_diff(goal.x) as f64);
    let dy = S::lit(c.y.abs_diff(goal.y) as f64);
    match mm.connectivity {
        Connectivity::Four => dx + dy,
        Connectivity::Eight => {
            let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
            (S::SQRT_2() - S::one()) * lo + hi
        }
    }
}

/// Adjacency lists for every free cell, computed once per map and model.
#[derive(Debug, Clone)]
pub struct MoveGraph<S> {
    model: MoveModel<S>,
    adjacency: Vec<Vec<(u32, S)>>,
}

impl<S: Scalar> MoveGraph<S> {
    pub fn new(map: &GridMap, model: MoveModel<S>) -> Self {
        let adjacency = (0..map.len())
            .map(|i| {
                let c = map.cell(i);
                if !map.is_free(c) {
                    return Vec::new();
                }
                neighbors(c, map, &model)
                    .expect("free cell")
                    .into_iter()
                    .map(|(n, cost)| (map.index(n) as u32, cost))
                    .collect()
            })
            .collect();
        Self { model, adjacency }
    }

    pub fn model(&self) -> &MoveModel<S> {
        &self.model
    }

    pub fn successors(&self, idx: usize) -> &[(u32, S)] {
        &self.adjacency[idx]
    }

    /// Uniform-cost distances from `source` to every cell (`inf` if
    /// unreachable). The graph is symmetric, so these are also distances
    /// towards `source`.
    pub fn distances_from(&self, source: usize) -> Vec<S> {
        let mut dist = vec![S::infinity(); self.adjacency.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = S::zero();
        heap.push(MinEntry(S::zero(), source));
        while let Some(MinEntry(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v as usize] {
                    dist[v as usize] = nd;
                    heap.push(MinEntry(nd, v as usize));
                }
            }
        }
        dist
    }

    /// Connected-component label per cell; blocked cells get `usize::MAX`.
    pub fn components(&self, map: &GridMap) -> Vec<usize> {
        let n = self.adjacency.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX || !map.is_free(map.cell(s)) {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if label[v as usize] == usize::MAX {
                        label[v as usize] = next;
                        stack.push(v as usize);
                    }
                }
            }
            next += 1;
        }
        label
    }
}

#[derive(Debug, Clone, Copy)]
struct MinEntry<S>(S, usize);

impl<S: Scalar> PartialEq for MinEntry<S> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for MinEntry<S> {}
impl<S: Scalar> PartialOrd for MinEntry<S> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<S: Scalar> Ord for MinEntry<S> {
    fn cmp(&self, o: &Self) -> Ordering {
        cmp(o.0, self.0).then_with(|| o.1.cmp(&self.1))
    }
}

/// Optimal single-robot path cost ignoring all other robots; `None` when
/// the goal is unreachable.
pub fn agent_free_shortest_path_len<S: Scalar>(
    start: Cell,
    goal: Cell,
    map: &GridMap,
    mm: &MoveModel<S>,
) -> Result<Option<S>> {
    map.check_free(start)?;
    map.check_free(goal)?;
    let graph = MoveGraph::new(map, *mm);
    let d = graph.distances_from(map.index(start))[map.index(goal)];
    Ok(d.is_finite().then_some(d))
}

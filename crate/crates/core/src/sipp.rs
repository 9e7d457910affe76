//! Safe-interval path planning for one robot among dynamic obstacles.
//!
//! Search states are `(cell, safe interval index)` with earliest-arrival
//! g-values. Waiting is implicit: a successor departs at the earliest time
//! inside the current interval for which the swept move avoids every
//! obstacle and the arrival lands in the successor's interval.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

pub use crate::trajectory::{Trajectory, Waypoint};

use crate::geometry::{forbidden_departure_span, push_point_unsafe, MotionSegment, Point};
use crate::grid::{heuristic, Cell, GridMap, MoveGraph, MoveModel};
use crate::interval::{Interval, IntervalSet};
use crate::scalar::{cmp, Scalar};

/// Something a planned robot must stay `2r` away from.
#[derive(Debug, Clone, PartialEq)]
pub enum DynamicObstacle<S> {
    /// A higher-priority robot's full trajectory, parking included.
    Trajectory(Trajectory<S>),
    /// Another robot's start, protected during `[0, until)`. `until` may
    /// be `+inf`; `0` protects nothing.
    SsiDisk { center: Point<S>, until: S },
}

impl<S: Scalar> DynamicObstacle<S> {
    fn segments(&self) -> Vec<MotionSegment<S>> {
        match self {
            DynamicObstacle::Trajectory(t) => t.segments().collect(),
            DynamicObstacle::SsiDisk { center, until } => {
                if *until > S::zero() {
                    vec![MotionSegment::wait(*center, S::zero(), *until)]
                } else {
                    Vec::new()
                }
            }
        }
    }
}

/// Read access to per-cell safe intervals.
pub trait SafeIntervals<S> {
    fn intervals(&self, cell: usize) -> &[Interval<S>];
}

/// Safe occupancy times for every cell. Blocked cells have none; a cell
/// untouched by any obstacle has exactly `[0, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeIntervalTable<S> {
    width: usize,
    height: usize,
    cells: Vec<IntervalSet<S>>,
}

impl<S: Scalar> SafeIntervals<S> for SafeIntervalTable<S> {
    fn intervals(&self, cell: usize) -> &[Interval<S>] {
        self.cells[cell].as_slice()
    }
}

impl<S: Scalar> SafeIntervalTable<S> {
    pub fn new(map: &GridMap) -> Self {
        let cells = (0..map.len())
            .map(|i| {
                if map.is_free(map.cell(i)) {
                    IntervalSet::all_time()
                } else {
                    IntervalSet::empty()
                }
            })
            .collect();
        Self { width: map.width(), height: map.height(), cells }
    }

    pub fn get(&self, cell: usize) -> &IntervalSet<S> {
        &self.cells[cell]
    }

    pub fn set(&mut self, cell: usize, safe: IntervalSet<S>) {
        self.cells[cell] = safe;
    }

    /// Removes from each nearby cell the times at which the obstacle is
    /// closer than `sep` to the cell center.
    pub fn subtract_obstacle(&mut self, obstacle: &DynamicObstacle<S>, sep: S) {
        for seg in obstacle.segments() {
            let (x0, y0, x1, y1) = cell_range(&seg, sep, S::zero(), self.width, self.height);
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let idx = y * self.width + x;
                    if self.cells[idx].is_empty() {
                        continue;
                    }
                    let p = Point::new(S::lit(x as f64), S::lit(y as f64));
                    let mut scratch = IntervalSet::empty();
                    push_point_unsafe(p, &seg, sep, &mut scratch);
                    for iv in scratch.iter() {
                        self.cells[idx].remove(iv.start, iv.end);
                    }
                }
            }
        }
    }
}

/// Per-cell safe intervals after removing every obstacle's influence.
pub fn build_safe_intervals<S: Scalar>(
    map: &GridMap,
    obstacles: &[DynamicObstacle<S>],
    mm: &MoveModel<S>,
) -> SafeIntervalTable<S> {
    let mut table = SafeIntervalTable::new(map);
    for o in obstacles {
        table.subtract_obstacle(o, mm.separation());
    }
    table
}

/// A table with a few cells replaced, used to lift a robot's own
/// protection off its start without rebuilding the whole table.
pub struct PatchedTable<'a, S> {
    pub base: &'a SafeIntervalTable<S>,
    pub patches: Vec<(usize, IntervalSet<S>)>,
}

impl<S: Scalar> SafeIntervals<S> for PatchedTable<'_, S> {
    fn intervals(&self, cell: usize) -> &[Interval<S>] {
        for (c, set) in &self.patches {
            if *c == cell {
                return set.as_slice();
            }
        }
        self.base.intervals(cell)
    }
}

/// Inclusive cell range `[x0, x1] x [y0, y1]` whose centers may lie within
/// `sep + pad` of the segment.
fn cell_range<S: Scalar>(seg: &MotionSegment<S>, sep: S, pad: S, w: usize, h: usize) -> (usize, usize, usize, usize) {
    let reach = sep + pad;
    let lo = |v: S| (v - reach).floor().max(S::zero()).to_usize().unwrap_or(0);
    let hi = |v: S, n: usize| (v + reach).ceil().max(S::zero()).to_usize().unwrap_or(0).min(n - 1);
    let (a, b) = (seg.from, seg.to);
    (lo(a.x.min(b.x)), lo(a.y.min(b.y)), hi(a.x.max(b.x), w), hi(a.y.max(b.y), h))
}

#[derive(Debug, Clone)]
struct Entry<S> {
    seg: MotionSegment<S>,
    tag: Option<usize>,
}

/// Spatially bucketed obstacle segments for swept-move queries.
///
/// A segment is stored under every cell `(x, y)` such that a unit-box
/// move whose lower-left cell is `(x, y)` might come within `sep` of it,
/// so a query only reads the bucket of the move's lower-left cell.
#[derive(Debug, Clone)]
pub struct ObstacleSet<S> {
    width: usize,
    height: usize,
    sep: S,
    entries: Vec<Entry<S>>,
    /// per bucket, timed moves sorted by departure
    moves: Vec<Vec<u32>>,
    /// per bucket, waits and parked segments
    waits: Vec<Vec<u32>>,
    longest_move: S,
}

impl<S: Scalar> ObstacleSet<S> {
    pub fn new(map: &GridMap, sep: S) -> Self {
        Self {
            width: map.width(),
            height: map.height(),
            sep,
            entries: Vec::new(),
            moves: vec![Vec::new(); map.len()],
            waits: vec![Vec::new(); map.len()],
            longest_move: S::zero(),
        }
    }

    pub fn separation(&self) -> S {
        self.sep
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds an obstacle. Queries may skip every segment carrying a given
    /// tag (a robot's own start protection).
    pub fn insert(&mut self, obstacle: &DynamicObstacle<S>, tag: Option<usize>) {
        for seg in obstacle.segments() {
            self.insert_segment(seg, tag);
        }
    }

    fn insert_segment(&mut self, seg: MotionSegment<S>, tag: Option<usize>) {
        let id = self.entries.len() as u32;
        let is_move = !seg.is_wait() && seg.arrive.is_finite() && seg.duration() > S::zero();
        if is_move && seg.duration() > self.longest_move {
            self.longest_move = seg.duration();
        }
        // shift the lower bound by one extra cell: the query cell is the
        // move's lower-left corner
        let reach = self.sep;
        let lo = |v: S| (v - reach - S::one()).floor().max(S::zero()).to_usize().unwrap_or(0);
        let hi = |v: S, n: usize| (v + reach).ceil().max(S::zero()).to_usize().unwrap_or(0).min(n - 1);
        let (a, b) = (seg.from, seg.to);
        let (x0, y0) = (lo(a.x.min(b.x)), lo(a.y.min(b.y)));
        let (x1, y1) = (hi(a.x.max(b.x), self.width), hi(a.y.max(b.y), self.height));
        self.entries.push(Entry { seg, tag });
        for y in y0..=y1 {
            for x in x0..=x1 {
                let bucket = y * self.width + x;
                if is_move {
                    let list = &mut self.moves[bucket];
                    let entries = &self.entries;
                    let pos = list.partition_point(|&e| entries[e as usize].seg.depart <= seg.depart);
                    list.insert(pos, id);
                } else {
                    self.waits[bucket].push(id);
                }
            }
        }
    }

    fn bucket_of(&self, from: Cell, to: Cell) -> usize {
        from.y.min(to.y) * self.width + from.x.min(to.x)
    }

    /// Every segment in the move's bucket that could forbid departure `t0`
    /// for a move of duration `dur`.
    fn relevant(&self, bucket: usize, t0: S, dur: S) -> impl Iterator<Item = &Entry<S>> + '_ {
        let eps = S::eps();
        let list = &self.moves[bucket];
        let earliest = t0 - self.longest_move - eps;
        let latest = t0 + dur + eps;
        let begin = list.partition_point(|&e| self.entries[e as usize].seg.depart < earliest);
        let moves = list[begin..]
            .iter()
            .map(|&e| &self.entries[e as usize])
            .take_while(move |e| e.seg.depart <= latest)
            .filter(move |e| e.seg.arrive >= t0 - eps);
        let waits = self.waits[bucket]
            .iter()
            .map(|&e| &self.entries[e as usize])
            .filter(move |e| e.seg.depart <= latest && e.seg.arrive >= t0 - eps);
        moves.chain(waits)
    }

    /// Earliest departure in `[lo, hi)` for the move `from -> to` that keeps
    /// clear of every obstacle not tagged `skip`.
    pub fn earliest_departure(&self, from: Cell, to: Cell, lo: S, hi: S, skip: Option<usize>) -> Option<S> {
        let bucket = self.bucket_of(from, to);
        let (a, b) = (from.center::<S>(), to.center::<S>());
        let dur = a.dist(b);
        let mut t = lo;
        loop {
            if !(t < hi) {
                return None;
            }
            let mut next = t;
            for e in self.relevant(bucket, t, dur) {
                if skip.is_some() && e.tag == skip {
                    continue;
                }
                if let Some(iv) = forbidden_departure_span(a, b, &e.seg, self.sep) {
                    if iv.contains(t) && iv.end > next {
                        next = iv.end;
                    }
                }
            }
            if next == t {
                return Some(t);
            }
            t = next;
        }
    }

    /// Full set of forbidden departures for the move `from -> to`.
    pub fn forbidden_departures(&self, from: Cell, to: Cell, skip: Option<usize>) -> IntervalSet<S> {
        let bucket = self.bucket_of(from, to);
        let (a, b) = (from.center::<S>(), to.center::<S>());
        self.moves[bucket]
            .iter()
            .chain(&self.waits[bucket])
            .map(|&e| &self.entries[e as usize])
            .filter(|e| skip.is_none() || e.tag != skip)
            .filter_map(|e| forbidden_departure_span(a, b, &e.seg, self.sep))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Node<S> {
    cell: u32,
    interval: u32,
    g: S,
    depart: S,
    parent: u32,
}

#[derive(Debug, Clone, Copy)]
struct Open<S> {
    f: S,
    g: S,
    cell: u32,
    interval: u32,
    node: u32,
}

impl<S: Scalar> PartialEq for Open<S> {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Open<S> {}
impl<S: Scalar> PartialOrd for Open<S> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<S: Scalar> Ord for Open<S> {
    // max-heap: the "greatest" entry is popped first
    fn cmp(&self, o: &Self) -> Ordering {
        cmp(o.f, self.f)
            .then_with(|| cmp(self.g, o.g))
            .then_with(|| (o.cell, o.interval).cmp(&(self.cell, self.interval)))
            .then_with(|| o.node.cmp(&self.node))
    }
}

/// Result of one single-robot search.
#[derive(Debug, Clone)]
pub struct SippOutcome<S> {
    pub trajectory: Option<Trajectory<S>>,
    /// number of states popped from the open list
    pub expansions: usize,
}

/// Reusable single-robot planner over one map and move model.
pub struct SippPlanner<'a, S> {
    map: &'a GridMap,
    graph: &'a MoveGraph<S>,
}

impl<'a, S: Scalar> SippPlanner<'a, S> {
    pub fn new(map: &'a GridMap, graph: &'a MoveGraph<S>) -> Self {
        Self { map, graph }
    }

    /// Earliest-arrival trajectory from `start` to `goal` that ends in a
    /// safe interval extending to infinity.
    pub fn search<T: SafeIntervals<S>>(
        &self,
        robot: usize,
        start: Cell,
        goal: Cell,
        table: &T,
        obstacles: &ObstacleSet<S>,
        skip: Option<usize>,
    ) -> SippOutcome<S> {
        let map = self.map;
        let model = self.graph.model();
        let start_idx = map.index(start);
        let goal_idx = map.index(goal);
        let mut expansions = 0;
        let fail = |expansions| SippOutcome { trajectory: None, expansions };

        let start_ivs = table.intervals(start_idx);
        let Some(iv0) = start_ivs.iter().position(|iv| iv.contains(S::zero())) else {
            return fail(0);
        };

        let mut nodes: Vec<Node<S>> = Vec::new();
        let mut best: HashMap<(u32, u32), S> = HashMap::new();
        let mut open = BinaryHeap::new();
        nodes.push(Node { cell: start_idx as u32, interval: iv0 as u32, g: S::zero(), depart: S::zero(), parent: u32::MAX });
        best.insert((start_idx as u32, iv0 as u32), S::zero());
        open.push(Open {
            f: heuristic(start, goal, model),
            g: S::zero(),
            cell: start_idx as u32,
            interval: iv0 as u32,
            node: 0,
        });

        while let Some(top) = open.pop() {
            let node = nodes[top.node as usize];
            if best.get(&(node.cell, node.interval)).is_some_and(|&b| node.g > b) {
                continue;
            }
            expansions += 1;
            let cell = node.cell as usize;
            let here = table.intervals(cell)[node.interval as usize];
            if cell == goal_idx && here.is_unbounded() {
                return SippOutcome { trajectory: Some(self.reconstruct(robot, &nodes, top.node)), expansions };
            }
            let from = map.cell(cell);
            for &(nb, dur) in self.graph.successors(cell) {
                let ivs = table.intervals(nb as usize);
                let first = ivs.partition_point(|iv| iv.end <= node.g + dur);
                for (j, target) in ivs.iter().enumerate().skip(first) {
                    if target.start >= here.end + dur {
                        break;
                    }
                    let lo = node.g.max(target.start - dur);
                    let hi = here.end.min(target.end - dur);
                    if !(lo < hi) {
                        continue;
                    }
                    let to = map.cell(nb as usize);
                    let Some(depart) = obstacles.earliest_departure(from, to, lo, hi, skip) else {
                        continue;
                    };
                    let g = depart + dur;
                    let key = (nb, j as u32);
                    if best.get(&key).is_some_and(|&b| b <= g) {
                        continue;
                    }
                    best.insert(key, g);
                    let id = nodes.len() as u32;
                    nodes.push(Node { cell: nb, interval: j as u32, g, depart, parent: top.node });
                    open.push(Open { f: g + heuristic(to, goal, model), g, cell: nb, interval: j as u32, node: id });
                }
            }
        }
        fail(expansions)
    }

    fn reconstruct(&self, robot: usize, nodes: &[Node<S>], last: u32) -> Trajectory<S> {
        let mut chain = Vec::new();
        let mut cur = last;
        while cur != u32::MAX {
            chain.push(nodes[cur as usize]);
            cur = nodes[cur as usize].parent;
        }
        chain.reverse();
        let center = |idx: u32| self.map.cell(idx as usize).center::<S>();
        let mut wps = vec![Waypoint::new(center(chain[0].cell), S::zero())];
        for pair in chain.windows(2) {
            let (prev, next) = (pair[0], pair[1]);
            if next.depart > prev.g {
                wps.push(Waypoint::new(center(prev.cell), next.depart));
            }
            wps.push(Waypoint::new(center(next.cell), next.g));
        }
        Trajectory::new(robot, wps)
    }
}

/// One-shot search: builds the move graph and obstacle index from
/// `obstacles` and plans `start -> goal`. `None` means no trajectory exists.
pub fn sipp_search<S: Scalar>(
    start: Cell,
    goal: Cell,
    table: &SafeIntervalTable<S>,
    obstacles: &[DynamicObstacle<S>],
    map: &GridMap,
    mm: &MoveModel<S>,
) -> Option<Trajectory<S>> {
    let graph = MoveGraph::new(map, *mm);
    let mut index = ObstacleSet::new(map, mm.separation());
    for o in obstacles {
        index.insert(o, None);
    }
    SippPlanner::new(map, &graph).search(0, start, goal, table, &index, None).trajectory
}

//! Sorted sets of disjoint half-open time intervals.

use crate::scalar::{cmp, Scalar};

/// A half-open interval `[start, end)`. `end` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<S> {
    pub start: S,
    pub end: S,
}

impl<S: Scalar> Interval<S> {
    pub fn new(start: S, end: S) -> Self {
        Self { start, end }
    }

    /// `[start, +inf)`.
    pub fn from(start: S) -> Self {
        Self { start, end: S::infinity() }
    }

    pub fn is_empty(&self) -> bool {
        !(self.end > self.start)
    }

    pub fn contains(&self, t: S) -> bool {
        self.start <= t && t < self.end
    }

    pub fn is_unbounded(&self) -> bool {
        self.end.is_infinite()
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Normalized union of half-open intervals: sorted ascending, pairwise
/// disjoint, no empty members, and touching members merged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet<S> {
    intervals: Vec<Interval<S>>,
}

impl<S: Scalar> IntervalSet<S> {
    pub fn empty() -> Self {
        Self { intervals: Vec::new() }
    }

    pub fn single(start: S, end: S) -> Self {
        let mut s = Self::empty();
        s.insert(start, end);
        s
    }

    /// `[0, +inf)`.
    pub fn all_time() -> Self {
        Self::single(S::zero(), S::infinity())
    }

    /// Builds a set from arbitrary (possibly overlapping or empty) intervals.
    pub fn from_intervals<I: IntoIterator<Item = Interval<S>>>(iter: I) -> Self {
        let mut s = Self { intervals: iter.into_iter().collect() };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        self.intervals.retain(|iv| !iv.is_empty());
        self.intervals.sort_by(|a, b| cmp(a.start, b.start));
        let mut merged: Vec<Interval<S>> = Vec::with_capacity(self.intervals.len());
        for iv in self.intervals.drain(..) {
            match merged.last_mut() {
                Some(last) if iv.start <= last.end => {
                    if iv.end > last.end {
                        last.end = iv.end;
                    }
                }
                _ => merged.push(iv),
            }
        }
        self.intervals = merged;
    }

    pub fn as_slice(&self) -> &[Interval<S>] {
        &self.intervals
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval<S>> {
        self.intervals.iter()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, t: S) -> bool {
        self.find(t).is_some()
    }

    /// Index of the member containing `t`.
    pub fn find(&self, t: S) -> Option<usize> {
        let idx = self.intervals.partition_point(|iv| iv.end <= t);
        match self.intervals.get(idx) {
            Some(iv) if iv.contains(t) => Some(idx),
            _ => None,
        }
    }

    /// Adds `[start, end)` keeping the set normalized.
    pub fn insert(&mut self, start: S, end: S) {
        if !(end > start) {
            return;
        }
        // first member that could touch the new interval
        let lo = self.intervals.partition_point(|iv| iv.end < start);
        let mut hi = lo;
        let mut new = Interval::new(start, end);
        while hi < self.intervals.len() && self.intervals[hi].start <= new.end {
            let iv = self.intervals[hi];
            if iv.start < new.start {
                new.start = iv.start;
            }
            if iv.end > new.end {
                new.end = iv.end;
            }
            hi += 1;
        }
        self.intervals.splice(lo..hi, std::iter::once(new));
    }

    /// Removes `[start, end)` from the set.
    pub fn remove(&mut self, start: S, end: S) {
        if !(end > start) {
            return;
        }
        let lo = self.intervals.partition_point(|iv| iv.end <= start);
        let mut hi = lo;
        while hi < self.intervals.len() && self.intervals[hi].start < end {
            hi += 1;
        }
        if lo == hi {
            return;
        }
        let first = self.intervals[lo];
        let last = self.intervals[hi - 1];
        let mut keep: [Option<Interval<S>>; 2] = [None, None];
        if first.start < start {
            keep[0] = Some(Interval::new(first.start, start));
        }
        if last.end > end {
            keep[1] = Some(Interval::new(end, last.end));
        }
        self.intervals.splice(lo..hi, keep.into_iter().flatten());
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn union_with(&mut self, other: &Self) {
        if other.is_empty() {
            return;
        }
        if self.is_empty() {
            self.intervals = other.intervals.clone();
            return;
        }
        self.intervals.extend_from_slice(&other.intervals);
        self.normalize();
    }

    pub fn subtract(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for iv in &other.intervals {
            out.remove(iv.start, iv.end);
        }
        out
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let a = self.intervals[i];
            let b = other.intervals[j];
            let start = if a.start > b.start { a.start } else { b.start };
            let end = if a.end < b.end { a.end } else { b.end };
            if end > start {
                out.push(Interval::new(start, end));
            }
            if a.end < b.end {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { intervals: out }
    }

    /// Complement relative to `[lo, hi)`.
    pub fn complement_within(&self, lo: S, hi: S) -> Self {
        let mut out = Self::single(lo, hi);
        for iv in &self.intervals {
            out.remove(iv.start, iv.end);
        }
        out
    }

    /// Smallest `t >= from` not covered by the set.
    pub fn first_gap_from(&self, from: S) -> S {
        match self.find(from) {
            Some(i) => self.intervals[i].end,
            None => from,
        }
    }
}

impl<S: Scalar> FromIterator<Interval<S>> for IntervalSet<S> {
    fn from_iter<I: IntoIterator<Item = Interval<S>>>(iter: I) -> Self {
        Self::from_intervals(iter)
    }
}

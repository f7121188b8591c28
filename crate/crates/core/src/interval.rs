//! Intervals of the line and grid covers of `[0,1]`.
//!
//! An [`IntervalCover`] is the finite stand-in used throughout the crate for
//! limit sets: the union of the grid cells hit by a point cloud, merged into
//! sorted disjoint intervals.

use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::float;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    /// Open interval spanned by two numbers in either order.
    pub fn spanned(a: f64, b: f64) -> Self {
        if a <= b {
            Interval::open(a, b)
        } else {
            Interval::open(b, a)
        }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    /// Membership in the open interval shrunk by `slack` on both sides;
    /// points within `slack` of an endpoint are not counted as inside.
    pub fn contains_strictly(&self, x: f64, slack: f64) -> bool {
        x > self.lo + slack && x < self.hi - slack
    }

    /// Membership in the closure widened by `slack`.
    pub fn contains_loosely(&self, x: f64, slack: f64) -> bool {
        x >= self.lo - slack && x <= self.hi + slack
    }

    /// `self` lies inside the closure of `other` widened by `slack`.
    pub fn is_within(&self, other: &Interval, slack: f64) -> bool {
        self.lo >= other.lo - slack && self.hi <= other.hi + slack
    }

    /// Both endpoints of the closure of `self` lie strictly inside `other`.
    pub fn closure_inside(&self, other: &Interval) -> bool {
        self.lo > other.lo && self.hi < other.hi
    }

    /// Two open intervals are linked when each contains a boundary point of
    /// the other.
    pub fn is_linked_with(&self, other: &Interval) -> bool {
        let a_in_b = other.contains_strictly(self.lo, 0.0) || other.contains_strictly(self.hi, 0.0);
        let b_in_a = self.contains_strictly(other.lo, 0.0) || self.contains_strictly(other.hi, 0.0);
        a_in_b && b_in_a
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn intersection(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo < hi {
            Some(Interval::open(lo, hi))
        } else {
            None
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::open(self.lo.min(other.lo), self.hi.max(other.hi))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{}{}, {}{}", l, self.lo, self.hi, r)
    }
}

/// Merge a list of open intervals into sorted disjoint ones. Intervals that
/// overlap are merged; intervals that merely touch are kept apart.
pub fn merge_overlapping(mut intervals: Vec<Interval>) -> Vec<Interval> {
    intervals.retain(|i| i.lo < i.hi);
    intervals.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
    for iv in intervals {
        match out.last_mut() {
            Some(last) if iv.lo < last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// Finite grid representation of a subset of `[0,1]`: the set of occupied
/// cells `[i/n, (i+1)/n]`, stored as sorted runs of consecutive cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "CoverRepr", from = "CoverRepr")]
pub struct IntervalCover {
    pub grid_size: usize,
    /// Inclusive cell ranges `(first, last)`, sorted and non-adjacent.
    runs: Vec<(usize, usize)>,
}

/// Serialized form of a cover: the cell runs and, for readers, the
/// intervals they span.
#[derive(Serialize, Deserialize)]
struct CoverRepr {
    grid_size: usize,
    runs: Vec<(usize, usize)>,
    #[serde(default)]
    intervals: Vec<(f64, f64)>,
}

impl From<IntervalCover> for CoverRepr {
    fn from(c: IntervalCover) -> Self {
        let intervals = c.intervals().iter().map(|i| (i.lo, i.hi)).collect();
        CoverRepr { grid_size: c.grid_size, runs: c.runs, intervals }
    }
}

impl From<CoverRepr> for IntervalCover {
    fn from(r: CoverRepr) -> Self {
        let n = r.grid_size.max(1);
        let mut mask = alloc::vec![false; n];
        for (a, b) in r.runs {
            mask[a.min(n - 1)..=b.min(n - 1)].fill(true);
        }
        IntervalCover::from_mask(&mask)
    }
}

impl IntervalCover {
    pub fn empty(grid_size: usize) -> Self {
        IntervalCover { grid_size: grid_size.max(1), runs: Vec::new() }
    }

    pub fn full(grid_size: usize) -> Self {
        let n = grid_size.max(1);
        IntervalCover { grid_size: n, runs: alloc::vec![(0, n - 1)] }
    }

    pub fn cell_of(grid_size: usize, x: f64) -> usize {
        let n = grid_size.max(1);
        let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
        let i = float::floor(x * n as f64) as usize;
        i.min(n - 1)
    }

    pub fn from_points<I: IntoIterator<Item = f64>>(grid_size: usize, points: I) -> Self {
        let n = grid_size.max(1);
        let mut occupied = alloc::vec![false; n];
        for x in points {
            if x.is_finite() {
                occupied[Self::cell_of(n, x)] = true;
            }
        }
        Self::from_mask(&occupied)
    }

    pub fn from_mask(occupied: &[bool]) -> Self {
        let mut runs = Vec::new();
        let mut start: Option<usize> = None;
        for (i, &o) in occupied.iter().enumerate() {
            match (o, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, occupied.len() - 1));
        }
        IntervalCover { grid_size: occupied.len().max(1), runs }
    }

    /// Cells meeting any of the given intervals (closures).
    pub fn from_intervals(grid_size: usize, intervals: &[Interval]) -> Self {
        let n = grid_size.max(1);
        let mut occupied = alloc::vec![false; n];
        for iv in intervals {
            if iv.hi < 0.0 || iv.lo > 1.0 || iv.lo > iv.hi {
                continue;
            }
            let a = Self::cell_of(n, iv.lo);
            let b = Self::cell_of(n, iv.hi);
            for o in &mut occupied[a..=b] {
                *o = true;
            }
        }
        Self::from_mask(&occupied)
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = alloc::vec![false; self.grid_size];
        for &(a, b) in &self.runs {
            for o in &mut m[a..=b] {
                *o = true;
            }
        }
        m
    }

    pub fn runs(&self) -> &[(usize, usize)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.runs.iter().map(|&(a, b)| b - a + 1).sum()
    }

    pub fn component_count(&self) -> usize {
        self.runs.len()
    }

    pub fn fraction(&self) -> f64 {
        self.cell_count() as f64 / self.grid_size as f64
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.grid_size as f64
    }

    /// The merged runs as closed intervals of `[0,1]`.
    pub fn intervals(&self) -> Vec<Interval> {
        let w = self.cell_width();
        self.runs
            .iter()
            .map(|&(a, b)| Interval::closed(a as f64 * w, (b + 1) as f64 * w))
            .collect()
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        self.runs.iter().any(|&(a, b)| a <= cell && cell <= b)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.contains_cell(Self::cell_of(self.grid_size, x))
    }

    pub fn union(&self, other: &IntervalCover) -> IntervalCover {
        let other = other.regrid(self.grid_size);
        let a = self.mask();
        let b = other.mask();
        let m: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
        Self::from_mask(&m)
    }

    pub fn intersection(&self, other: &IntervalCover) -> IntervalCover {
        let other = other.regrid(self.grid_size);
        let a = self.mask();
        let b = other.mask();
        let m: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x && *y).collect();
        Self::from_mask(&m)
    }

    /// Widen every run by `cells` on both sides.
    pub fn dilate(&self, cells: usize) -> IntervalCover {
        let n = self.grid_size;
        let mut m = alloc::vec![false; n];
        for &(a, b) in &self.runs {
            let lo = a.saturating_sub(cells);
            let hi = (b + cells).min(n - 1);
            for o in &mut m[lo..=hi] {
                *o = true;
            }
        }
        Self::from_mask(&m)
    }

    /// Every cell of `self` is a cell of `other` (after regridding `self`).
    pub fn is_subset_of(&self, other: &IntervalCover) -> bool {
        let me = self.regrid(other.grid_size);
        let b = other.mask();
        me.mask().iter().zip(&b).all(|(x, y)| !*x || *y)
    }

    /// Same set on another grid: a target cell is occupied when it meets an
    /// occupied source cell (closed cells, so refining keeps the set and
    /// coarsening can only grow it).
    pub fn regrid(&self, grid_size: usize) -> IntervalCover {
        if grid_size == self.grid_size {
            return self.clone();
        }
        let w = self.cell_width();
        let inner: Vec<Interval> = self
            .runs
            .iter()
            .map(|&(a, b)| {
                // shrink by a hair so closed cell ends do not leak into the
                // neighbouring target cell
                let lo = a as f64 * w;
                let hi = (b + 1) as f64 * w;
                let eps = w * 1e-9;
                Interval::closed(lo + eps, hi - eps)
            })
            .collect();
        IntervalCover::from_intervals(grid_size, &inner)
    }

    /// Maximal runs of unoccupied cells strictly between occupied ones.
    pub fn gaps(&self) -> Vec<(usize, usize)> {
        self.runs.windows(2).map(|w| (w[0].1 + 1, w[1].0 - 1)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_merges_adjacent_cells() {
        let c = IntervalCover::from_points(10, [0.05, 0.15, 0.55, 0.999, 1.0]);
        assert_eq!(c.runs(), &[(0, 1), (5, 5), (9, 9)]);
        assert_eq!(c.cell_count(), 4);
        assert_eq!(c.gaps(), alloc::vec![(2, 4), (6, 8)]);
        assert!(c.contains(0.12));
        assert!(!c.contains(0.3));
    }

    #[test]
    fn regrid_refine_then_coarsen_is_identity() {
        let c = IntervalCover::from_points(16, [0.1, 0.11, 0.5, 0.93]);
        let fine = c.regrid(64);
        assert_eq!(fine.cell_count(), 4 * c.cell_count());
        assert_eq!(fine.regrid(16), c);
        assert!(c.is_subset_of(&fine) && fine.is_subset_of(&c));
    }

    #[test]
    fn linked_intervals() {
        let a = Interval::open(0.1, 0.6);
        let b = Interval::open(0.3, 0.8);
        let c = Interval::open(0.2, 0.5);
        assert!(a.is_linked_with(&b));
        assert!(!a.is_linked_with(&c));
        assert!(c.closure_inside(&a));
    }

    #[test]
    fn merge_keeps_touching_apart() {
        let m = merge_overlapping(alloc::vec![
            Interval::open(0.5, 0.7),
            Interval::open(0.1, 0.3),
            Interval::open(0.3, 0.4),
            Interval::open(0.6, 0.9),
        ]);
        assert_eq!(m.len(), 3);
        assert_eq!((m[2].lo, m[2].hi), (0.5, 0.9));
    }
}

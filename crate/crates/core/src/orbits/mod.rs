//! Forward orbits, preimage trees, limit-set covers and Lyapunov exponents.

mod periodic;

pub use periodic::{
    is_lyndon, minimal_period_orbit, periodic_orbits, MinimalPeriodOrbit, PeriodicOrbit,
    Stability,
};

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float;
use crate::interval::IntervalCover;
use crate::map::{IntervalMap, Side, SignedPoint};

/// A finite forward orbit `x, f(x), ..., f^n(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub start: SignedPoint,
    pub points: Vec<f64>,
    /// First index `k` with `|x_k - c| <= eps_critical`.
    pub hit_critical_at: Option<usize>,
    /// Limit used whenever the orbit sits on the critical point.
    pub side_resolution: Side,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.points.last().unwrap_or(&self.start.x)
    }
}

/// `n` iterates of `p`. Critical hits are continued with `p.side`.
pub fn iterate<M: IntervalMap + ?Sized>(f: &M, p: SignedPoint, n: usize) -> Orbit {
    let mut points = Vec::with_capacity(n + 1);
    let mut hit = None;
    let mut x = p.x;
    points.push(x);
    for k in 0..n {
        if hit.is_none() && f.is_critical(x) {
            hit = Some(k);
        }
        x = f.evaluate(SignedPoint { x, side: p.side });
        points.push(x);
    }
    if hit.is_none() && f.is_critical(x) {
        hit = Some(n);
    }
    Orbit { start: p, points, hit_critical_at: hit, side_resolution: p.side }
}

/// Grid cover of the iterates `transient .. transient + length` of `p`.
pub fn omega_estimate<M: IntervalMap + ?Sized>(
    f: &M,
    p: SignedPoint,
    transient: usize,
    length: usize,
    grid: usize,
) -> IntervalCover {
    let mut occupied = alloc::vec![false; grid.max(2)];
    omega_mark(f, p, transient, length, &mut occupied);
    IntervalCover::from_mask(&occupied)
}

/// Mark the cells visited by iterates `transient .. transient + length`.
pub(crate) fn omega_mark<M: IntervalMap + ?Sized>(
    f: &M,
    p: SignedPoint,
    transient: usize,
    length: usize,
    occupied: &mut [bool],
) {
    let n = occupied.len();
    let mut x = p.x;
    for _ in 0..transient {
        x = f.evaluate(SignedPoint { x, side: p.side });
    }
    for _ in 0..length {
        occupied[IntervalCover::cell_of(n, x)] = true;
        x = f.evaluate(SignedPoint { x, side: p.side });
    }
}

/// `f^{-1}(y)`: at most one point per branch, plus the critical point (with
/// the matching side) when `y` is a critical value.
pub fn preimages<M: IntervalMap + ?Sized>(f: &M, y: f64) -> Vec<SignedPoint> {
    let eps = f.tolerances().eps_value;
    let c = f.critical_point();
    let mut out = Vec::with_capacity(2);
    for side in [Side::Left, Side::Right] {
        let (lo, hi) = f.branch_image(side);
        if y < lo - eps || y > hi + eps {
            continue;
        }
        let crit = match side {
            Side::Left => (y - hi).abs() <= eps,
            Side::Right => (y - lo).abs() <= eps,
        };
        let x = if crit { c } else { f.branch_preimage(side, y) };
        out.push(SignedPoint { x, side });
    }
    out
}

/// Grid cover of the deep levels of the backward tree of `x`.
///
/// The tree is expanded breadth first to `depth`, keeping one node per
/// sub-cell (a grid cell split in [`ALPHA_SUBCELLS`]) on each level; cells
/// holding nodes of level `>= depth / 2` form the cover.
pub const ALPHA_SUBCELLS: usize = 8;

pub fn alpha_estimate<M: IntervalMap + ?Sized>(
    f: &M,
    x: f64,
    depth: usize,
    grid: usize,
) -> Result<IntervalCover> {
    let grid = grid.max(2);
    if preimages(f, x).is_empty() {
        return Err(Error::PreimageTreeEmpty { x });
    }
    let mut occupied = alloc::vec![false; grid];
    let mut level: Vec<f64> = alloc::vec![x];
    let from = depth / 2;
    for d in 0..=depth {
        if d >= from {
            for &y in &level {
                occupied[IntervalCover::cell_of(grid, y)] = true;
            }
        }
        if d == depth {
            break;
        }
        let mut seen = BTreeSet::new();
        let mut next = Vec::with_capacity(level.len() * 2);
        for &y in &level {
            for q in preimages(f, y) {
                if seen.insert(IntervalCover::cell_of(grid * ALPHA_SUBCELLS, q.x)) {
                    next.push(q.x);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        level = next;
    }
    Ok(IntervalCover::from_mask(&occupied))
}

/// Finite Birkhoff average of `log |Df|`; a finite-time stand-in for the
/// lower Lyapunov exponent, with no convergence claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    /// Number of terms averaged.
    pub n: usize,
    pub aborted_at_critical: bool,
    /// The orbit points whose slopes were averaged.
    pub points: Vec<f64>,
}

impl LyapunovEstimate {
    /// Average recomputed from the stored orbit.
    pub fn recompute<M: IntervalMap + ?Sized>(&self, f: &M) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let s: f64 = self.points.iter().map(|&x| float::ln(f.slope(x))).sum();
        s / self.points.len() as f64
    }
}

pub fn lyapunov<M: IntervalMap + ?Sized>(f: &M, p: SignedPoint, n: usize) -> LyapunovEstimate {
    let mut x = p.x;
    let mut points = Vec::with_capacity(n);
    let mut sum = 0.0;
    let mut aborted = false;
    for _ in 0..n {
        if f.is_critical(x) {
            aborted = true;
            break;
        }
        points.push(x);
        sum += float::ln(f.slope(x));
        x = f.evaluate(SignedPoint { x, side: p.side });
    }
    let k = points.len();
    LyapunovEstimate {
        value: if k == 0 { 0.0 } else { sum / k as f64 },
        n: k,
        aborted_at_critical: aborted,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{MapParams, StandardLorenzMap};
    use proptest::prelude::*;

    fn fmap() -> StandardLorenzMap {
        StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0)).unwrap()
    }

    fn cmap() -> StandardLorenzMap {
        StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 0.2, 0.1)).unwrap()
    }

    #[test]
    fn iterate_examples() {
        let o = iterate(&fmap(), SignedPoint::new(0.25), 4);
        assert_eq!(o.points, [0.25, 0.75, 0.25, 0.75, 0.25]);
        assert_eq!(o.hit_critical_at, None);

        let o = iterate(&fmap(), SignedPoint::left(0.5), 2);
        assert_eq!(o.points, [0.5, 1.0, 1.0]);
        assert_eq!(o.hit_critical_at, Some(0));
        let o = iterate(&fmap(), SignedPoint::right(0.5), 2);
        assert_eq!(o.points, [0.5, 0.0, 0.0]);

        let o = iterate(&cmap(), SignedPoint::new(0.9), 3);
        // oracle: substitute step by step
        let f1 = 0.1 + 0.9 * 0.8f64 * 0.8;
        let s = (f1 - 0.5) / 0.5;
        let f2 = 0.1 + 0.9 * s * s;
        let u = (0.5 - f2) / 0.5;
        let f3 = 0.2 * (1.0 - u * u);
        assert!((o.points[1] - 0.676).abs() < 1e-12);
        assert!((o.points[2] - f2).abs() < 1e-12 && (f2 - 0.2115).abs() < 1e-4);
        assert!((o.points[3] - f3).abs() < 1e-12 && (f3 - 0.1334).abs() < 1e-4);
    }

    #[test]
    fn omega_examples() {
        let w = omega_estimate(&cmap(), SignedPoint::new(0.9), 10_000, 1000, 1000);
        assert_eq!(w.runs(), &[(0, 0)]);
        let w = omega_estimate(&fmap(), SignedPoint::new(0.25), 10, 100, 1000);
        assert_eq!(w.runs(), &[(250, 250), (750, 750)]);
    }

    #[test]
    fn preimage_examples() {
        let p = preimages(&fmap(), 0.75);
        assert_eq!(p.len(), 2);
        assert!((p[0].x - 0.25).abs() < 1e-12 && p[0].side == Side::Left);
        let want = 0.5 + 0.5 * 0.75f64.sqrt();
        assert!((p[1].x - want).abs() < 1e-12 && (want - 0.933_012_70).abs() < 1e-8);

        let p = preimages(&fmap(), 1.0);
        assert_eq!(p, [SignedPoint::left(0.5), SignedPoint::right(1.0)]);
        let p = preimages(&cmap(), 0.0);
        assert_eq!(p, [SignedPoint::left(0.0)]);
    }

    #[test]
    fn alpha_examples() {
        let a = alpha_estimate(&cmap(), 0.0, 10, 1000).unwrap();
        assert_eq!(a.runs(), &[(0, 0)]);
        let a = alpha_estimate(&fmap(), 1.0, 1, 1000).unwrap();
        assert!(a.contains(1.0));
        let a = alpha_estimate(&fmap(), 0.75, 20, 1000).unwrap();
        assert!(a.fraction() >= 0.99, "{}", a.fraction());
    }

    #[test]
    fn lyapunov_examples() {
        let l = lyapunov(&fmap(), SignedPoint::new(0.25), 10_000);
        assert!((l.value - 2f64.ln()).abs() < 1e-9);
        assert!((l.recompute(&fmap()) - l.value).abs() < 1e-12);
        let l = lyapunov(&fmap(), SignedPoint::new(0.0), 100);
        assert!((l.value - 4f64.ln()).abs() < 1e-12);
        let l = lyapunov(&cmap(), SignedPoint::new(0.0), 100);
        assert!((l.value - 0.8f64.ln()).abs() < 1e-12);
        let l = lyapunov(&fmap(), SignedPoint::new(0.5), 100);
        assert!(l.aborted_at_critical && l.n == 0);
    }

    proptest! {
        #[test]
        fn recorded_transitions_reevaluate(x in 0.0f64..1.0, n in 1usize..200) {
            let f = cmap();
            let o = iterate(&f, SignedPoint::new(x), n);
            for w in o.points.windows(2) {
                prop_assert!((f.apply(w[0]) - w[1]).abs() <= 1e-9);
            }
        }

        #[test]
        fn preimages_are_sound(y in 0.0f64..=1.0, v1 in 0.3f64..1.0, v0 in 0.0f64..0.3) {
            let f = StandardLorenzMap::new(MapParams::new(0.45, 2.5, 1.7, v1, v0)).unwrap();
            for q in preimages(&f, y) {
                prop_assert!((f.evaluate(q) - y).abs() <= 1e-9);
            }
        }

        #[test]
        fn omega_cover_grows_with_length(x in 0.0f64..1.0, len in 10usize..500) {
            let f = StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 0.9, 0.15)).unwrap();
            let a = omega_estimate(&f, SignedPoint::new(x), 100, len, 512);
            let b = omega_estimate(&f, SignedPoint::new(x), 100, 2 * len, 512);
            prop_assert!(a.is_subset_of(&b));
        }

        #[test]
        fn lyapunov_recomputes(x in 0.0f64..1.0) {
            let f = StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 0.95, 0.05)).unwrap();
            let l = lyapunov(&f, SignedPoint::new(x), 2000);
            prop_assert!((l.recompute(&f) - l.value).abs() <= 1e-12);
        }
    }
}

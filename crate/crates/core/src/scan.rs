//! Parameter scans that locate maps with a prescribed structure, and the
//! instances they found.
//!
//! The located parameters are frozen in [`instances`]; the tests rerun the
//! locators and check that they still land on the frozen values.

use alloc::vec::Vec;

use crate::cherry::{as_gap_map, rotation_number};
use crate::interval::Interval;
use crate::map::{IntervalMap, MapParams, StandardLorenzMap};
use crate::renorm::build_tower;
use crate::return_map::return_decomposition;

/// `(0.5, 2, 2, t, 1 - t)`: maps symmetric under `x -> 1 - x`. Their
/// renormalizations at the period-2 interval are symmetric again, and the
/// family runs through a period-doubling cascade of towers as `t` decreases
/// from about `0.92`.
pub const fn symmetric(t: f64) -> MapParams {
    MapParams::new(0.5, 2.0, 2.0, t, 1.0 - t)
}

/// Tower depth and limit flag of `symmetric(t)` at each `t`.
pub fn tower_depths(ts: &[f64], max_depth: usize, max_period: usize) -> Vec<(f64, usize, bool)> {
    ts.iter()
        .filter_map(|&t| {
            let f = StandardLorenzMap::new(symmetric(t)).ok()?;
            let tower = build_tower(&f, max_depth, max_period).ok()?;
            Some((t, tower.depth(), tower.depth_limit_hit))
        })
        .collect()
}

/// First `t` of an even grid on `[lo, hi]`, scanned from `hi` downwards,
/// whose tower has exactly `depth` levels below `max_depth`.
pub fn locate_tower_depth(
    lo: f64,
    hi: f64,
    steps: usize,
    depth: usize,
    max_depth: usize,
    max_period: usize,
) -> Option<f64> {
    let ts: Vec<f64> = (0..=steps).map(|i| hi - (hi - lo) * i as f64 / steps as f64).collect();
    tower_depths(&ts, max_depth, max_period)
        .into_iter()
        .find(|&(_, d, hit)| d == depth && !hit)
        .map(|(t, _, _)| t)
}

/// First `t` of an even grid on `[lo, hi]`, scanned from `hi` downwards,
/// whose tower still continues past `max_depth` levels.
pub fn locate_depth_limit(lo: f64, hi: f64, steps: usize, max_depth: usize, max_period: usize) -> Option<f64> {
    let ts: Vec<f64> = (0..=steps).map(|i| hi - (hi - lo) * i as f64 / steps as f64).collect();
    tower_depths(&ts, max_depth, max_period)
        .into_iter()
        .find(|&(_, _, hit)| hit)
        .map(|(t, _, _)| t)
}

/// Exponent of both branches in the Cherry family.
pub const CHERRY_EXPONENT: f64 = 1.2;

/// `(0.5, 1.2, 1.2, v1, v0)` with `v0` chosen so that the return map to
/// `(v0, v1)` is a gap map with circle gap `f(v0) - f(v1) = gap`.
pub fn cherry_family(v1: f64, gap: f64) -> Option<MapParams> {
    let c = 0.5;
    let e = CHERRY_EXPONENT;
    let width = |v0: f64| {
        let f = StandardLorenzMap::new(MapParams::new(c, e, e, v1, v0)).ok()?;
        Some(f.apply(v0) - f.apply(v1) - gap)
    };
    let (mut lo, mut hi) = (1e-9, c - 1e-9);
    let (wlo, whi) = (width(lo)?, width(hi)?);
    if wlo * whi > 0.0 {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let wm = width(mid)?;
        if (wm <= 0.0) == (wlo <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(MapParams::new(c, e, e, v1, lo))
}

/// Rotation number of the gap map of `cherry_family(v1, gap)`.
pub fn cherry_rotation(v1: f64, gap: f64, n: usize) -> Option<f64> {
    let f = StandardLorenzMap::new(cherry_family(v1, gap)?).ok()?;
    let (fv1, fv0) = f.critical_values();
    let decomp = return_decomposition(&f, Interval::open(fv0, fv1), 8, 512);
    let g = as_gap_map(f, decomp).ok()?;
    rotation_number(&g, n).ok().map(|r| r.value)
}

/// Bisect `v1` in `[lo, hi]` for rotation number `rho` of the Cherry family,
/// `steps` times. The bisection stops early at a parameter whose critical
/// orbit hits the puncture.
pub fn locate_cherry(
    rho: f64,
    gap: f64,
    mut lo: f64,
    mut hi: f64,
    n: usize,
    steps: usize,
) -> Option<MapParams> {
    let below = |v: f64| cherry_rotation(v, gap, n).map(|r| r < rho);
    let lo_below = below(lo)?;
    if lo_below == below(hi)? {
        return None;
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        match below(mid) {
            Some(b) if b == lo_below => lo = mid,
            Some(_) => hi = mid,
            None => break,
        }
    }
    cherry_family(lo, gap)
}

/// Instances located by the scans above.
pub mod instances {
    use crate::map::MapParams;

    /// Full map: both branches onto `(0, 1)`.
    pub const FULL: MapParams = MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0);
    /// Every orbit descends to the attracting fixed point `0`.
    pub const CONTRACTING: MapParams = MapParams::new(0.5, 2.0, 2.0, 0.2, 0.1);
    /// Tower of depth 1 at the period-2 interval: the first `t` below
    /// `0.95` on a `0.01` grid with depth 1.
    pub const ONCE_RENORMALIZABLE: MapParams = super::symmetric(0.91);
    /// Tower of depth 2, with periods 2 and 4: the first `t` below `0.90` on
    /// a `0.01` grid with depth 2.
    pub const TWICE_RENORMALIZABLE: MapParams = super::symmetric(0.86);
    /// Tower continuing past depth 4, near the accumulation of the
    /// period-doubling cascade: the first such `t` below `0.90` on a
    /// `0.0025` grid.
    pub const SOLENOID: MapParams = super::symmetric(0.8925);
    /// Gap map with rotation number within `1e-10` of the golden mean, from
    /// `cherry_family` with gap `1e-4`.
    pub const CHERRY: MapParams = MapParams::new(0.5, 1.2, 1.2, 0.6840897509762385, 0.39214257463109414);
    /// Circle gap of [`CHERRY`].
    pub const CHERRY_GAP: f64 = 1e-4;
    /// Attracting orbit of period 2 (hand-picked inside the rotation-number
    /// `1/2` plateau of an asymmetric map).
    pub const PERIOD_TWO: MapParams = MapParams::new(0.5, 2.0, 2.0, 0.6, 0.3);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::periodic_orbits;

    fn close(p: &MapParams, q: &MapParams, tol: f64) -> bool {
        (p.v1 - q.v1).abs() <= tol && (p.v0 - q.v0).abs() <= tol && p.c == q.c && p.alpha == q.alpha
    }

    #[test]
    fn renormalizable_instances_reproduce() {
        let once = symmetric(locate_tower_depth(0.85, 0.95, 10, 1, 4, 8).unwrap());
        assert!(close(&once, &instances::ONCE_RENORMALIZABLE, 1e-12));
        let twice = symmetric(locate_tower_depth(0.80, 0.90, 10, 2, 4, 8).unwrap());
        assert!(close(&twice, &instances::TWICE_RENORMALIZABLE, 1e-12));
        let sol = symmetric(locate_depth_limit(0.88, 0.90, 8, 4, 8).unwrap());
        assert!(close(&sol, &instances::SOLENOID, 1e-12));
    }

    #[test]
    fn cherry_instance_reproduces() {
        let golden = 0.5 * (libm::sqrt(5.0) - 1.0);
        let p = locate_cherry(golden, instances::CHERRY_GAP, 0.6, 0.75, 100_000, 30).unwrap();
        assert!(close(&p, &instances::CHERRY, 1e-6), "{p:?}");
        let frozen = cherry_family(instances::CHERRY.v1, instances::CHERRY_GAP).unwrap();
        assert!(close(&frozen, &instances::CHERRY, 1e-15));
    }

    #[test]
    fn period_two_instance() {
        let f = StandardLorenzMap::new(instances::PERIOD_TWO).unwrap();
        let att: Vec<_> = periodic_orbits(&f, 8).into_iter().filter(|o| o.stability.is_attractor()).collect();
        assert_eq!(att.len(), 1);
        assert_eq!(att[0].period, 2);
    }

    #[test]
    fn depth_profile_of_the_symmetric_family() {
        let d = tower_depths(&[0.95, 0.91, 0.86], 4, 8);
        let depths: Vec<usize> = d.iter().map(|x| x.1).collect();
        assert_eq!(depths, [0, 1, 2]);
    }
}

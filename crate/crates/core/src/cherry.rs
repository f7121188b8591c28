//! Gap maps, rotation numbers and Cherry evidence.
//!
//! When the two branches of a return map to `J = (a, b)` have disjoint
//! images, identifying `a` with `b` turns the return map into an injective
//! circle map that is continuous off one point. Its rotation number is
//! estimated from a lift; an irrational rotation number is the signature of
//! a Cherry map.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float;
use crate::interval::Interval;
use crate::map::{IntervalMap, Side, Tolerances};
use crate::orbits;
use crate::renorm::{renormalize, RenormTower};
use crate::return_map::{return_decomposition, ReturnBranch, ReturnMapDecomposition, SCAN_POINTS};

/// Seeds tried before a rotation estimate gives up on `OrbitHitGap`.
pub const MAX_SEED_ATTEMPTS: usize = 3;

/// How the two branch images sit inside `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// The left image lies below the right image; the gap sits around the
    /// jump at `c`.
    Ordered,
    /// The left image lies above the right image; on the circle the map is
    /// continuous at `c` and jumps at `a ~ b`.
    Crossed,
}

/// A two-branch return map viewed as a map of the circle `J / (a ~ b)`.
#[derive(Debug, Clone)]
pub struct GapMap<M> {
    map: M,
    pub source: ReturnMapDecomposition,
    pub orientation: Orientation,
    /// Complement of the two images between them, in `J` coordinates.
    pub gap: Interval,
}

/// Check that a decomposition has two branches meeting at `c` whose images
/// do not overlap, and wrap it as a gap map.
pub fn as_gap_map<M: IntervalMap>(map: M, decomp: ReturnMapDecomposition) -> Result<GapMap<M>> {
    if decomp.branches.len() != 2 {
        return Err(Error::WrongBranchCount { found: decomp.branches.len() });
    }
    let tol = *map.tolerances();
    let c = map.critical_point();
    let j = decomp.j;
    let (l, r) = (&decomp.branches[0], &decomp.branches[1]);
    let abut = (l.domain.lo - j.lo).abs() <= tol.eps_point
        && (l.domain.hi - c).abs() <= tol.eps_point
        && (r.domain.lo - c).abs() <= tol.eps_point
        && (r.domain.hi - j.hi).abs() <= tol.eps_point;
    if !abut {
        return Err(Error::InvalidArgument(format!(
            "branch domains {} and {} do not split {} at c",
            l.domain, r.domain, j
        )));
    }
    let (li, ri) = (l.image, r.image);
    let (orientation, gap) = if li.hi <= ri.lo + tol.eps_value {
        (Orientation::Ordered, Interval::open(li.hi.min(ri.lo), ri.lo))
    } else if ri.hi <= li.lo + tol.eps_value {
        (Orientation::Crossed, Interval::open(ri.hi.min(li.lo), li.lo))
    } else {
        let overlap = (li.hi - ri.lo).min(ri.hi - li.lo);
        return Err(Error::BranchOverlap { overlap });
    };
    Ok(GapMap { map, source: decomp, orientation, gap })
}

impl<M: IntervalMap> GapMap<M> {
    pub fn map(&self) -> &M {
        &self.map
    }

    fn j(&self) -> Interval {
        self.source.j
    }

    /// Circle coordinate in `[0, 1)` of a point of `J`.
    pub fn angle(&self, x: f64) -> f64 {
        let j = self.j();
        (x - j.lo) / j.len()
    }

    fn point(&self, theta: f64) -> f64 {
        let j = self.j();
        j.lo + theta * j.len()
    }

    fn branch_at(&self, x: f64) -> &ReturnBranch {
        let c = self.map.critical_point();
        &self.source.branches[if x < c { 0 } else { 1 }]
    }

    /// One step of the return map with the lift's integer jump: `1` when a
    /// crossed map goes through `a ~ b`, `0` otherwise.
    fn step(&self, x: f64) -> (f64, i64) {
        let branch = self.branch_at(x);
        let y = branch.push_forward(&self.map, x);
        let c = self.map.critical_point();
        let jump = (self.orientation == Orientation::Crossed && x >= c) as i64;
        (y, jump)
    }

    /// Degree-one lift of the circle map to the line.
    pub fn lift(&self, theta: f64) -> f64 {
        let k = float::floor(theta);
        let (y, jump) = self.step(self.point(theta - k));
        self.angle(y) + (jump as f64) + k
    }

    /// Seed for the rotation estimate: the midpoint of the right domain.
    pub fn seed(&self) -> f64 {
        self.source.branches[1].domain.midpoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rational {
    pub p: u64,
    pub q: u64,
}

impl Rational {
    pub fn value(self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationEstimate {
    pub value: f64,
    pub n: usize,
    pub error_bound: f64,
    pub rational_lock: Option<Rational>,
    /// Seeds discarded because their orbit ran into the puncture.
    pub restarts: usize,
}

struct Run {
    /// Total lift displacement after each checkpoint.
    displacement: f64,
    half: f64,
    end: f64,
}

fn run<M: IntervalMap>(g: &GapMap<M>, seed: f64, n: usize) -> Option<Run> {
    let tol = g.map.tolerances();
    let j = g.j();
    let mut x = seed;
    let mut wraps: i64 = 0;
    let mut half = 0.0;
    let theta0 = g.angle(seed);
    for k in 1..=n {
        if g.map.is_critical(x) {
            return None;
        }
        let (y, jump) = g.step(x);
        if !y.is_finite() || !j.contains_loosely(y, tol.eps_value) {
            return None;
        }
        wraps += jump;
        x = y;
        if k == n / 2 {
            half = g.angle(x) + wraps as f64 - theta0;
        }
    }
    Some(Run { displacement: g.angle(x) + wraps as f64 - theta0, half, end: x })
}

/// `x` is periodic with rotation `p/q`: `q` steps move the lift by `p`.
fn returns<M: IntervalMap>(g: &GapMap<M>, x: f64, r: Rational, slack: f64) -> bool {
    let mut y = x;
    let mut wraps: i64 = 0;
    for _ in 0..r.q {
        let (z, jump) = g.step(y);
        y = z;
        wraps += jump;
    }
    let moved = g.angle(y) - g.angle(x) + wraps as f64;
    (moved - r.p as f64).abs() * g.j().len() <= slack
}

/// Rotation number of a gap map from `n` iterates of the seed, with error
/// at most `1/n`.
///
/// A rational `p/q` with `q <= sqrt(n)` is locked when the estimates at
/// `n/2` and `n` are both within their bounds of it and the end of the orbit
/// returns to itself after `q` steps with displacement `p`.
pub fn rotation_number<M: IntervalMap>(g: &GapMap<M>, n: usize) -> Result<RotationEstimate> {
    if n == 0 {
        return Err(Error::InvalidArgument(String::from("rotation estimate needs n >= 1")));
    }
    let eps = g.map.tolerances().eps_point;
    let mut seed = g.seed();
    let mut restarts = 0;
    let r = loop {
        if let Some(r) = run(g, seed, n) {
            break r;
        }
        restarts += 1;
        if restarts >= MAX_SEED_ATTEMPTS {
            return Err(Error::OrbitHitGap { attempts: restarts });
        }
        seed += 10.0 * eps;
    };
    let rho = r.displacement / n as f64;
    let bound = 1.0 / n as f64;
    let mut lock = None;
    let qmax = float::floor(float::sqrt(n as f64)) as u64;
    for q in 1..=qmax.max(1) {
        let p = float::round(rho * q as f64);
        if p < 0.0 {
            continue;
        }
        let cand = Rational { p: p as u64, q };
        if (rho - cand.value()).abs() > bound {
            continue;
        }
        let half_ok = n < 2 || (r.half / (n / 2) as f64 - cand.value()).abs() <= 2.0 / n as f64;
        if half_ok && returns(g, r.end, cand, 10.0 * eps) {
            lock = Some(cand);
            break;
        }
    }
    let value = match lock {
        Some(l) => l.value() - float::floor(l.value()),
        None => rho - float::floor(rho),
    };
    Ok(RotationEstimate { value, n, error_bound: bound, rational_lock: lock, restarts })
}

/// Rotation estimates at each `n`, for tabular export.
pub fn rotation_trace<M: IntervalMap>(g: &GapMap<M>, ns: &[usize]) -> Result<Vec<RotationEstimate>> {
    ns.iter().map(|&n| rotation_number(g, n)).collect()
}

/// The circle rotation `x -> x + rho mod 1` as a two-branch interval map
/// with its discontinuity at `1 - rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidRotation {
    rho: f64,
    tolerances: Tolerances,
}

impl RigidRotation {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidArgument(format!("rotation {rho} must lie in (0,1)")));
        }
        Ok(RigidRotation { rho, tolerances: Tolerances::default() })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl IntervalMap for RigidRotation {
    fn critical_point(&self) -> f64 {
        1.0 - self.rho
    }

    fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    fn branch(&self, side: Side, x: f64) -> f64 {
        let c = self.critical_point();
        match side {
            Side::Left => x.clamp(0.0, c) + self.rho,
            Side::Right => x.clamp(c, 1.0) - c,
        }
    }

    fn branch_derivative(&self, _side: Side, _x: f64) -> f64 {
        1.0
    }

    fn branch_preimage(&self, side: Side, y: f64) -> f64 {
        let c = self.critical_point();
        match side {
            Side::Left => (y - self.rho).clamp(0.0, c),
            Side::Right => (y + c).clamp(c, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CherryParams {
    pub max_period: usize,
    /// Iterations for the rotation estimate.
    pub rotation_n: usize,
    pub horizon: usize,
    pub scan_points: usize,
}

impl Default for CherryParams {
    fn default() -> Self {
        CherryParams { max_period: 16, rotation_n: 1_000_000, horizon: 64, scan_points: SCAN_POINTS }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CherryClause {
    /// The return map to the critical value interval is a gap map.
    GapMap,
    /// No rational lock in the rotation estimate.
    NoRationalLock,
    /// No periodic orbit meets the interval.
    NoPeriodicOrbitInside,
    /// No attracting or super-attracting periodic orbit.
    NoPeriodicAttractor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub clause: CherryClause,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CherryVerdict {
    /// All four clauses passed.
    pub evidence: bool,
    pub clauses: Vec<ClauseResult>,
    /// Tower level examined (0 is the map itself).
    pub level: usize,
    /// Critical value interval of the examined map, in its own coordinates.
    pub interval: Option<Interval>,
    pub rotation: Option<RotationEstimate>,
}

impl CherryVerdict {
    pub fn failed(&self) -> Vec<CherryClause> {
        self.clauses.iter().filter(|c| !c.passed).map(|c| c.clause).collect()
    }
}

/// Gap-map evidence for the deepest level of a tower: the return map to the
/// interval between its critical values `(g(c+), g(c-))`.
pub fn cherry_verdict<M: IntervalMap + Clone>(
    f: &M,
    tower: &RenormTower,
    params: &CherryParams,
) -> CherryVerdict {
    match tower.records.last() {
        None => verdict_for(f.clone(), 0, params),
        Some(rec) => match renormalize(f.clone(), rec) {
            Ok(view) => verdict_for(view, tower.depth(), params),
            Err(e) => CherryVerdict {
                evidence: false,
                clauses: alloc::vec![ClauseResult {
                    clause: CherryClause::GapMap,
                    passed: false,
                    detail: format!("{e}"),
                }],
                level: tower.depth(),
                interval: None,
                rotation: None,
            },
        },
    }
}

fn verdict_for<M: IntervalMap + Clone>(g: M, level: usize, params: &CherryParams) -> CherryVerdict {
    let mut clauses = Vec::new();
    let c = g.critical_point();
    let (v1, v0) = g.critical_values();
    let mut rotation = None;
    let interval = (v0 < c && c < v1).then(|| Interval::open(v0, v1));

    let gap = match interval {
        None => Err(format!("critical values ({v0}, {v1}) do not surround c = {c}")),
        Some(t) => {
            let decomp = return_decomposition(&g, t, params.horizon, params.scan_points);
            as_gap_map(g.clone(), decomp).map_err(|e| format!("{e}"))
        }
    };
    match &gap {
        Ok(gm) => clauses.push(ClauseResult {
            clause: CherryClause::GapMap,
            passed: true,
            detail: format!("{:?} gap {}", gm.orientation, gm.gap),
        }),
        Err(e) => clauses.push(ClauseResult { clause: CherryClause::GapMap, passed: false, detail: e.clone() }),
    }

    let lock = match &gap {
        Ok(gm) => match rotation_number(gm, params.rotation_n) {
            Ok(r) => {
                let res = match r.rational_lock {
                    Some(l) => (false, format!("locked to {}/{} at n = {}", l.p, l.q, r.n)),
                    None => (true, format!("rho = {} +- {:e}, no lock at n = {}", r.value, r.error_bound, r.n)),
                };
                rotation = Some(r);
                res
            }
            Err(e) => (false, format!("{e}")),
        },
        Err(_) => (false, String::from("no gap map")),
    };
    clauses.push(ClauseResult { clause: CherryClause::NoRationalLock, passed: lock.0, detail: lock.1 });

    let orbits = orbits::periodic_orbits(&g, params.max_period);
    let inside = match interval {
        Some(t) => orbits.iter().filter(|o| o.meets(t.lo, t.hi)).count(),
        None => orbits.iter().filter(|o| o.meets(0.0, 1.0)).count(),
    };
    clauses.push(ClauseResult {
        clause: CherryClause::NoPeriodicOrbitInside,
        passed: inside == 0,
        detail: format!("{inside} orbits of period <= {} inside", params.max_period),
    });
    let attractors: Vec<String> = orbits
        .iter()
        .filter(|o| o.stability.is_attractor())
        .map(|o| format!("{:?} {}", o.stability, o.itinerary))
        .collect();
    clauses.push(ClauseResult {
        clause: CherryClause::NoPeriodicAttractor,
        passed: attractors.is_empty(),
        detail: if attractors.is_empty() {
            String::from("none")
        } else {
            attractors.join(", ")
        },
    });

    CherryVerdict {
        evidence: clauses.iter().all(|c| c.passed),
        clauses,
        level,
        interval,
        rotation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::StandardLorenzMap;
    use crate::renorm::build_tower;
    use crate::scan::instances;
    use proptest::prelude::*;

    const GOLDEN: f64 = 0.618_033_988_749_894_9;

    fn rigid(rho: f64) -> GapMap<RigidRotation> {
        let r = RigidRotation::new(rho).unwrap();
        let d = return_decomposition(&r, Interval::open(0.0, 1.0), 4, SCAN_POINTS);
        as_gap_map(r, d).unwrap()
    }

    fn cherry() -> GapMap<StandardLorenzMap> {
        let f = StandardLorenzMap::new(instances::CHERRY).unwrap();
        let (v1, v0) = f.critical_values();
        let d = return_decomposition(&f, Interval::open(v0, v1), 8, SCAN_POINTS);
        as_gap_map(f, d).unwrap()
    }

    #[test]
    fn full_map_is_not_a_gap_map() {
        let f = StandardLorenzMap::new(instances::FULL).unwrap();
        let d = return_decomposition(&f, Interval::open(0.0, 1.0), 4, SCAN_POINTS);
        assert!(matches!(as_gap_map(f, d), Err(Error::BranchOverlap { .. })));
    }

    #[test]
    fn rigid_rotation_is_a_gap_map_without_gap() {
        let g = rigid(GOLDEN);
        assert_eq!(g.orientation, Orientation::Crossed);
        assert!(g.gap.len().abs() < 1e-9);
        assert!(RigidRotation::new(0.0).is_err());
        assert!(RigidRotation::new(1.0).is_err());
    }

    #[test]
    fn golden_rotation() {
        let r = rotation_number(&rigid(GOLDEN), 100_000).unwrap();
        assert!((r.value - GOLDEN).abs() <= 2e-5, "{}", r.value);
        assert_eq!(r.rational_lock, None);
        assert_eq!(r.error_bound, 1e-5);
    }

    #[test]
    fn one_third_locks() {
        let r = rotation_number(&rigid(1.0 / 3.0), 1000).unwrap();
        assert_eq!(r.rational_lock, Some(Rational { p: 1, q: 3 }));
        assert_eq!(r.value, 1.0 / 3.0);
    }

    #[test]
    fn cherry_instance_gap_map() {
        let g = cherry();
        assert_eq!(g.orientation, Orientation::Crossed);
        assert!((g.gap.len() - instances::CHERRY_GAP).abs() < 1e-9, "{}", g.gap.len());
    }

    #[test]
    fn cherry_instance_rotation_is_stable() {
        let g = cherry();
        let r = rotation_trace(&g, &[1_000_000, 2_000_000]).unwrap();
        assert!((r[0].value - r[1].value).abs() <= 2e-6);
        assert!(r.iter().all(|e| e.rational_lock.is_none()));
        assert!((r[1].value - GOLDEN).abs() < 1e-6);
    }

    #[test]
    fn cherry_instance_verdict() {
        let f = StandardLorenzMap::new(instances::CHERRY).unwrap();
        let t = build_tower(&f, 3, 8).unwrap();
        let v = cherry_verdict(&f, &t, &CherryParams { max_period: 12, ..CherryParams::default() });
        assert!(v.evidence, "{:?}", v.clauses);
        assert_eq!(v.clauses.len(), 4);
        assert_eq!(v.level, 0);
    }

    #[test]
    fn contracting_map_is_not_cherry() {
        let f = StandardLorenzMap::new(instances::CONTRACTING).unwrap();
        let t = build_tower(&f, 3, 8).unwrap();
        let v = cherry_verdict(&f, &t, &CherryParams::default());
        assert!(!v.evidence);
        assert!(v.failed().contains(&CherryClause::NoPeriodicAttractor));
    }

    #[test]
    fn full_map_is_not_cherry() {
        let f = StandardLorenzMap::new(instances::FULL).unwrap();
        let t = build_tower(&f, 3, 8).unwrap();
        let v = cherry_verdict(&f, &t, &CherryParams { max_period: 6, ..CherryParams::default() });
        assert!(v.failed().contains(&CherryClause::GapMap));
        assert!(v.clauses[0].detail.contains("overlap"), "{}", v.clauses[0].detail);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn lift_is_degree_one_and_monotone(rho in 0.01f64..0.99, theta in 0.0f64..0.999, k in -3i32..3) {
            let g = rigid(rho);
            let l = g.lift(theta);
            prop_assert!((g.lift(theta + k as f64) - l - k as f64).abs() < 1e-9);
            prop_assert!(g.lift(theta + 1e-3) >= l - 1e-12);
            prop_assert!((l - theta - rho).abs() < 1e-9);
        }

        #[test]
        fn estimates_refine(rho in 0.01f64..0.99, n in 100usize..2000) {
            let g = rigid(rho);
            let a = rotation_number(&g, n).unwrap();
            let b = rotation_number(&g, 2 * n).unwrap();
            prop_assert!((a.value - b.value).abs() <= 1.0 / n as f64 + 0.5 / n as f64);
        }

        #[test]
        fn locks_are_sound(p in 1u64..7, q in 2u64..8) {
            prop_assume!(p < q);
            let g = rigid(p as f64 / q as f64);
            let r = rotation_number(&g, 1000).unwrap();
            if let Some(l) = r.rational_lock {
                prop_assert_eq!(l.p * q, p * l.q);
                prop_assert_eq!(r.value, l.value());
            }
        }
    }
}

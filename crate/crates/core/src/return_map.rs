//! Nice intervals, first return maps and their branch structure.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float;
use crate::interval::Interval;
use crate::map::{IntervalMap, Side, SignedPoint};
use crate::orbits;

/// Points of `J` sampled before branch boundaries are refined.
pub const SCAN_POINTS: usize = 10_000;
/// Upper bound on the number of branches kept in a decomposition.
pub const MAX_BRANCHES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NiceVerdict {
    Nice,
    /// A boundary orbit enters `J` at this iterate.
    NotNice { iterate: usize, endpoint: f64 },
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiceInterval {
    pub interval: Interval,
    pub horizon: usize,
    pub verdict: NiceVerdict,
}

impl NiceInterval {
    pub fn is_nice(&self) -> bool {
        self.verdict == NiceVerdict::Nice
    }
}

/// Check that neither boundary orbit re-enters `J` within `horizon` steps.
///
/// `c` lies in `J`, so a boundary orbit that reaches the critical point has
/// already entered `J`; the verdict is `Undetermined` only when an orbit
/// leaves the reals.
pub fn is_nice<M: IntervalMap + ?Sized>(f: &M, j: Interval, horizon: usize) -> NiceInterval {
    let slack = f.tolerances().eps_point;
    let mut verdict = NiceVerdict::Nice;
    let mut first: Option<(usize, f64)> = None;
    let mut undetermined = false;
    for (e, side) in [(j.lo, Side::Right), (j.hi, Side::Left)] {
        let mut x = e;
        for k in 1..=horizon {
            x = f.evaluate(SignedPoint { x, side });
            if !x.is_finite() {
                undetermined = true;
                break;
            }
            if j.contains_strictly(x, slack) {
                if first.is_none_or(|(i, _)| k < i) {
                    first = Some((k, e));
                }
                break;
            }
        }
    }
    if let Some((iterate, endpoint)) = first {
        verdict = NiceVerdict::NotNice { iterate, endpoint };
    } else if undetermined {
        verdict = NiceVerdict::Undetermined;
    }
    NiceInterval { interval: j, horizon, verdict }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnBranch {
    pub domain: Interval,
    pub return_time: usize,
    pub image: Interval,
    /// `c` is an endpoint of the domain.
    pub touches_critical: bool,
    /// Sides visited by the branch before it returns.
    pub itinerary: String,
}

impl ReturnBranch {
    /// `f^R(x)` along this branch's itinerary, for `x` in the closed domain.
    pub fn push_forward<M: IntervalMap + ?Sized>(&self, f: &M, x: f64) -> f64 {
        follow(f, &self.itinerary, x)
    }
}

// Orbits are followed as pairs (x, 1 - x) so that points close to 1 keep
// their precision; see `IntervalMap::branch_pair`.
pub(crate) fn follow<M: IntervalMap + ?Sized>(f: &M, itinerary: &str, x: f64) -> f64 {
    let (mut x, mut q) = (x, 1.0 - x);
    for b in itinerary.bytes() {
        let side = if b == b'L' { Side::Left } else { Side::Right };
        (x, q) = f.branch_pair(side, x, q);
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapDecomposition {
    pub j: Interval,
    pub branches: Vec<ReturnBranch>,
    /// Total length of branch domains over `|J|`.
    pub covered_fraction: f64,
    pub horizon: usize,
    /// Some sampled point did not return within the horizon.
    pub horizon_exhausted: bool,
    /// Branch refinement stopped at [`MAX_BRANCHES`].
    pub truncated: bool,
    /// Branches left out because double precision cannot place their
    /// images within `eps_value` (they accumulate on `c` or on a boundary).
    pub unresolved: usize,
}

/// Return time and itinerary-until-return of a point, hashed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Key {
    time: usize,
    hash: u64,
}

/// `|Df^R(x)|` along an itinerary.
pub(crate) fn follow_slope<M: IntervalMap + ?Sized>(f: &M, itinerary: &str, x: f64) -> f64 {
    let (mut x, mut q) = (x, 1.0 - x);
    let mut d = 1.0;
    for b in itinerary.bytes() {
        let side = if b == b'L' { Side::Left } else { Side::Right };
        d *= f.branch_derivative(side, x).abs();
        (x, q) = f.branch_pair(side, x, q);
    }
    d
}

fn return_key<M: IntervalMap + ?Sized>(f: &M, j: &Interval, x: f64, horizon: usize) -> Option<Key> {
    // FNV-1a over the letters
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let c = f.critical_point();
    let (mut y, mut q) = (x, 1.0 - x);
    for k in 1..=horizon {
        let side = if y < c { Side::Left } else { Side::Right };
        hash = (hash ^ (side as u64 + 1)).wrapping_mul(0x0000_0100_0000_01b3);
        (y, q) = f.branch_pair(side, y, q);
        if y > j.lo && q > 1.0 - j.hi {
            return Some(Key { time: k, hash });
        }
    }
    None
}

fn itinerary_of<M: IntervalMap + ?Sized>(f: &M, x: f64, time: usize) -> String {
    let c = f.critical_point();
    let mut s = String::with_capacity(time);
    let (mut y, mut q) = (x, 1.0 - x);
    for _ in 0..time {
        let side = if y < c { Side::Left } else { Side::Right };
        s.push(side.letter());
        (y, q) = f.branch_pair(side, y, q);
    }
    s
}

struct Scanner<'a, M: ?Sized> {
    f: &'a M,
    j: Interval,
    horizon: usize,
    samples: Vec<(f64, Option<Key>)>,
    budget: usize,
}

impl<M: IntervalMap + ?Sized> Scanner<'_, M> {
    fn key(&mut self, x: f64) -> Option<Key> {
        return_key(self.f, &self.j, x, self.horizon)
    }

    /// Insert samples between two keyed points until every key change is
    /// bracketed by adjacent floats.
    fn refine(&mut self, lo: f64, klo: Option<Key>, hi: f64, khi: Option<Key>, depth: usize) {
        if klo == khi || self.budget == 0 {
            return;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || depth > 200 {
            return;
        }
        let km = self.key(mid);
        if km != klo && km != khi {
            // a branch in between: remember the sample and split both ways
            self.budget = self.budget.saturating_sub(1);
            self.samples.push((mid, km));
            self.refine(lo, klo, mid, km, depth + 1);
            self.refine(mid, km, hi, khi, depth + 1);
        } else if km == klo {
            self.samples.push((mid, km));
            self.refine(mid, km, hi, khi, depth + 1);
        } else {
            self.samples.push((mid, km));
            self.refine(lo, klo, mid, km, depth + 1);
        }
    }
}

/// Branch partition of the first return map to `J`, after checking that `J`
/// is nice (boundary orbits followed for `horizon` steps).
pub fn first_return<M: IntervalMap + ?Sized>(
    f: &M,
    j: Interval,
    horizon: usize,
) -> Result<ReturnMapDecomposition> {
    let nice = is_nice(f, j, horizon.min(100_000));
    match nice.verdict {
        NiceVerdict::Nice => Ok(return_decomposition(f, j, horizon, SCAN_POINTS)),
        NiceVerdict::NotNice { iterate, .. } => Err(Error::NotNice { lo: j.lo, hi: j.hi, iterate }),
        NiceVerdict::Undetermined => Err(Error::NicenessUndetermined { lo: j.lo, hi: j.hi }),
    }
}

/// Branch partition of the first return map to `J` without the niceness
/// check. `J` must contain `c`.
pub fn return_decomposition<M: IntervalMap + ?Sized>(
    f: &M,
    j: Interval,
    horizon: usize,
    scan: usize,
) -> ReturnMapDecomposition {
    let c = f.critical_point();
    let scan = scan.max(4);
    let mut sc = Scanner { f, j, horizon, samples: Vec::new(), budget: MAX_BRANCHES * 8 };
    let mut exhausted = false;
    let mut branches = Vec::new();
    let mut truncated = false;
    let mut unresolved = 0;
    // the two halves are scanned separately so that c is always a boundary
    for (lo, hi) in [(j.lo, c.min(j.hi)), (c.max(j.lo), j.hi)] {
        if hi <= lo {
            continue;
        }
        let n = float::ceil((scan as f64) * (hi - lo) / j.len()).max(2.0) as usize;
        sc.samples.clear();
        let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64).collect();
        let keys: Vec<Option<Key>> = grid.iter().map(|&x| sc.key(x)).collect();
        for i in 0..n {
            sc.samples.push((grid[i], keys[i]));
            if i + 1 < n {
                sc.refine(grid[i], keys[i], grid[i + 1], keys[i + 1], 0);
            }
        }
        // approach both ends geometrically so that branches accumulating
        // on an endpoint are seen
        for (edge, inner, ki) in [(lo, grid[0], keys[0]), (hi, grid[n - 1], keys[n - 1])] {
            let mut prev = (inner, ki);
            let mut step = inner - edge;
            for _ in 1..48 {
                step *= 0.5;
                if step.abs() < f.tolerances().eps_point {
                    break;
                }
                let x = edge + step;
                let k = sc.key(x);
                sc.samples.push((x, k));
                let (a, ka, b, kb) = if x < prev.0 { (x, k, prev.0, prev.1) } else { (prev.0, prev.1, x, k) };
                sc.refine(a, ka, b, kb, 0);
                prev = (x, k);
            }
        }
        sc.samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        exhausted |= sc.samples.iter().any(|s| s.1.is_none());
        truncated |= sc.budget == 0;
        // runs of equal keys become branches; boundaries sit halfway between
        // adjacent samples of different keys
        let s = &sc.samples;
        let mut start = 0;
        while start < s.len() {
            let mut end = start;
            while end + 1 < s.len() && s[end + 1].1 == s[start].1 {
                end += 1;
            }
            if let Some(key) = s[start].1 {
                let plo = if start == 0 { lo } else { 0.5 * (s[start - 1].0 + s[start].0) };
                let phi = if end + 1 == s.len() { hi } else { 0.5 * (s[end].0 + s[end + 1].0) };
                let itin = itinerary_of(f, s[start].0, key.time);
                let image = Interval::spanned(follow(f, &itin, plo), follow(f, &itin, phi));
                // endpoints are only known to rounding; skip branches whose
                // image cannot be resolved to eps_value in double precision
                let gain = follow_slope(f, &itin, plo)
                    .max(follow_slope(f, &itin, phi))
                    .max(image.len() / (phi - plo));
                if gain * f64::EPSILON * plo.abs().max(phi.abs()) > f.tolerances().eps_value {
                    unresolved += 1;
                } else if branches.len() < MAX_BRANCHES {
                    branches.push(ReturnBranch {
                        domain: Interval::open(plo, phi),
                        return_time: key.time,
                        image,
                        touches_critical: plo == c || phi == c,
                        itinerary: itin,
                    });
                } else {
                    truncated = true;
                }
            }
            start = end + 1;
        }
    }
    let covered: f64 = branches.iter().map(|b: &ReturnBranch| b.domain.len()).sum();
    ReturnMapDecomposition {
        j,
        covered_fraction: covered / j.len(),
        branches,
        horizon,
        horizon_exhausted: exhausted,
        truncated,
        unresolved,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BranchCheckKind {
    /// The image of a branch away from `c` is all of `J`.
    FullImage,
    /// The boundary point of `J` adjacent to the branch is periodic with
    /// period equal to the return time.
    BoundaryPeriodic { endpoint: f64, period: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchCheck {
    pub branch: usize,
    pub kind: BranchCheckKind,
    pub passed: bool,
    /// Largest discrepancy measured.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchStructureReport {
    pub checks: Vec<BranchCheck>,
}

impl BranchStructureReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BranchCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Verify the branch laws of a first return map to a nice interval: branches
/// away from `c` are full, and a boundary point of `J` adjacent to a branch
/// is periodic with the branch's return time.
pub fn check_full_branches<M: IntervalMap + ?Sized>(
    f: &M,
    decomp: &ReturnMapDecomposition,
) -> BranchStructureReport {
    let eps = f.tolerances().eps_value;
    let j = decomp.j;
    let mut checks = Vec::new();
    for (i, b) in decomp.branches.iter().enumerate() {
        if !b.touches_critical {
            let err = (b.image.lo - j.lo).abs().max((b.image.hi - j.hi).abs());
            checks.push(BranchCheck { branch: i, kind: BranchCheckKind::FullImage, passed: err <= eps, error: err });
        }
        for endpoint in [j.lo, j.hi] {
            let adjacent = if endpoint == j.lo { b.domain.lo == j.lo } else { b.domain.hi == j.hi };
            if !adjacent {
                continue;
            }
            let err = (b.push_forward(f, endpoint) - endpoint).abs();
            checks.push(BranchCheck {
                branch: i,
                kind: BranchCheckKind::BoundaryPeriodic { endpoint, period: b.return_time },
                passed: err <= eps,
                error: err,
            });
        }
    }
    BranchStructureReport { checks }
}

/// Least `p <= max_period` with `f^p(x) = x`, following the orbit with the
/// given side at the critical point.
pub fn period_of<M: IntervalMap + ?Sized>(f: &M, p: SignedPoint, max_period: usize) -> Option<usize> {
    let eps = f.tolerances().eps_point;
    let mut y = p.x;
    for k in 1..=max_period {
        y = f.evaluate(SignedPoint { x: y, side: p.side });
        if (y - p.x).abs() <= eps {
            return Some(k);
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximants {
    /// Periodic points decreasing to `a`.
    pub a: Vec<f64>,
    /// Periodic points increasing to `b`.
    pub b: Vec<f64>,
}

/// Periodic points of `J` accumulating on its boundary whose orbits never
/// re-enter `(a_k, b)` (resp. `(a, b_k)`). A periodic boundary point gives
/// the constant sequence.
pub fn periodic_approximants<M: IntervalMap + ?Sized>(
    f: &M,
    j: Interval,
    k: usize,
    max_period: usize,
) -> Result<Approximants> {
    let horizon = 1000;
    let nice = is_nice(f, j, horizon);
    if let NiceVerdict::NotNice { iterate, .. } = nice.verdict {
        return Err(Error::NotNice { lo: j.lo, hi: j.hi, iterate });
    }
    let c = f.critical_point();
    let a_periodic = period_of(f, SignedPoint::right(j.lo), max_period).is_some();
    let b_periodic = period_of(f, SignedPoint::left(j.hi), max_period).is_some();
    let mut out = Approximants { a: Vec::new(), b: Vec::new() };
    if a_periodic {
        out.a = alloc::vec![j.lo; k];
    }
    if b_periodic {
        out.b = alloc::vec![j.hi; k];
    }
    if a_periodic && b_periodic {
        return Ok(out);
    }
    let decomp = return_decomposition(f, j, max_period, SCAN_POINTS);
    let eps = f.tolerances().eps_point;
    let fixed_point = |br: &ReturnBranch| -> Option<f64> {
        let (mut lo, mut hi) = (br.domain.lo, br.domain.hi);
        let h = |x: f64| br.push_forward(f, x) - x;
        let (hl, hh) = (h(lo), h(hi));
        if hl.signum() == hh.signum() && hl != 0.0 && hh != 0.0 {
            return None;
        }
        let rising = hl < 0.0;
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if (h(m) < 0.0) == rising {
                lo = m;
            } else {
                hi = m;
            }
        }
        Some(0.5 * (lo + hi))
    };
    // the orbit of a_k must stay out of (a_k, b), that of b_k out of (a, b_k)
    let avoids = |x: f64, lo: f64, hi: f64| {
        let o = orbits::iterate(f, SignedPoint::new(x), horizon);
        o.points[1..].iter().all(|&y| !(y > lo + eps && y < hi - eps))
    };
    if !a_periodic {
        let mut left: Vec<&ReturnBranch> =
            decomp.branches.iter().filter(|b| b.domain.hi <= c && !b.touches_critical).collect();
        left.sort_by(|x, y| y.domain.lo.total_cmp(&x.domain.lo));
        for br in left {
            if out.a.len() == k {
                break;
            }
            if let Some(x) = fixed_point(br) {
                if out.a.last().is_none_or(|&l| x < l) && avoids(x, x, j.hi) {
                    out.a.push(x);
                }
            }
        }
    }
    if !b_periodic {
        let mut right: Vec<&ReturnBranch> =
            decomp.branches.iter().filter(|b| b.domain.lo >= c && !b.touches_critical).collect();
        right.sort_by(|x, y| x.domain.lo.total_cmp(&y.domain.lo));
        for br in right {
            if out.b.len() == k {
                break;
            }
            if let Some(x) = fixed_point(br) {
                if out.b.last().is_none_or(|&l| x > l) && avoids(x, j.lo, x) {
                    out.b.push(x);
                }
            }
        }
    }
    if out.a.is_empty() || out.b.is_empty() {
        return Err(Error::NoApproximantFound { max_period });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{MapParams, StandardLorenzMap};

    fn fmap() -> StandardLorenzMap {
        StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0)).unwrap()
    }

    fn cmap() -> StandardLorenzMap {
        StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 0.2, 0.1)).unwrap()
    }

    #[test]
    fn nice_examples() {
        let f = fmap();
        assert!(is_nice(&f, Interval::open(0.0, 1.0), 1000).is_nice());
        assert!(is_nice(&f, Interval::open(0.25, 0.75), 1000).is_nice());
        let v = is_nice(&f, Interval::open(0.3, 0.7), 1000).verdict;
        assert_eq!(v, NiceVerdict::NotNice { iterate: 2, endpoint: 0.3 });
        // oracle: f(0.3) = 0.84, f(0.84) = 0.68^2
        assert!((f.apply(f.apply(0.3)) - 0.4624).abs() < 1e-12);
    }

    #[test]
    fn whole_interval_returns_in_one_step() {
        for f in [fmap(), cmap()] {
            let d = first_return(&f, Interval::open(0.0, 1.0), 1000).unwrap();
            assert_eq!(d.branches.len(), 2);
            assert!(d.branches.iter().all(|b| b.return_time == 1 && b.touches_critical));
            assert_eq!((d.branches[0].domain.lo, d.branches[0].domain.hi), (0.0, 0.5));
            assert_eq!((d.branches[1].domain.lo, d.branches[1].domain.hi), (0.5, 1.0));
            assert!((d.covered_fraction - 1.0).abs() < 1e-12);
        }
        let d = first_return(&fmap(), Interval::open(0.0, 1.0), 1000).unwrap();
        let r = check_full_branches(&fmap(), &d);
        assert!(r.all_passed());
        assert_eq!(r.checks.len(), 2);
    }

    #[test]
    fn nested_nice_interval_of_full_map() {
        let f = fmap();
        let j = Interval::open(0.25, 0.75);
        let d = first_return(&f, j, 100_000).unwrap();
        assert!(d.branches.iter().map(|b| b.return_time).min().unwrap() >= 2);
        for w in d.branches.windows(2) {
            assert!(w[0].domain.hi <= w[1].domain.lo);
        }
        for b in d.branches.iter().filter(|b| !b.touches_critical) {
            assert!((b.image.lo - 0.25).abs() < 1e-8 && (b.image.hi - 0.75).abs() < 1e-8, "{b:?}");
        }
        let r = check_full_branches(&f, &d);
        assert!(r.all_passed(), "{:?}", r.failures().collect::<Vec<_>>());
        assert!(r.checks.iter().any(|c| matches!(c.kind, BranchCheckKind::BoundaryPeriodic { period: 2, .. })));
    }

    #[test]
    fn perturbed_image_is_flagged() {
        let f = fmap();
        let mut d = first_return(&f, Interval::open(0.25, 0.75), 10_000).unwrap();
        let i = d.branches.iter().position(|b| !b.touches_critical).unwrap();
        d.branches[i].image.hi -= 1e-3;
        let r = check_full_branches(&f, &d);
        let bad: Vec<_> = r.failures().collect();
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].branch, i);
    }

    #[test]
    fn not_nice_is_an_error() {
        assert!(matches!(
            first_return(&fmap(), Interval::open(0.3, 0.7), 100),
            Err(Error::NotNice { iterate: 2, .. })
        ));
    }

    #[test]
    fn approximant_examples() {
        let a = periodic_approximants(&fmap(), Interval::open(0.0, 1.0), 3, 8).unwrap();
        assert_eq!(a.a, [0.0, 0.0, 0.0]);
        let a = periodic_approximants(&fmap(), Interval::open(0.25, 0.75), 1, 8).unwrap();
        assert_eq!(a.a, [0.25]);
        assert_eq!(a.b, [0.75]);
        let a = periodic_approximants(&cmap(), Interval::open(0.0, 1.0), 1, 8).unwrap();
        assert_eq!(a.a, [0.0]);
    }
}

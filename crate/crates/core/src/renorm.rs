//! Renormalization intervals, rescaled return maps and towers.
//!
//! A nice interval `J = (a, b)` around `c` with periodic endpoints is a
//! renormalization interval when `f^l([a, c))` and `f^r((c, b])` fall back
//! into `[a, b]`, with `l = period(a)` and `r = period(b)`. The first return
//! map to `J` is then a two-branch map which, rescaled to `[0, 1]`, is again a
//! contracting Lorenz map.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalCover};
use crate::map::{IntervalMap, Side, Tolerances};
use crate::orbits;
use crate::return_map::{follow, follow_slope, is_nice};

/// Interior points used to check the return inclusions of each half.
pub const INCLUSION_SAMPLES: usize = 1000;
/// Resolution of the `K_J` and `Lambda_J` covers.
pub const COVER_GRID: usize = 4096;

/// The affine map `A(x) = offset + scale * x` from `[0, 1]` onto `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescale {
    pub offset: f64,
    pub scale: f64,
}

impl Rescale {
    pub fn onto(j: &Interval) -> Self {
        Rescale { offset: j.lo, scale: j.hi - j.lo }
    }

    /// `A(x)`.
    pub fn apply(&self, x: f64) -> f64 {
        self.offset + self.scale * x
    }

    /// `A^-1(y)`.
    pub fn invert(&self, y: f64) -> f64 {
        (y - self.offset) / self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormalizationRecord {
    pub j: Interval,
    /// `l = period(a)`, the return time of `(a, c)`.
    pub period_a: usize,
    /// `r = period(b)`, the return time of `(c, b)`.
    pub period_b: usize,
    pub rescale: Rescale,
    /// Sides visited by `(a, c)` before it returns (starts with `L`).
    pub left_itinerary: String,
    /// Sides visited by `(c, b)` before it returns (starts with `R`).
    pub right_itinerary: String,
}

impl RenormalizationRecord {
    pub fn a(&self) -> f64 {
        self.j.lo
    }

    pub fn b(&self) -> f64 {
        self.j.hi
    }

    fn itinerary(&self, side: Side) -> &str {
        match side {
            Side::Left => &self.left_itinerary,
            Side::Right => &self.right_itinerary,
        }
    }

    /// Express a record found for the renormalized view of `self` in the
    /// coordinates of the original map.
    pub fn compose(&self, inner: &RenormalizationRecord) -> RenormalizationRecord {
        let expand = |word: &str| {
            let mut s = String::new();
            for b in word.bytes() {
                s.push_str(if b == b'L' { &self.left_itinerary } else { &self.right_itinerary });
            }
            s
        };
        let j = Interval::open(self.rescale.apply(inner.j.lo), self.rescale.apply(inner.j.hi));
        let left_itinerary = expand(&inner.left_itinerary);
        let right_itinerary = expand(&inner.right_itinerary);
        RenormalizationRecord {
            j,
            period_a: left_itinerary.len(),
            period_b: right_itinerary.len(),
            rescale: Rescale::onto(&j),
            left_itinerary,
            right_itinerary,
        }
    }
}

fn side_of_letter(b: u8) -> Side {
    if b == b'L' {
        Side::Left
    } else {
        Side::Right
    }
}

/// Image of the open interval `(lo, hi)`, which must not contain `c`.
fn image<M: IntervalMap + ?Sized>(f: &M, lo: f64, hi: f64) -> Option<(f64, f64, Side)> {
    let c = f.critical_point();
    let side = if hi <= c {
        Side::Left
    } else if lo >= c {
        Side::Right
    } else {
        return None;
    };
    Some((f.branch(side, lo), f.branch(side, hi), side))
}

/// Forward images of one half of `J` up to its first return.
pub(crate) struct Chain {
    pub(crate) itinerary: String,
    /// `I_0, ..., I_l` with `I_l` the returned image.
    pub(crate) images: Vec<Interval>,
}

/// Push `(lo, hi)` forward until an image meets `J`. The chain is returned
/// only if that image lies in `[a, b]` within `eps_value`.
pub(crate) fn propagate<M: IntervalMap + ?Sized>(
    f: &M,
    lo: f64,
    hi: f64,
    j: &Interval,
    horizon: usize,
) -> Option<Chain> {
    let eps = f.tolerances().eps_value;
    let mut itinerary = String::new();
    let mut images = Vec::new();
    let (mut p, mut q) = (lo, hi);
    images.push(Interval::open(p, q));
    for _ in 0..horizon {
        let (np, nq, side) = image(f, p, q)?;
        itinerary.push(side.letter());
        (p, q) = (np, nq);
        images.push(Interval::open(p, q));
        if q.min(j.hi) - p.max(j.lo) > eps {
            if p >= j.lo - eps && q <= j.hi + eps {
                return Some(Chain { itinerary, images });
            }
            return None;
        }
    }
    None
}

/// Check the return inclusions of `(a, c)` and `(c, b)` along the given
/// itineraries at both endpoints and [`INCLUSION_SAMPLES`] interior points.
fn check_inclusions<M: IntervalMap + ?Sized>(
    f: &M,
    rec: &RenormalizationRecord,
    samples: usize,
) -> core::result::Result<(), String> {
    let tol = f.tolerances();
    let c = f.critical_point();
    let (a, b) = (rec.a(), rec.b());
    if !(a < c && c < b) {
        return Err(format!("c = {c} is not inside the interval"));
    }
    for (side, lo, hi) in [(Side::Left, a, c), (Side::Right, c, b)] {
        let word = rec.itinerary(side);
        if word.is_empty() || word.as_bytes()[0] != side.letter() as u8 {
            return Err(format!("{side} itinerary {word:?} does not start on its side"));
        }
        let inside = |y: f64| y >= a - tol.eps_value && y <= b + tol.eps_value;
        let fixed = if side == Side::Left { a } else { b };
        let y = follow(f, word, fixed);
        if (y - fixed).abs() > tol.eps_point {
            return Err(format!("{fixed} is not periodic with period {}", word.len()));
        }
        let yc = follow(f, word, c);
        if !inside(yc) {
            return Err(format!("{side} critical value returns to {yc}, outside J"));
        }
        for k in 0..samples {
            let x = lo + (hi - lo) * (k as f64 + 0.5) / samples as f64;
            let y = follow(f, word, x);
            if !inside(y) {
                return Err(format!("f^{}({x}) = {y} is outside J", word.len()));
            }
        }
    }
    Ok(())
}

/// Verify a candidate pair and build its record.
fn verify_pair<M: IntervalMap + ?Sized>(
    f: &M,
    a: f64,
    b: f64,
    periods: (usize, usize),
    horizon: usize,
) -> Option<RenormalizationRecord> {
    let c = f.critical_point();
    let j = Interval::open(a, b);
    let left = propagate(f, a, c, &j, periods.0)?;
    let right = propagate(f, c, b, &j, periods.1)?;
    if left.itinerary.len() != periods.0 || right.itinerary.len() != periods.1 {
        return None;
    }
    let rec = RenormalizationRecord {
        j,
        period_a: periods.0,
        period_b: periods.1,
        rescale: Rescale::onto(&j),
        left_itinerary: left.itinerary,
        right_itinerary: right.itinerary,
    };
    check_inclusions(f, &rec, INCLUSION_SAMPLES).ok()?;
    // the boundary orbits are periodic, so one period decides niceness;
    // iterating a repelling orbit further only accumulates rounding
    let steps = horizon.min(periods.0.max(periods.1));
    if !is_nice(f, j, steps).is_nice() {
        return None;
    }
    Some(rec)
}

/// All renormalization intervals whose endpoints have period at most
/// `max_period`, the largest first. Intervals with `0` or `1` as an endpoint
/// are excluded, since they would share a boundary point with `(0, 1)`.
pub fn detect_renormalization<M: IntervalMap + ?Sized>(
    f: &M,
    max_period: usize,
    horizon: usize,
) -> Vec<RenormalizationRecord> {
    let c = f.critical_point();
    let eps = f.tolerances().eps_point;
    let orbits = orbits::periodic_orbits(f, max_period);
    // (point, nearest orbit point on the other side of c, period)
    let mut lefts: Vec<(f64, f64, usize)> = Vec::new();
    let mut rights: Vec<(f64, f64, usize)> = Vec::new();
    for o in &orbits {
        let (below, above) = o.nearest_to(c);
        if let Some(x) = below {
            lefts.push((x, above.unwrap_or(f64::INFINITY), o.period));
        }
        if let Some(y) = above {
            rights.push((y, below.unwrap_or(f64::NEG_INFINITY), o.period));
        }
    }
    // nearest to c first
    lefts.sort_by(|p, q| q.0.total_cmp(&p.0));
    rights.sort_by(|p, q| p.0.total_cmp(&q.0));

    let mut found: Vec<RenormalizationRecord> = Vec::new();
    for &(a, a_partner, la) in &lefts {
        for &(b, b_partner, rb) in &rights {
            // both boundary orbits stay outside (a, b)
            if a_partner < b - eps || b_partner > a + eps {
                continue;
            }
            // the closure of J must lie inside (0, 1)
            if a <= eps || b >= 1.0 - eps {
                continue;
            }
            if found.iter().any(|r| (r.a() - a).abs() <= eps && (r.b() - b).abs() <= eps) {
                continue;
            }
            if let Some(rec) = verify_pair(f, a, b, (la, rb), horizon) {
                found.push(rec);
            }
        }
    }
    found.sort_by(|p, q| q.j.len().total_cmp(&p.j.len()).then(p.a().total_cmp(&q.a())));
    found
}

/// The renormalization `g = A^-1 o f^{l or r} o A` of a map, evaluated
/// through the original map along the recorded itineraries.
#[derive(Debug, Clone)]
pub struct RenormalizedView<M> {
    base: M,
    record: RenormalizationRecord,
    critical: f64,
    tolerances: Tolerances,
}

impl<M: IntervalMap> RenormalizedView<M> {
    pub fn base(&self) -> &M {
        &self.base
    }

    pub fn record(&self) -> &RenormalizationRecord {
        &self.record
    }

    /// Critical point of the base map in view coordinates.
    fn outer(&self, x: f64) -> f64 {
        if x == self.critical {
            self.base.critical_point()
        } else {
            self.record.rescale.apply(x)
        }
    }
}

/// Rescaled return map of `f` to a verified record.
pub fn renormalize<M: IntervalMap>(f: M, rec: &RenormalizationRecord) -> Result<RenormalizedView<M>> {
    check_inclusions(&f, rec, INCLUSION_SAMPLES).map_err(|reason| Error::RecordInvalid {
        lo: rec.a(),
        hi: rec.b(),
        reason,
    })?;
    let critical = rec.rescale.invert(f.critical_point());
    let tolerances = *f.tolerances();
    Ok(RenormalizedView { base: f, record: rec.clone(), critical, tolerances })
}

impl<M: IntervalMap> IntervalMap for RenormalizedView<M> {
    fn critical_point(&self) -> f64 {
        self.critical
    }

    fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    fn branch(&self, side: Side, x: f64) -> f64 {
        let x = match side {
            Side::Left if x <= 0.0 => return 0.0,
            Side::Right if x >= 1.0 => return 1.0,
            Side::Left => x.min(self.critical),
            Side::Right => x.max(self.critical),
        };
        let y = follow(&self.base, self.record.itinerary(side), self.outer(x));
        self.record.rescale.invert(y).clamp(0.0, 1.0)
    }

    fn branch_derivative(&self, side: Side, x: f64) -> f64 {
        let x = match side {
            Side::Left => x.clamp(0.0, self.critical),
            Side::Right => x.clamp(self.critical, 1.0),
        };
        follow_slope(&self.base, self.record.itinerary(side), self.outer(x))
    }

    fn negative_schwarzian(&self) -> bool {
        self.base.negative_schwarzian()
    }

    fn branch_preimage(&self, side: Side, y: f64) -> f64 {
        let mut t = self.record.rescale.apply(y.clamp(0.0, 1.0));
        for b in self.record.itinerary(side).bytes().rev() {
            t = self.base.branch_preimage(side_of_letter(b), t);
        }
        let x = self.record.rescale.invert(t);
        match side {
            Side::Left => x.clamp(0.0, self.critical),
            Side::Right => x.clamp(self.critical, 1.0),
        }
    }
}

/// Renormalization cycle, nice trapping region and a sample of the points
/// whose orbits avoid `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleSets {
    /// Forward images of `(a, c)` and `(c, b)` up to their returns, merged.
    pub u_j: Vec<Interval>,
    /// Gaps of `Lambda_J` that contain a component of `U_J`.
    pub k_j: Vec<Interval>,
    pub lambda_j_sample: IntervalCover,
    /// Sampled `Lambda_J` points found inside `K_J` (zero when consistent).
    pub stray_samples: usize,
}

impl CycleSets {
    /// For each `K_J` component, the number of `U_J` components inside it.
    pub fn u_per_k(&self) -> Vec<usize> {
        self.k_j
            .iter()
            .map(|k| self.u_j.iter().filter(|u| u.is_within(k, 1e-9)).count())
            .collect()
    }
}

/// Merge intervals that overlap by more than `eps_value` or that touch
/// exactly at `c`. Images of `(a, c)` may end at `b` up to rounding, and
/// such neighbours stay separate.
fn merge_at<M: IntervalMap + ?Sized>(f: &M, mut v: Vec<Interval>) -> Vec<Interval> {
    let c = f.critical_point();
    let eps = f.tolerances().eps_critical;
    let overlap = f.tolerances().eps_value;
    v.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    let mut out: Vec<Interval> = Vec::new();
    for i in v {
        if let Some(last) = out.last_mut() {
            let touch_at_c = (last.hi - c).abs() <= eps && (i.lo - c).abs() <= eps;
            if i.lo < last.hi - overlap || touch_at_c {
                last.hi = last.hi.max(i.hi);
                continue;
            }
        }
        out.push(i);
    }
    out
}

/// Pull `J` back along `word` by saturating branch preimages.
fn pull_back<M: IntervalMap + ?Sized>(f: &M, j: &Interval, word: &str) -> Interval {
    let (mut lo, mut hi) = (j.lo, j.hi);
    for b in word.bytes().rev() {
        let s = side_of_letter(b);
        lo = f.branch_preimage(s, lo);
        hi = f.branch_preimage(s, hi);
    }
    Interval::open(lo, hi)
}

/// `U_J` and `K_J` of a verified record.
///
/// The gap of `Lambda_J` around `f^i((a, c))` is the component of
/// `f^-(l-i)(J)` containing it: its endpoints are preimages of `a` or `b`
/// whose orbits avoid `J`, and every point inside enters `J`.
fn cycle_components<M: IntervalMap + ?Sized>(
    f: &M,
    rec: &RenormalizationRecord,
) -> Result<(Vec<Interval>, Vec<Interval>)> {
    let invalid = |reason: String| Error::RecordInvalid { lo: rec.a(), hi: rec.b(), reason };
    check_inclusions(f, rec, INCLUSION_SAMPLES).map_err(invalid)?;
    let c = f.critical_point();
    let j = rec.j;
    let mut u = Vec::new();
    let mut k = Vec::new();
    for (side, lo, hi) in [(Side::Left, j.lo, c), (Side::Right, c, j.hi)] {
        let word = rec.itinerary(side);
        let chain = propagate(f, lo, hi, &j, word.len())
            .filter(|ch| ch.itinerary == word)
            .ok_or_else(|| invalid(format!("{side} half does not follow its itinerary")))?;
        for (i, img) in chain.images.iter().enumerate() {
            u.push(*img);
            if i > 0 && i < word.len() {
                k.push(pull_back(f, &j, &word[i..]));
            }
        }
    }
    k.push(j);
    Ok((merge_at(f, u), merge_at(f, k)))
}

/// Cycle sets of a verified record with `sample_budget` points of
/// `Lambda_J` drawn from the backward orbits of `a`, `b`, `0` and `1`.
pub fn cycle_sets<M: IntervalMap + ?Sized>(
    f: &M,
    rec: &RenormalizationRecord,
    sample_budget: usize,
) -> Result<CycleSets> {
    let (u_j, k_j) = cycle_components(f, rec)?;
    let j = rec.j;
    let outside = |x: f64| x <= j.lo || x >= j.hi;
    let fine = (sample_budget * 4).max(COVER_GRID);
    let mut seen = alloc::vec![false; fine];
    let mut points = Vec::new();
    let mut queue = alloc::collections::VecDeque::new();
    for x in [j.lo, j.hi, 0.0, 1.0] {
        let cell = IntervalCover::cell_of(fine, x);
        if outside(x) && !seen[cell] {
            seen[cell] = true;
            queue.push_back(x);
        }
    }
    while let Some(x) = queue.pop_front() {
        points.push(x);
        if points.len() >= sample_budget {
            break;
        }
        for p in orbits::preimages(f, x) {
            let cell = IntervalCover::cell_of(fine, p.x);
            if outside(p.x) && !seen[cell] {
                seen[cell] = true;
                queue.push_back(p.x);
            }
        }
    }
    let stray_samples = points
        .iter()
        .filter(|&&x| k_j.iter().any(|k| x > k.lo && x < k.hi))
        .count();
    Ok(CycleSets {
        u_j,
        k_j,
        lambda_j_sample: IntervalCover::from_points(COVER_GRID, points),
        stray_samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenormTower {
    /// Records in original coordinates, `J_1` outermost.
    pub records: Vec<RenormalizationRecord>,
    /// `K_J` of each record.
    pub trapping: Vec<Vec<Interval>>,
    /// The search stopped at the depth bound rather than for lack of a
    /// further renormalization.
    pub depth_limit_hit: bool,
    /// Intersection of the `K_J` covers when the depth is at least 2.
    pub solenoid_cover: Option<IntervalCover>,
}

impl RenormTower {
    pub fn depth(&self) -> usize {
        self.records.len()
    }

    /// Cover of `K_J` at a level (0 is the outermost record).
    pub fn trapping_cover(&self, level: usize) -> IntervalCover {
        IntervalCover::from_intervals(COVER_GRID, &self.trapping[level])
    }
}

/// Pairs of records whose intervals cross or share exactly one endpoint.
pub fn linked_pairs(records: &[RenormalizationRecord]) -> Vec<((f64, f64), (f64, f64))> {
    let mut out = Vec::new();
    for (i, p) in records.iter().enumerate() {
        for q in &records[i + 1..] {
            let same = p.j.lo == q.j.lo && p.j.hi == q.j.hi;
            let shared = p.j.lo == q.j.lo || p.j.hi == q.j.hi;
            if p.j.is_linked_with(&q.j) || (shared && !same) {
                out.push(((p.a(), p.b()), (q.a(), q.b())));
            }
        }
    }
    out
}

/// Renormalize repeatedly, each time at the largest renormalization
/// interval of the current view, up to `max_depth` levels.
pub fn build_tower<M: IntervalMap + Clone>(
    f: &M,
    max_depth: usize,
    max_period: usize,
) -> Result<RenormTower> {
    let horizon = 4 * max_period.max(1);
    let mut records: Vec<RenormalizationRecord> = Vec::new();
    let mut trapping = Vec::new();
    let mut depth_limit_hit = false;
    loop {
        let next = match records.last() {
            None => detect_renormalization(f, max_period, horizon).into_iter().next(),
            Some(outer) => {
                let view = renormalize(f.clone(), outer)?;
                detect_renormalization(&view, max_period, horizon)
                    .into_iter()
                    .next()
                    .map(|inner| outer.compose(&inner))
            }
        };
        let Some(rec) = next else { break };
        if records.len() == max_depth {
            depth_limit_hit = true;
            break;
        }
        let (_, k) = cycle_components(f, &rec)?;
        records.push(rec);
        trapping.push(k);
    }

    let mut witnesses = linked_pairs(&records);
    for w in records.windows(2) {
        if !w[1].j.closure_inside(&w[0].j) && !w[1].j.is_linked_with(&w[0].j) {
            witnesses.push(((w[0].a(), w[0].b()), (w[1].a(), w[1].b())));
        }
    }
    if !witnesses.is_empty() {
        return Err(Error::LinkedIntervalsDetected { witnesses });
    }
    let solenoid_cover = (records.len() >= 2).then(|| {
        trapping
            .iter()
            .map(|k| IntervalCover::from_intervals(COVER_GRID, k))
            .reduce(|p, q| p.intersection(&q))
            .unwrap_or_else(|| IntervalCover::empty(COVER_GRID))
    });
    Ok(RenormTower { records, trapping, depth_limit_hit, solenoid_cover })
}

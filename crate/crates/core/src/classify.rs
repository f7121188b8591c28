//! Classification of the topological attractor.
//!
//! The decision tree runs through the possible attractor types in order:
//! periodic attractors, a deep renormalization tower (solenoid), a gap map
//! without rational lock (Cherry), and finally the trapping region around
//! `c`, where the limit set of generic points is compared with the limit
//! set of the critical orbits to tell a cycle of intervals from a Cantor
//! set. Every verdict is evidence with its measurements attached.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cherry::{cherry_verdict, CherryParams, CherryVerdict, RotationEstimate};
use crate::error::{Error, Result};
use crate::float;
use crate::interval::{merge_overlapping, Interval, IntervalCover};
use crate::map::{IntervalMap, Side, SignedPoint};
use crate::orbits::{self, PeriodicOrbit, Stability};
use crate::renorm::{build_tower, detect_renormalization, propagate, renormalize, RenormTower, RenormalizationRecord};
use crate::return_map::{return_decomposition, ReturnMapDecomposition};

/// Finite union of intervals around `c` mapped into itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrappingRegion {
    pub base: Interval,
    pub ell: usize,
    pub r: usize,
    /// `(a, b)`, `f^j((a, c))` for `0 < j < ell` and `f^j((c, b))` for
    /// `0 < j < r`.
    pub components: Vec<Interval>,
}

impl TrappingRegion {
    /// Components for a base interval with the given return times.
    pub fn assemble<M: IntervalMap + ?Sized>(f: &M, base: Interval, ell: usize, r: usize) -> Self {
        let c = f.critical_point();
        let mut components = alloc::vec![base];
        for (lo, hi, n) in [(base.lo, c, ell), (c, base.hi, r)] {
            let (mut p, mut q) = (lo, hi);
            for _ in 1..n {
                let side = side_at(f, p, q);
                (p, q) = (f.branch(side, p), f.branch(side, q));
                components.push(Interval::open(p, q));
            }
        }
        TrappingRegion { base, ell, r, components }
    }

    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.components.iter().any(|i| i.contains_loosely(x, slack))
    }

    /// Total length of the components.
    fn measure(&self) -> f64 {
        self.components.iter().map(|i| i.len()).sum()
    }

    /// Point of the components at fraction `s` of their total length.
    fn point_at(&self, s: f64) -> f64 {
        let mut t = s * self.measure();
        for i in &self.components {
            if t < i.len() {
                return i.lo + t;
            }
            t -= i.len();
        }
        self.components.last().map_or(0.5, |i| i.midpoint())
    }

    /// Push `samples` points of the components forward once and collect the
    /// images that leave them by more than `slack`.
    pub fn check_invariance<M: IntervalMap + ?Sized>(
        &self,
        f: &M,
        samples: usize,
        slack: f64,
    ) -> InvarianceReport {
        let mut escapes = Vec::new();
        for k in 0..samples {
            let x = self.point_at((k as f64 + 0.5) / samples as f64);
            if f.is_critical(x) {
                continue;
            }
            let y = f.apply(x);
            if !self.contains(y, slack) {
                escapes.push((x, y));
            }
        }
        InvarianceReport { samples, escapes }
    }
}

fn side_at<M: IntervalMap + ?Sized>(f: &M, lo: f64, hi: f64) -> Side {
    if hi <= f.critical_point() {
        Side::Left
    } else if lo >= f.critical_point() {
        Side::Right
    } else {
        f.side_of(0.5 * (lo + hi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub samples: usize,
    /// `(x, f(x))` for sampled points whose image left the region.
    pub escapes: Vec<(f64, f64)>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.escapes.is_empty()
    }
}

/// Trapping region over `base`, with the least return times of its halves.
pub fn trapping_region_over<M: IntervalMap + ?Sized>(
    f: &M,
    base: Interval,
    horizon: usize,
) -> Result<TrappingRegion> {
    let c = f.critical_point();
    let mut times = [0usize; 2];
    for (i, (side, lo, hi)) in [(Side::Left, base.lo, c), (Side::Right, c, base.hi)].into_iter().enumerate() {
        let chain = propagate(f, lo, hi, &base, horizon).ok_or(Error::NoReturnWithinHorizon { side, horizon })?;
        times[i] = chain.itinerary.len();
    }
    Ok(TrappingRegion::assemble(f, base, times[0], times[1]))
}

/// Trapping region over the smallest renormalization interval found with
/// endpoint periods up to `max_period`, or over `(0, 1)` when there is none.
pub fn trapping_region<M: IntervalMap + ?Sized>(
    f: &M,
    max_period: usize,
    horizon: usize,
) -> Result<TrappingRegion> {
    let base = detect_renormalization(f, max_period, horizon)
        .last()
        .map_or(Interval::open(0.0, 1.0), |r| r.j);
    trapping_region_over(f, base, horizon)
}

/// Limit-set covers inside a trapping region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCovers {
    /// Union of the limit-set covers of seeds spread over the region.
    pub generic: IntervalCover,
    /// Limit-set covers of `c-` and `c+`, with the cell of `c`.
    pub critical: IntervalCover,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyParams {
    pub max_period: usize,
    pub grid: usize,
    /// Iterates discarded before an orbit is recorded.
    pub transient: usize,
    /// Iterates recorded per orbit.
    pub horizon: usize,
    /// Generic seeds for the limit-set cover.
    pub samples: usize,
    pub max_depth: usize,
    pub solenoid_depth: usize,
    /// Largest number of intervals in a cycle of intervals.
    pub max_intervals: usize,
    pub rotation_n: usize,
    pub invariance_samples: usize,
    pub basin_grid: usize,
    pub basin_iterations: usize,
    pub basin_radius: f64,
    pub witnesses: usize,
    pub transitivity_trials: usize,
    pub seed: u64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            max_period: 12,
            grid: 4096,
            transient: 1000,
            horizon: 10_000,
            samples: 64,
            max_depth: 3,
            solenoid_depth: 3,
            max_intervals: 16,
            rotation_n: 1_000_000,
            invariance_samples: 10_000,
            basin_grid: 1000,
            basin_iterations: 10_000,
            basin_radius: 1e-6,
            witnesses: 8,
            transitivity_trials: 20,
            seed: 0,
        }
    }
}

/// Seeds spread over the components: a Weyl sequence with a random offset.
fn seeds(u: &TrappingRegion, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let phi = 0.618_033_988_749_894_9;
    let offset: f64 = rng.random();
    (0..n)
        .map(|k| {
            let s = offset + k as f64 * phi;
            u.point_at(s - float::floor(s))
        })
        .collect()
}

fn generic_cover<M: IntervalMap + ?Sized>(f: &M, seeds: &[f64], p: &ClassifyParams, grid: usize) -> IntervalCover {
    let mut occupied = alloc::vec![false; grid.max(2)];
    for &x in seeds {
        orbits::omega_mark(f, SignedPoint::new(x), p.transient, p.horizon, &mut occupied);
    }
    IntervalCover::from_mask(&occupied)
}

fn critical_cover<M: IntervalMap + ?Sized>(f: &M, p: &ClassifyParams, grid: usize) -> IntervalCover {
    let c = f.critical_point();
    let mut occupied = alloc::vec![false; grid.max(2)];
    for side in [Side::Left, Side::Right] {
        orbits::omega_mark(f, SignedPoint { x: c, side }, p.transient, p.horizon, &mut occupied);
    }
    let k = IntervalCover::cell_of(occupied.len(), c);
    occupied[k] = true;
    IntervalCover::from_mask(&occupied)
}

/// Generic and critical limit-set covers inside `u`.
pub fn attractor_estimate<M: IntervalMap + ?Sized>(
    f: &M,
    u: &TrappingRegion,
    samples: usize,
    params: &ClassifyParams,
) -> AttractorCovers {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let s = seeds(u, samples, &mut rng);
    AttractorCovers {
        generic: generic_cover(f, &s, params, params.grid),
        critical: critical_cover(f, params, params.grid),
    }
}

/// `log(k) / T` for the `k` full branches of a decomposition with largest
/// return time `T`; `0` when fewer than two branches are full.
pub fn entropy_lower_bound(decomp: &ReturnMapDecomposition, eps_value: f64) -> f64 {
    let full: Vec<_> = decomp
        .branches
        .iter()
        .filter(|b| (b.image.lo - decomp.j.lo).abs() <= eps_value && (b.image.hi - decomp.j.hi).abs() <= eps_value)
        .collect();
    if full.len() < 2 {
        return 0.0;
    }
    let t = full.iter().map(|b| b.return_time).max().unwrap_or(1);
    float::ln(full.len() as f64) / t as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityTrial {
    pub start: Interval,
    /// Fraction of the cover's cells reached by the union of images.
    pub coverage: f64,
    pub iterations: usize,
    pub reached: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitivityEvidence {
    pub trials: Vec<TransitivityTrial>,
    pub delta: f64,
}

impl TransitivityEvidence {
    pub fn passed(&self) -> bool {
        self.trials.iter().all(|t| t.reached)
    }

    pub fn stuck(&self) -> impl Iterator<Item = &TransitivityTrial> {
        self.trials.iter().filter(|t| !t.reached)
    }
}

/// Image of an interval as at most two intervals, split at `c`.
fn interval_image<M: IntervalMap + ?Sized>(f: &M, i: &Interval, out: &mut Vec<Interval>) {
    let c = f.critical_point();
    if i.hi <= c {
        out.push(Interval::open(f.branch(Side::Left, i.lo), f.branch(Side::Left, i.hi)));
    } else if i.lo >= c {
        out.push(Interval::open(f.branch(Side::Right, i.lo), f.branch(Side::Right, i.hi)));
    } else {
        out.push(Interval::open(f.branch(Side::Left, i.lo), f.branch(Side::Left, c)));
        out.push(Interval::open(f.branch(Side::Right, c), f.branch(Side::Right, i.hi)));
    }
}

/// Sweep random cells of `cover` forward as intervals until the images have
/// met `1 - delta` of the cover's cells.
pub fn transitivity_check<M: IntervalMap + ?Sized>(
    f: &M,
    cover: &IntervalCover,
    trials: usize,
    horizon: usize,
    delta: f64,
    seed: u64,
) -> TransitivityEvidence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells: Vec<usize> = cover.runs().iter().flat_map(|&(a, b)| a..=b).collect();
    let n = cover.grid_size;
    let w = cover.cell_width();
    let target = cover.cell_count();
    let mut out = Vec::new();
    if cells.is_empty() {
        return TransitivityEvidence { trials: out, delta };
    }
    for _ in 0..trials {
        let cell = cells[rng.random_range(0..cells.len())];
        let start = Interval::open(cell as f64 * w, (cell + 1) as f64 * w);
        let mut hit = alloc::vec![false; n];
        let mut count = 0usize;
        let mark = |i: &Interval, hit: &mut Vec<bool>, count: &mut usize| {
            let (a, b) = (IntervalCover::cell_of(n, i.lo), IntervalCover::cell_of(n, i.hi));
            for k in a..=b {
                if !hit[k] && cover.contains_cell(k) {
                    hit[k] = true;
                    *count += 1;
                }
            }
        };
        let mut current = alloc::vec![start];
        mark(&start, &mut hit, &mut count);
        let mut iterations = 0;
        let goal = float::ceil((1.0 - delta) * target as f64) as usize;
        while count < goal && iterations < horizon {
            let mut next = Vec::with_capacity(current.len() * 2);
            for i in &current {
                interval_image(f, i, &mut next);
            }
            current = merge_overlapping(next);
            for i in &current {
                mark(i, &mut hit, &mut count);
            }
            iterations += 1;
        }
        out.push(TransitivityTrial {
            start,
            coverage: count as f64 / target as f64,
            iterations,
            reached: count >= goal,
        });
    }
    TransitivityEvidence { trials: out, delta }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttractorKind {
    PeriodicAttractors(Vec<PeriodicOrbit>),
    SolenoidEvidence { depth: usize },
    CherryEvidence,
    ChaoticCycleOfIntervals { intervals: Vec<Interval> },
    CantorWanderingEvidence { gaps: Vec<Interval> },
    Inconclusive { reason: String },
}

impl AttractorKind {
    pub fn name(&self) -> &'static str {
        match self {
            AttractorKind::PeriodicAttractors(_) => "PeriodicAttractors",
            AttractorKind::SolenoidEvidence { .. } => "SolenoidEvidence",
            AttractorKind::CherryEvidence => "CherryEvidence",
            AttractorKind::ChaoticCycleOfIntervals { .. } => "ChaoticCycleOfIntervals",
            AttractorKind::CantorWanderingEvidence { .. } => "CantorWanderingEvidence",
            AttractorKind::Inconclusive { .. } => "Inconclusive",
        }
    }

    pub fn is_definite(&self) -> bool {
        !matches!(self, AttractorKind::Inconclusive { .. })
    }
}

/// A named measurement with its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, value: f64, passed: bool, detail: String) -> Self {
        Check { name: String::from(name), value, passed, detail }
    }
}

/// A repelling periodic orbit inside the attractor cover with its exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovWitness {
    pub itinerary: String,
    pub point: f64,
    pub period: usize,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorReport {
    pub kind: AttractorKind,
    pub lambda_cover: IntervalCover,
    pub generic_cover: Option<IntervalCover>,
    pub critical_cover: Option<IntervalCover>,
    pub trapping: Option<TrappingRegion>,
    pub tower_depth: usize,
    pub rotation: Option<RotationEstimate>,
    pub basin_coverage: Option<f64>,
    pub evidence: Vec<Check>,
    pub periodic_density_check: Check,
    pub entropy_lower_bound: f64,
    pub lyapunov_witnesses: Vec<LyapunovWitness>,
    /// Violated invariants (linked renormalization intervals, more than two
    /// periodic attractors); non-empty means a numerical fault.
    pub invariant_violations: Vec<String>,
    pub seed: u64,
}

impl AttractorReport {
    pub fn passed_checks(&self) -> usize {
        self.evidence.iter().filter(|c| c.passed).count() + self.periodic_density_check.passed as usize
    }
}

/// Largest period searched while refining the periodic density check.
pub const DENSITY_MAX_PERIOD: usize = 20;

fn mark_repelling(orbits: &[PeriodicOrbit], hit: &mut [bool]) {
    let n = hit.len();
    for o in orbits.iter().filter(|o| o.stability == Stability::Repelling) {
        for &x in &o.points {
            hit[IntervalCover::cell_of(n, x)] = true;
        }
    }
}

/// Mark the repelling orbits of period `<= max_period` of the view at `rec`,
/// carried back to `f`: a period-`n` orbit of the view is a periodic orbit of
/// `f` through `J`.
fn mark_lifted<M: IntervalMap + Clone>(f: &M, rec: &RenormalizationRecord, max_period: usize, hit: &mut [bool]) {
    let Ok(view) = renormalize(f.clone(), rec) else { return };
    let n = hit.len();
    for o in orbits::periodic_orbits(&view, max_period) {
        if o.stability != Stability::Repelling {
            continue;
        }
        let steps: usize = o
            .itinerary
            .chars()
            .map(|s| if s == Side::Left.letter() { rec.period_a } else { rec.period_b })
            .sum();
        let mut x = rec.rescale.apply(o.points[0]);
        for _ in 0..steps {
            hit[IntervalCover::cell_of(n, x)] = true;
            x = f.apply(x);
        }
    }
}

fn density_check(hit: &[bool], cover: &IntervalCover, period: usize) -> Check {
    let cells = cover.cell_count();
    let found = cover.runs().iter().flat_map(|&(a, b)| a..=b).filter(|&k| hit[k]).count();
    let frac = if cells == 0 { 0.0 } else { found as f64 / cells as f64 };
    Check::new(
        "periodic_density",
        frac,
        frac >= 0.9,
        format!("{found} of {cells} cover cells hold a repelling periodic point of period <= {period}"),
    )
}

/// Fraction of the cells of `cover` holding a repelling periodic point. The
/// orbits of `f` up to `max_period` are used first; while the fraction stays
/// below `0.9` the search continues with longer periods, on the deepest
/// renormalization when there is one, up to [`DENSITY_MAX_PERIOD`].
fn periodic_density<M: IntervalMap + Clone>(
    f: &M,
    orbits: &[PeriodicOrbit],
    tower: Option<&RenormTower>,
    cover: &IntervalCover,
    max_period: usize,
) -> Check {
    let mut hit = alloc::vec![false; cover.grid_size];
    mark_repelling(orbits, &mut hit);
    let mut check = density_check(&hit, cover, max_period);
    if cover.is_empty() {
        return check;
    }
    let rec = tower.and_then(|t| t.records.last());
    let mut period = if rec.is_some() { max_period } else { max_period + 2 };
    while !check.passed && period <= DENSITY_MAX_PERIOD {
        match rec {
            Some(rec) => mark_lifted(f, rec, period, &mut hit),
            None => mark_repelling(&orbits::periodic_orbits(f, period), &mut hit),
        }
        check = density_check(&hit, cover, period);
        period += 2;
    }
    check
}

fn witnesses(orbits: &[PeriodicOrbit], cover: &IntervalCover, count: usize) -> Vec<LyapunovWitness> {
    orbits
        .iter()
        .filter(|o| o.stability == Stability::Repelling && o.points.iter().all(|&x| cover.contains(x)))
        .take(count)
        .map(|o| LyapunovWitness {
            itinerary: o.itinerary.clone(),
            point: o.min_point(),
            period: o.period,
            exponent: float::ln(o.multiplier.abs()) / o.period as f64,
        })
        .collect()
}

/// Fraction of a uniform grid whose orbits come within `radius` of an
/// attracting orbit in at most `basin_iterations` steps.
fn basin_coverage<M: IntervalMap + ?Sized>(f: &M, attractors: &[PeriodicOrbit], p: &ClassifyParams) -> f64 {
    let mut pts: Vec<f64> = attractors.iter().flat_map(|o| o.points.iter().copied()).collect();
    pts.sort_by(f64::total_cmp);
    let near = |x: f64| {
        let i = pts.partition_point(|&q| q < x);
        let d1 = if i < pts.len() { (pts[i] - x).abs() } else { f64::INFINITY };
        let d0 = if i > 0 { (x - pts[i - 1]).abs() } else { f64::INFINITY };
        d0.min(d1) <= p.basin_radius
    };
    let n = p.basin_grid.max(1);
    let mut converged = 0;
    for k in 0..n {
        let mut x = (k as f64 + 0.5) / n as f64;
        for _ in 0..p.basin_iterations {
            x = f.apply(x);
            if near(x) {
                converged += 1;
                break;
            }
        }
    }
    converged as f64 / n as f64
}

fn critical_cell_neighbourhood(cover: &IntervalCover, c: f64) -> bool {
    let k = IntervalCover::cell_of(cover.grid_size, c);
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(cover.grid_size - 1);
    (lo..=hi).all(|i| cover.contains_cell(i))
}

fn cells_to_interval(cover: &IntervalCover, (a, b): (usize, usize)) -> Interval {
    let w = cover.cell_width();
    Interval::open(a as f64 * w, (b + 1) as f64 * w)
}

/// Run the decision tree.
pub fn classify<M: IntervalMap + Clone>(f: &M, params: &ClassifyParams) -> AttractorReport {
    let c = f.critical_point();
    let eps_value = f.tolerances().eps_value;
    let grid = params.grid.max(2);
    let mut evidence = Vec::new();
    let mut violations = Vec::new();

    let orbits = orbits::periodic_orbits(f, params.max_period);
    let attractors: Vec<PeriodicOrbit> = orbits.iter().filter(|o| o.stability.is_attractor()).cloned().collect();
    evidence.push(Check::new(
        "periodic_attractors",
        attractors.len() as f64,
        attractors.len() <= 2,
        format!("{} attracting orbits of period <= {}", attractors.len(), params.max_period),
    ));
    let neutral = orbits.iter().filter(|o| o.stability == Stability::Neutral).count();
    if neutral > 0 {
        evidence.push(Check::new(
            "neutral_orbits",
            neutral as f64,
            false,
            format!("{neutral} neutral periodic orbits may stall the decision"),
        ));
    }

    let whole = Interval::open(0.0, 1.0);
    let entropy_on = |f: &M, j: Interval| {
        let d = return_decomposition(f, j, 64, 2048);
        entropy_lower_bound(&d, eps_value)
    };

    let finish = |kind: AttractorKind,
                  lambda: IntervalCover,
                  evidence: Vec<Check>,
                  violations: Vec<String>,
                  extra: Extra| {
        let density = periodic_density(f, &orbits, extra.tower.as_ref(), &lambda, params.max_period);
        let lyap = witnesses(&orbits, &lambda, params.witnesses);
        AttractorReport {
            kind,
            periodic_density_check: density,
            lyapunov_witnesses: lyap,
            lambda_cover: lambda,
            generic_cover: extra.generic,
            critical_cover: extra.critical,
            trapping: extra.trapping,
            tower_depth: extra.depth,
            rotation: extra.rotation,
            basin_coverage: extra.basin,
            evidence,
            entropy_lower_bound: extra.entropy,
            invariant_violations: violations,
            seed: params.seed,
        }
    };

    // (1) periodic attractors
    if !attractors.is_empty() {
        if attractors.len() > 2 {
            violations.push(format!("{} periodic attractors found, at most 2 are possible", attractors.len()));
            let kind = AttractorKind::Inconclusive { reason: String::from("more than two periodic attractors") };
            let extra = Extra { entropy: entropy_on(f, whole), ..Extra::default() };
            return finish(kind, IntervalCover::empty(grid), evidence, violations, extra);
        }
        let basin = basin_coverage(f, &attractors, params);
        evidence.push(Check::new(
            "basin_coverage",
            basin,
            basin >= 0.999,
            format!("{} of a {}-point grid within {:e} in at most {} iterates", basin, params.basin_grid, params.basin_radius, params.basin_iterations),
        ));
        let lambda = IntervalCover::from_points(grid, attractors.iter().flat_map(|o| o.points.iter().copied()));
        let extra = Extra { entropy: entropy_on(f, whole), basin: Some(basin), ..Extra::default() };
        return finish(AttractorKind::PeriodicAttractors(attractors), lambda, evidence, violations, extra);
    }

    // (2) solenoid
    let tower = match build_tower(f, params.max_depth, params.max_period) {
        Ok(t) => t,
        Err(e) => {
            violations.push(format!("{e}"));
            let kind = AttractorKind::Inconclusive { reason: format!("{e}") };
            let extra = Extra { entropy: entropy_on(f, whole), ..Extra::default() };
            return finish(kind, IntervalCover::empty(grid), evidence, violations, extra);
        }
    };
    let depth = tower.depth();
    evidence.push(Check::new(
        "tower_depth",
        depth as f64,
        true,
        format!("depth {depth}, limit hit {}", tower.depth_limit_hit),
    ));
    let base = tower.records.last().map_or(whole, |r| r.j);
    let entropy = entropy_on(f, base);

    // trapping region over the deepest renormalization interval, attached to
    // every non-periodic verdict
    let u = match trapping_region_over(f, base, 4 * params.max_period.max(1) + 64) {
        Ok(u) => Some(u),
        Err(e) => {
            evidence.push(Check::new("trapping_region", 0.0, false, format!("{e}")));
            None
        }
    };
    let inv = u.as_ref().map(|u| u.check_invariance(f, params.invariance_samples, eps_value));
    if let Some(inv) = &inv {
        evidence.push(Check::new(
            "trapping_invariance",
            inv.escapes.len() as f64,
            inv.passed(),
            format!("{} escapes of {} samples", inv.escapes.len(), inv.samples),
        ));
    }
    let invariant = inv.as_ref().is_some_and(InvarianceReport::passed);
    let base_extra = Extra {
        entropy,
        depth,
        trapping: u.clone(),
        tower: Some(tower.clone()),
        ..Extra::default()
    };

    if depth >= params.solenoid_depth && tower.depth_limit_hit {
        let lambda = tower.solenoid_cover.clone().unwrap_or_else(|| IntervalCover::empty(grid)).regrid(grid);
        evidence.push(nesting_check(&tower, c));
        return finish(AttractorKind::SolenoidEvidence { depth }, lambda, evidence, violations, base_extra);
    }

    // (3) Cherry
    let cherry_params = CherryParams {
        max_period: params.max_period,
        rotation_n: params.rotation_n,
        ..CherryParams::default()
    };
    let cherry = cherry_verdict(f, &tower, &cherry_params);
    push_cherry_evidence(&mut evidence, &cherry);
    let base_extra = Extra { rotation: cherry.rotation.clone(), ..base_extra };
    if cherry.evidence {
        let left = orbits::omega_estimate(f, SignedPoint::left(c), params.transient, params.horizon, grid);
        let right = orbits::omega_estimate(f, SignedPoint::right(c), params.transient, params.horizon, grid);
        let agree = left.is_subset_of(&right.dilate(1)) && right.is_subset_of(&left.dilate(1));
        evidence.push(Check::new(
            "critical_limit_sets_agree",
            left.cell_count() as f64,
            agree,
            format!("omega(c-) {} cells, omega(c+) {} cells", left.cell_count(), right.cell_count()),
        ));
        let kind = if agree {
            AttractorKind::CherryEvidence
        } else {
            AttractorKind::Inconclusive { reason: String::from("gap map without lock but omega(c-) and omega(c+) differ") }
        };
        return finish(kind, left, evidence, violations, base_extra);
    }

    // (4) cycle of intervals or Cantor set inside the trapping region
    let Some(u) = u else {
        let kind = AttractorKind::Inconclusive { reason: String::from("no trapping region within the horizon") };
        return finish(kind, IntervalCover::empty(grid), evidence, violations, base_extra);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let s = seeds(&u, params.samples, &mut rng);
    let generic = generic_cover(f, &s, params, grid);
    let critical = critical_cover(f, params, grid);
    let contained = critical.is_subset_of(&generic.dilate(1));
    evidence.push(Check::new(
        "critical_inside_generic",
        critical.cell_count() as f64,
        contained,
        format!("critical cover {} cells, generic cover {} cells", critical.cell_count(), generic.cell_count()),
    ));
    let few = generic.component_count() <= params.max_intervals;
    let around_c = critical_cell_neighbourhood(&generic, c);
    evidence.push(Check::new(
        "generic_components",
        generic.component_count() as f64,
        few,
        format!("at most {} allowed", params.max_intervals),
    ));
    evidence.push(Check::new(
        "neighbourhood_of_c",
        around_c as u8 as f64,
        around_c,
        String::from("generic cover holds the cells around c"),
    ));
    let extra = Extra {
        generic: Some(generic.clone()),
        critical: Some(critical.clone()),
        ..base_extra
    };

    if contained && few && around_c && invariant {
        let tr = transitivity_check(f, &generic, params.transitivity_trials, 1000, 0.01, params.seed);
        let stuck = tr.stuck().count();
        evidence.push(Check::new(
            "transitivity",
            (tr.trials.len() - stuck) as f64,
            tr.passed(),
            format!("{stuck} of {} trials stuck", tr.trials.len()),
        ));
        let density = periodic_density(f, &orbits, Some(&tower), &generic, params.max_period);
        let kind = if !tr.passed() {
            AttractorKind::Inconclusive { reason: format!("{stuck} transitivity trials stuck") }
        } else if !density.passed {
            AttractorKind::Inconclusive { reason: format!("periodic density {} below 0.9", density.value) }
        } else {
            AttractorKind::ChaoticCycleOfIntervals { intervals: generic.intervals() }
        };
        return finish(kind, generic, evidence, violations, extra);
    }

    // Cantor discriminator: gaps of the generic cover that survive a finer
    // grid and hold no periodic point and no critical-orbit point
    let fine = generic_cover(f, &s, params, grid * 4);
    let fine_critical = critical_cover(f, params, grid * 4);
    let periodic_pts: Vec<f64> = orbits.iter().flat_map(|o| o.points.iter().copied()).collect();
    let fine_ivs = fine.intervals();
    let crit_ivs = fine_critical.intervals();
    let persistent: Vec<Interval> = generic
        .gaps()
        .into_iter()
        .map(|g| cells_to_interval(&generic, g))
        .filter(|g| {
            let in_fine = fine_ivs.iter().any(|i| i.lo < g.hi && g.lo < i.hi);
            let in_crit = crit_ivs.iter().any(|i| i.lo < g.hi && g.lo < i.hi);
            let periodic = periodic_pts.iter().any(|&x| g.contains(x));
            !in_fine && !in_crit && !periodic
        })
        .collect();
    let strictly_inside = contained && critical.cell_count() < generic.cell_count();
    evidence.push(Check::new(
        "persistent_gaps",
        persistent.len() as f64,
        !persistent.is_empty(),
        format!("{} gaps persist from grid {} to {}", persistent.len(), grid, grid * 4),
    ));
    if strictly_inside && !persistent.is_empty() && invariant {
        return finish(AttractorKind::CantorWanderingEvidence { gaps: persistent }, generic, evidence, violations, extra);
    }
    let reason = format!(
        "generic cover has {} components (critical inside: {contained}, around c: {around_c}, persistent gaps: {})",
        generic.component_count(),
        persistent.len()
    );
    finish(AttractorKind::Inconclusive { reason }, generic, evidence, violations, extra)
}

#[derive(Default)]
struct Extra {
    entropy: f64,
    depth: usize,
    rotation: Option<RotationEstimate>,
    generic: Option<IntervalCover>,
    critical: Option<IntervalCover>,
    trapping: Option<TrappingRegion>,
    basin: Option<f64>,
    tower: Option<RenormTower>,
}

fn nesting_check(tower: &RenormTower, c: f64) -> Check {
    let radii: Vec<f64> = tower.records.iter().map(|r| (r.a() - c).abs().max((r.b() - c).abs())).collect();
    let shrinking = radii.windows(2).all(|w| w[1] <= w[0]);
    Check::new(
        "nested_towards_c",
        radii.last().copied().unwrap_or(1.0),
        shrinking,
        format!("distances of the tower intervals from c: {radii:?}"),
    )
}

fn push_cherry_evidence(evidence: &mut Vec<Check>, v: &CherryVerdict) {
    for cl in &v.clauses {
        evidence.push(Check::new(
            match cl.clause {
                crate::cherry::CherryClause::GapMap => "cherry_gap_map",
                crate::cherry::CherryClause::NoRationalLock => "cherry_no_rational_lock",
                crate::cherry::CherryClause::NoPeriodicOrbitInside => "cherry_no_periodic_orbit",
                crate::cherry::CherryClause::NoPeriodicAttractor => "cherry_no_periodic_attractor",
            },
            cl.passed as u8 as f64,
            cl.passed,
            cl.detail.clone(),
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{MapParams, StandardLorenzMap};
    use crate::return_map::ReturnBranch;
    use crate::scan::instances;

    fn map(p: MapParams) -> StandardLorenzMap {
        StandardLorenzMap::new(p).unwrap()
    }

    fn quick() -> ClassifyParams {
        ClassifyParams { grid: 1024, horizon: 4000, samples: 16, rotation_n: 100_000, ..ClassifyParams::default() }
    }

    #[test]
    fn full_map_trapping_region() {
        let f = map(instances::FULL);
        let u = trapping_region(&f, 8, 32).unwrap();
        assert_eq!(u.base, Interval::open(0.0, 1.0));
        assert_eq!((u.ell, u.r), (1, 1));
        assert_eq!(u.components, alloc::vec![Interval::open(0.0, 1.0)]);
        assert!(u.check_invariance(&f, 10_000, 1e-9).passed());
    }

    #[test]
    fn once_renormalizable_trapping_region() {
        let f = map(instances::ONCE_RENORMALIZABLE);
        let u = trapping_region(&f, 8, 32).unwrap();
        let rec = &build_tower(&f, 3, 8).unwrap().records[0];
        assert_eq!(u.base, rec.j);
        assert_eq!((u.ell, u.r), (2, 2));
        assert_eq!(u.components.len(), u.ell + u.r - 1);
        assert!(u.check_invariance(&f, 10_000, 1e-9).passed());
    }

    #[test]
    fn wrong_return_time_escapes() {
        let f = map(instances::ONCE_RENORMALIZABLE);
        let u = trapping_region(&f, 8, 32).unwrap();
        let bad = TrappingRegion::assemble(&f, u.base, 1, u.r);
        let inv = bad.check_invariance(&f, 10_000, 1e-9);
        assert!(!inv.passed());
        let (x, y) = inv.escapes[0];
        assert!(u.base.contains(x) && !bad.contains(y, 1e-9));
    }

    #[test]
    fn attractor_estimates() {
        let p = quick();
        let whole = |f: &StandardLorenzMap| trapping_region_over(f, Interval::open(0.0, 1.0), 8).unwrap();

        let c = map(instances::CONTRACTING);
        let est = attractor_estimate(&c, &whole(&c), 16, &p);
        assert_eq!(est.generic.runs(), &[(0, 0)]);

        let f = map(instances::FULL);
        let est = attractor_estimate(&f, &whole(&f), 16, &p);
        assert!(est.generic.fraction() >= 0.99);
        let expected = IntervalCover::from_points(p.grid, [0.0, 1.0, 0.5]);
        assert_eq!(est.critical, expected);

        let g = map(instances::PERIOD_TWO);
        let est = attractor_estimate(&g, &whole(&g), 16, &p);
        assert_eq!(est.generic.cell_count(), 2);
    }

    #[test]
    fn entropy_examples() {
        let f = map(instances::FULL);
        let d = return_decomposition(&f, Interval::open(0.0, 1.0), 4, 256);
        assert!((entropy_lower_bound(&d, 1e-9) - core::f64::consts::LN_2).abs() < 1e-12);

        let c = map(instances::CONTRACTING);
        let d = return_decomposition(&c, Interval::open(0.0, 1.0), 4, 256);
        assert_eq!(entropy_lower_bound(&d, 1e-9), 0.0);

        let j = Interval::open(0.0, 1.0);
        let branch = |lo: f64, hi: f64, image: Interval| ReturnBranch {
            domain: Interval::open(lo, hi),
            return_time: 1,
            image,
            touches_critical: true,
            itinerary: "L".into(),
        };
        let single = ReturnMapDecomposition {
            j,
            branches: alloc::vec![branch(0.0, 0.5, j), branch(0.5, 1.0, Interval::open(0.3, 1.0))],
            covered_fraction: 1.0,
            horizon: 1,
            horizon_exhausted: false,
            truncated: false,
            unresolved: 0,
        };
        assert_eq!(entropy_lower_bound(&single, 1e-9), 0.0);
    }

    #[test]
    fn transitivity_examples() {
        let f = map(instances::FULL);
        let tr = transitivity_check(&f, &IntervalCover::full(1024), 20, 1000, 0.01, 7);
        assert_eq!(tr.trials.len(), 20);
        assert!(tr.passed());

        let c = map(instances::CONTRACTING);
        let zero = IntervalCover::from_points(1024, [0.0]);
        assert!(transitivity_check(&c, &zero, 5, 1000, 0.01, 7).passed());

        let split = IntervalCover::from_points(1024, [0.0, 0.9]);
        let tr = transitivity_check(&c, &split, 20, 1000, 0.01, 7);
        assert!(!tr.passed());
        let stuck = tr.stuck().next().unwrap();
        assert!(stuck.start.lo < 0.01 && stuck.coverage < 0.99);
    }

    #[test]
    fn contracting_map_is_periodic() {
        let r = classify(&map(instances::CONTRACTING), &ClassifyParams::default());
        let AttractorKind::PeriodicAttractors(att) = &r.kind else { panic!("{:?}", r.kind) };
        assert_eq!(att.len(), 1);
        assert_eq!(att[0].points, alloc::vec![0.0]);
        assert!(r.basin_coverage.unwrap() >= 0.999);
        assert!(r.invariant_violations.is_empty());
    }

    #[test]
    fn full_map_is_chaotic() {
        let r = classify(&map(instances::FULL), &ClassifyParams::default());
        assert!(matches!(r.kind, AttractorKind::ChaoticCycleOfIntervals { .. }), "{:?}", r.kind);
        assert!(r.lambda_cover.fraction() >= 0.99);
        assert!(r.periodic_density_check.passed);
        assert!((r.entropy_lower_bound - core::f64::consts::LN_2).abs() < 1e-12);
        assert!(r.lyapunov_witnesses.len() >= 5);
        assert!(r.lyapunov_witnesses.iter().all(|w| w.exponent >= 1e-3));
    }

    #[test]
    fn cherry_instance_is_cherry() {
        let r = classify(&map(instances::CHERRY), &quick());
        assert_eq!(r.kind, AttractorKind::CherryEvidence, "{:?}", r.evidence);
        let agree = r.evidence.iter().find(|c| c.name == "critical_limit_sets_agree").unwrap();
        assert!(agree.passed);
    }

    #[test]
    fn solenoid_instance() {
        let r = classify(&map(instances::SOLENOID), &quick());
        assert_eq!(r.kind, AttractorKind::SolenoidEvidence { depth: 3 });
        assert!(r.trapping.is_some());
        let nest = r.evidence.iter().find(|c| c.name == "nested_towards_c").unwrap();
        assert!(nest.passed);
    }

    #[test]
    fn critical_cover_inside_generic_cover() {
        for p in [instances::FULL, instances::ONCE_RENORMALIZABLE] {
            let r = classify(&map(p), &quick());
            let (g, k) = (r.generic_cover.unwrap(), r.critical_cover.unwrap());
            assert!(k.is_subset_of(&g.dilate(1)));
        }
    }
}

//! The standard contracting Lorenz family and the [`IntervalMap`] interface
//! shared by everything that can be iterated (the map itself, renormalized
//! views, rigid rotations used as test fixtures).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float;

/// Side of the critical point. `Left` means approach from below (`c-`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn letter(self) -> char {
        match self {
            Side::Left => 'L',
            Side::Right => 'R',
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

/// A point of `[0,1]` together with the side it is approached from. The side
/// only matters at the critical point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedPoint {
    pub x: f64,
    pub side: Side,
}

impl SignedPoint {
    /// Point with the default (left) resolution at the critical point.
    pub fn new(x: f64) -> Self {
        SignedPoint { x, side: Side::Left }
    }

    pub fn left(x: f64) -> Self {
        SignedPoint { x, side: Side::Left }
    }

    pub fn right(x: f64) -> Self {
        SignedPoint { x, side: Side::Right }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Two points closer than this are the same point.
    pub eps_point: f64,
    /// Points closer than this to `c` are the critical point.
    pub eps_critical: f64,
    /// Slack for comparing images.
    pub eps_value: f64,
    /// Bisection steps in branch inversion.
    pub max_bisect: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { eps_point: 1e-10, eps_critical: 1e-12, eps_value: 1e-9, max_bisect: 80 }
    }
}

impl Tolerances {
    pub fn check(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.eps_point) {
            return Err(Error::InvalidTolerances("eps_point must be positive"));
        }
        if !positive(self.eps_critical) {
            return Err(Error::InvalidTolerances("eps_critical must be positive"));
        }
        if !positive(self.eps_value) {
            return Err(Error::InvalidTolerances("eps_value must be positive"));
        }
        if self.max_bisect == 0 {
            return Err(Error::InvalidTolerances("max_bisect must be positive"));
        }
        if self.eps_critical > self.eps_point {
            return Err(Error::InvalidTolerances("eps_critical must not exceed eps_point"));
        }
        Ok(())
    }
}

/// The raw parameter bundle `(c, alpha, beta, v1, v0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v1: f64,
    pub v0: f64,
}

impl MapParams {
    pub const fn new(c: f64, alpha: f64, beta: f64, v1: f64, v0: f64) -> Self {
        MapParams { c, alpha, beta, v1, v0 }
    }
}

/// One violated parameter constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    CriticalPointRange,
    AlphaTooSmall,
    BetaTooSmall,
    V1Range,
    V0Range,
    CriticalValuesOrder,
}

impl Violation {
    pub fn message(self) -> &'static str {
        match self {
            Violation::CriticalPointRange => "c must lie in (0,1)",
            Violation::AlphaTooSmall => "alpha must exceed 1",
            Violation::BetaTooSmall => "beta must exceed 1",
            Violation::V1Range => "v1 must lie in (0,1]",
            Violation::V0Range => "v0 must lie in [0,1)",
            Violation::CriticalValuesOrder => "v0 must be less than v1",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub params: MapParams,
    pub violations: Vec<Violation>,
    /// `(f(c-), f(c+)) = (v1, v0)` for a valid map.
    pub critical_values: Option<(f64, f64)>,
    /// Both one-sided derivatives at `c` are zero.
    pub derivative_vanishes_at_c: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(|v| String::from(v.message())).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            f.write_str(v.message())?;
        }
        Ok(())
    }
}

/// Check the parameter constraints. Violations are collected, never raised.
pub fn validate(p: &MapParams) -> ValidationReport {
    let mut violations = Vec::new();
    if !(p.c > 0.0 && p.c < 1.0) {
        violations.push(Violation::CriticalPointRange);
    }
    if !(p.alpha > 1.0 && p.alpha.is_finite()) {
        violations.push(Violation::AlphaTooSmall);
    }
    if !(p.beta > 1.0 && p.beta.is_finite()) {
        violations.push(Violation::BetaTooSmall);
    }
    if !(p.v1 > 0.0 && p.v1 <= 1.0) {
        violations.push(Violation::V1Range);
    }
    if !(p.v0 >= 0.0 && p.v0 < 1.0) {
        violations.push(Violation::V0Range);
    }
    if !(p.v0 < p.v1) {
        violations.push(Violation::CriticalValuesOrder);
    }
    let valid = violations.is_empty();
    let derivative_vanishes_at_c = valid && {
        let m = StandardLorenzMap { p: *p, tol: Tolerances::default() };
        m.branch_derivative(Side::Left, p.c) == 0.0 && m.branch_derivative(Side::Right, p.c) == 0.0
    };
    ValidationReport {
        params: *p,
        violations,
        critical_values: if valid { Some((p.v1, p.v0)) } else { None },
        derivative_vanishes_at_c,
    }
}

/// Anything with two increasing branches on `[0,c)` and `(c,1]`.
///
/// Implementors supply the branches as functions on the closed half
/// intervals, with the critical value at `c`. Evaluation with one-sided
/// critical semantics and the other conveniences are provided.
pub trait IntervalMap {
    fn critical_point(&self) -> f64;

    fn tolerances(&self) -> &Tolerances;

    /// Branch `side` evaluated at `x`, with `x` clamped into the closed
    /// domain of the branch.
    fn branch(&self, side: Side, x: f64) -> f64;

    /// Derivative of branch `side` at `x` (zero at `c`).
    fn branch_derivative(&self, side: Side, x: f64) -> f64;

    /// Both branches have negative Schwarzian derivative, so the derivative
    /// of any branch composition takes its minimum at an endpoint.
    fn negative_schwarzian(&self) -> bool {
        false
    }

    /// `(f(x), 1 - f(x))` on branch `side`, given `q = 1 - x`. Maps that can
    /// compute the complement without cancellation near `1` override this.
    fn branch_pair(&self, side: Side, x: f64, q: f64) -> (f64, f64) {
        let _ = q;
        let y = self.branch(side, x);
        (y, 1.0 - y)
    }

    /// Closed image of each branch: `[f(0), f(c-)]` and `[f(c+), f(1)]`.
    fn branch_image(&self, side: Side) -> (f64, f64) {
        let c = self.critical_point();
        match side {
            Side::Left => (self.branch(Side::Left, 0.0), self.branch(Side::Left, c)),
            Side::Right => (self.branch(Side::Right, c), self.branch(Side::Right, 1.0)),
        }
    }

    /// Preimage of `y` under branch `side`, saturating at the ends of the
    /// branch domain when `y` lies outside the image.
    fn branch_preimage(&self, side: Side, y: f64) -> f64 {
        let c = self.critical_point();
        let (mut lo, mut hi) = match side {
            Side::Left => (0.0, c),
            Side::Right => (c, 1.0),
        };
        let (ylo, yhi) = self.branch_image(side);
        if y <= ylo {
            return lo;
        }
        if y >= yhi {
            return hi;
        }
        for _ in 0..self.tolerances().max_bisect {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.branch(side, mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn side_of(&self, x: f64) -> Side {
        if x < self.critical_point() {
            Side::Left
        } else {
            Side::Right
        }
    }

    fn is_critical(&self, x: f64) -> bool {
        (x - self.critical_point()).abs() <= self.tolerances().eps_critical
    }

    /// `f(p)`; within `eps_critical` of `c` this is the one-sided limit
    /// selected by `p.side`.
    fn evaluate(&self, p: SignedPoint) -> f64 {
        let c = self.critical_point();
        if (p.x - c).abs() <= self.tolerances().eps_critical {
            self.branch(p.side, c)
        } else if p.x < c {
            self.branch(Side::Left, p.x)
        } else {
            self.branch(Side::Right, p.x)
        }
    }

    /// `f(x)` with the left limit at the critical point.
    fn apply(&self, x: f64) -> f64 {
        self.evaluate(SignedPoint::left(x))
    }

    /// `(f(c-), f(c+))`.
    fn critical_values(&self) -> (f64, f64) {
        let c = self.critical_point();
        (self.branch(Side::Left, c), self.branch(Side::Right, c))
    }

    /// `|Df(x)|` on the branch containing `x`, zero near `c`.
    fn slope(&self, x: f64) -> f64 {
        if self.is_critical(x) {
            0.0
        } else {
            self.branch_derivative(self.side_of(x), x).abs()
        }
    }
}

impl<M: IntervalMap + ?Sized> IntervalMap for &M {
    fn critical_point(&self) -> f64 {
        (**self).critical_point()
    }
    fn tolerances(&self) -> &Tolerances {
        (**self).tolerances()
    }
    fn branch(&self, side: Side, x: f64) -> f64 {
        (**self).branch(side, x)
    }
    fn branch_derivative(&self, side: Side, x: f64) -> f64 {
        (**self).branch_derivative(side, x)
    }
    fn negative_schwarzian(&self) -> bool {
        (**self).negative_schwarzian()
    }
    fn branch_pair(&self, side: Side, x: f64, q: f64) -> (f64, f64) {
        (**self).branch_pair(side, x, q)
    }
    fn branch_image(&self, side: Side) -> (f64, f64) {
        (**self).branch_image(side)
    }
    fn branch_preimage(&self, side: Side, y: f64) -> f64 {
        (**self).branch_preimage(side, y)
    }
}

/// A validated member of the standard family. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardLorenzMap {
    p: MapParams,
    tol: Tolerances,
}

impl StandardLorenzMap {
    pub fn new(p: MapParams) -> Result<Self> {
        Self::with_tolerances(p, Tolerances::default())
    }

    pub fn with_tolerances(p: MapParams, tol: Tolerances) -> Result<Self> {
        let report = validate(&p);
        if !report.is_valid() {
            return Err(Error::InvalidMap(report));
        }
        tol.check()?;
        Ok(StandardLorenzMap { p, tol })
    }

    pub fn params(&self) -> &MapParams {
        &self.p
    }

    pub fn c(&self) -> f64 {
        self.p.c
    }

    /// `(u, scale, exponent, amplitude)` for the branch containing `x`:
    /// the branch is `amplitude * u^exponent` up to sign and offset, with
    /// `u` the normalized distance to `c`.
    #[inline]
    fn local(&self, side: Side, x: f64) -> (f64, f64, f64, f64) {
        let p = &self.p;
        match side {
            Side::Left => {
                let x = x.clamp(0.0, p.c);
                ((p.c - x) / p.c, 1.0 / p.c, p.alpha, p.v1)
            }
            Side::Right => {
                let x = x.clamp(p.c, 1.0);
                ((x - p.c) / (1.0 - p.c), 1.0 / (1.0 - p.c), p.beta, 1.0 - p.v0)
            }
        }
    }

    fn check_noncritical(&self, x: f64) -> Result<Side> {
        let d = (x - self.p.c).abs();
        if d < self.tol.eps_critical {
            return Err(Error::CriticalPointDerivative { distance: d });
        }
        Ok(if x < self.p.c { Side::Left } else { Side::Right })
    }

    /// First, second or third derivative of the active branch at `x`.
    pub fn derivative(&self, x: f64, order: u8) -> Result<f64> {
        let side = self.check_noncritical(x)?;
        let (u, k, e, a) = self.local(side, x);
        // left branch is a(1 - u^e) with du/dx = -k, right is v0 + a u^e
        // with du/dx = k; each derivative in x brings a factor of -k or k
        let sign = match side {
            Side::Left => -1.0,
            Side::Right => 1.0,
        };
        let lead = match side {
            Side::Left => -a,
            Side::Right => a,
        };
        match order {
            1 => Ok(lead * sign * k * e * float::powf(u, e - 1.0)),
            2 => Ok(lead * k * k * e * (e - 1.0) * float::powf(u, e - 2.0)),
            3 => Ok(lead * sign * k * k * k * e * (e - 1.0) * (e - 2.0) * float::powf(u, e - 3.0)),
            _ => Err(Error::InvalidArgument(alloc::format!(
                "derivative order must be 1, 2 or 3, got {order}"
            ))),
        }
    }

    /// `D3f/Df - 3/2 (D2f/Df)^2`.
    pub fn schwarzian(&self, x: f64) -> Result<f64> {
        let d1 = self.derivative(x, 1)?;
        let d2 = self.derivative(x, 2)?;
        let d3 = self.derivative(x, 3)?;
        Ok(d3 / d1 - 1.5 * (d2 / d1) * (d2 / d1))
    }

    /// Solve `f(x) = y` on one branch by monotone bisection. The supremum of
    /// each branch image is attained at `c`.
    pub fn invert_branch(&self, side: Side, y: f64) -> Result<f64> {
        let (lo, hi) = self.branch_image(side);
        let e = self.tol.eps_value;
        if !(y >= lo - e && y <= hi + e) {
            return Err(Error::ValueOutsideBranchImage { side, y, lo, hi });
        }
        let c = self.p.c;
        if (side == Side::Left && y >= hi) || (side == Side::Right && y <= lo) {
            return Ok(c);
        }
        let (mut a, mut b) = match side {
            Side::Left => (0.0, c),
            Side::Right => (c, 1.0),
        };
        for _ in 0..self.tol.max_bisect {
            let m = 0.5 * (a + b);
            if self.branch(side, m) < y {
                a = m;
            } else {
                b = m;
            }
            if b - a <= f64::EPSILON * b.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Closed-form branch inverse, saturating outside the image.
    fn closed_form_preimage(&self, side: Side, y: f64) -> f64 {
        let p = &self.p;
        match side {
            Side::Left => {
                if y <= 0.0 {
                    0.0
                } else if y >= p.v1 {
                    p.c
                } else {
                    // c (1 - (1 - y/v1)^(1/alpha)), written to keep precision near 0
                    let x = -p.c * float::exp_m1(float::ln_1p(-y / p.v1) / p.alpha);
                    x.clamp(0.0, p.c)
                }
            }
            Side::Right => {
                if y <= p.v0 {
                    p.c
                } else if y >= 1.0 {
                    1.0
                } else {
                    let s = float::powf((y - p.v0) / (1.0 - p.v0), 1.0 / p.beta);
                    (p.c + (1.0 - p.c) * s).clamp(p.c, 1.0)
                }
            }
        }
    }
}

/// Left branch value and `u^alpha`. Near `0` the value `1 - (1 - x/c)^alpha`
/// is formed without cancellation.
#[inline]
fn a_left(p: &MapParams, x: f64) -> (f64, f64) {
    let x = x.min(p.c);
    if x < 0.5 * p.c {
        let l = p.alpha * float::ln_1p(-x / p.c);
        (p.v1 * -float::exp_m1(l), float::exp_m1(l) + 1.0)
    } else {
        let w = float::powf((p.c - x) / p.c, p.alpha);
        (p.v1 * (1.0 - w), w)
    }
}

impl IntervalMap for StandardLorenzMap {
    #[inline]
    fn critical_point(&self) -> f64 {
        self.p.c
    }

    #[inline]
    fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    #[inline]
    fn branch(&self, side: Side, x: f64) -> f64 {
        let p = &self.p;
        match side {
            Side::Left => {
                if x <= 0.0 {
                    return 0.0;
                }
                a_left(p, x).0
            }
            Side::Right => {
                if x >= 1.0 {
                    return 1.0;
                }
                let (s, _, e, a) = self.local(side, x);
                p.v0 + a * float::powf(s, e)
            }
        }
    }

    #[inline]
    fn branch_derivative(&self, side: Side, x: f64) -> f64 {
        let (u, k, e, a) = self.local(side, x);
        a * k * e * float::powf(u, e - 1.0)
    }

    fn negative_schwarzian(&self) -> bool {
        true
    }

    fn branch_pair(&self, side: Side, x: f64, q: f64) -> (f64, f64) {
        let p = &self.p;
        match side {
            Side::Left => {
                if x <= 0.0 {
                    return (0.0, 1.0);
                }
                let (d, w) = a_left(p, x);
                (d, (1.0 - p.v1) + p.v1 * w)
            }
            Side::Right => {
                let q = q.clamp(0.0, 1.0 - p.c);
                let a = 1.0 - p.v0;
                if q < 0.5 * (1.0 - p.c) {
                    // 1 - s^beta with s = 1 - t, kept accurate for small t
                    let t = q / (1.0 - p.c);
                    let d = -float::exp_m1(p.beta * float::ln_1p(-t));
                    (1.0 - a * d, a * d)
                } else {
                    let (s, _, e, _) = self.local(side, x);
                    let w = float::powf(s, e);
                    (p.v0 + a * w, a * (1.0 - w))
                }
            }
        }
    }

    fn branch_image(&self, side: Side) -> (f64, f64) {
        match side {
            Side::Left => (0.0, self.p.v1),
            Side::Right => (self.p.v0, 1.0),
        }
    }

    fn branch_preimage(&self, side: Side, y: f64) -> f64 {
        self.closed_form_preimage(side, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fmap() -> StandardLorenzMap {
        StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0)).unwrap()
    }

    fn cmap() -> StandardLorenzMap {
        StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 0.2, 0.1)).unwrap()
    }

    #[test]
    fn validation_messages() {
        assert!(validate(&MapParams::new(0.5, 2.0, 2.0, 1.0, 0.0)).is_valid());
        let r = validate(&MapParams::new(0.5, 1.0, 2.0, 1.0, 0.0));
        assert_eq!(r.messages(), ["alpha must exceed 1"]);
        let r = validate(&MapParams::new(0.0, 2.0, 2.0, 1.0, 0.0));
        assert_eq!(r.messages(), ["c must lie in (0,1)"]);
        let r = validate(&MapParams::new(0.5, 2.0, 2.0, 0.3, 0.4));
        assert_eq!(r.violations, [Violation::CriticalValuesOrder]);
        let r = validate(&MapParams::new(f64::NAN, 0.5, 2.0, 1.5, 1.0));
        assert_eq!(r.violations.len(), 4);
        let ok = validate(&MapParams::new(0.3, 1.5, 3.0, 0.9, 0.2));
        assert_eq!(ok.critical_values, Some((0.9, 0.2)));
        assert!(ok.derivative_vanishes_at_c);
    }

    #[test]
    fn evaluation_examples() {
        let f = fmap();
        assert_eq!(f.evaluate(SignedPoint::new(0.25)), 0.75);
        assert_eq!(f.evaluate(SignedPoint::left(0.5)), 1.0);
        assert_eq!(f.evaluate(SignedPoint::right(0.5)), 0.0);
        assert!((cmap().apply(0.75) - 0.325).abs() < 1e-15);
        assert_eq!(cmap().apply(0.0), 0.0);
        assert_eq!(cmap().apply(1.0), 1.0);
    }

    #[test]
    fn derivative_examples() {
        let f = fmap();
        assert!((f.derivative(0.25, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!((f.derivative(0.75, 1).unwrap() - 2.0).abs() < 1e-12);
        assert!((f.derivative(0.25, 2).unwrap() + 8.0).abs() < 1e-12);
        assert!((f.derivative(0.75, 2).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(f.derivative(0.25, 3).unwrap(), 0.0);
        assert!(matches!(f.derivative(0.5, 1), Err(Error::CriticalPointDerivative { .. })));
        assert!(f.derivative(0.25, 4).is_err());
    }

    #[test]
    fn schwarzian_examples() {
        let f = fmap();
        assert!((f.schwarzian(0.25).unwrap() + 24.0).abs() < 1e-10);
        assert!((f.schwarzian(0.1).unwrap() + 9.375).abs() < 1e-10);
        // closed form for a pure power law: -(e^2 - 1) / (2 (c - x)^2)
        let g = StandardLorenzMap::new(MapParams::new(0.4, 3.0, 1.5, 0.8, 0.3)).unwrap();
        let x = 0.1;
        let want = -(9.0 - 1.0) / (2.0 * 0.3f64 * 0.3);
        assert!((g.schwarzian(x).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn inversion_examples() {
        let f = fmap();
        assert!((f.invert_branch(Side::Left, 0.75).unwrap() - 0.25).abs() < 1e-12);
        assert!((f.invert_branch(Side::Right, 0.25).unwrap() - 0.75).abs() < 1e-12);
        assert_eq!(f.invert_branch(Side::Left, 1.0).unwrap(), 0.5);
        assert!(matches!(
            cmap().invert_branch(Side::Right, 0.05),
            Err(Error::ValueOutsideBranchImage { side: Side::Right, .. })
        ));
        assert!(cmap().invert_branch(Side::Left, 0.2 + 1e-10).is_ok());
    }

    #[test]
    fn flatness_at_critical_point() {
        // the power-law bound v * max(a, b) * d * 2 / min(c, 1-c) at d = 1e-4
        // holds when both exponents are at least 2 and c = 1/2
        for &(a, b) in &[(2.0, 2.0), (2.5, 3.0), (4.0, 2.0)] {
            let f = StandardLorenzMap::new(MapParams::new(0.5, a, b, 0.9, 0.1)).unwrap();
            let d = 1e-4;
            let bound = 0.9 * f64::max(a, b) * d * 2.0 / 0.5;
            assert!(f.derivative(0.5 - d, 1).unwrap() <= bound);
            assert!(f.derivative(0.5 + d, 1).unwrap() <= bound);
        }
    }

    fn arb_params() -> impl Strategy<Value = MapParams> {
        (0.05f64..0.95, 1.05f64..6.0, 1.05f64..6.0, 0.0f64..1.0, 0.0f64..1.0).prop_filter_map(
            "v0 < v1",
            |(c, a, b, s, t)| {
                let v1 = 0.02 + 0.98 * s.max(t);
                let v0 = s.min(t) * 0.98;
                (v0 < v1).then_some(MapParams::new(c, a, b, v1, v0))
            },
        )
    }

    proptest! {
        #[test]
        fn monotone_on_each_branch(p in arb_params(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let f = StandardLorenzMap::new(p).unwrap();
            let (lo, hi) = if s < t { (s, t) } else { (t, s) };
            prop_assume!(hi - lo > 1e-9);
            let (x, y) = (lo * p.c, hi * p.c);
            prop_assert!(f.apply(x) <= f.apply(y));
            let (x, y) = (p.c + lo * (1.0 - p.c) + 1e-15, p.c + hi * (1.0 - p.c));
            prop_assert!(f.apply(x) <= f.apply(y));
        }

        #[test]
        fn inversion_round_trip(p in arb_params(), s in 0.0f64..=1.0, right in any::<bool>()) {
            let f = StandardLorenzMap::new(p).unwrap();
            let side = if right { Side::Right } else { Side::Left };
            let (lo, hi) = f.branch_image(side);
            let y = lo + s * (hi - lo);
            let x = f.invert_branch(side, y).unwrap();
            prop_assert!((f.branch(side, x) - y).abs() <= 1e-9);
            let x2 = f.branch_preimage(side, y);
            prop_assert!((f.branch(side, x2) - y).abs() <= 1e-9);
        }

        #[test]
        fn schwarzian_is_negative(p in arb_params(), s in 0.001f64..0.999) {
            let f = StandardLorenzMap::new(p).unwrap();
            let x = s;
            prop_assume!((x - p.c).abs() > 1e-6);
            prop_assert!(f.schwarzian(x).unwrap() < 0.0);
        }

        #[test]
        fn derivative_positive_off_c(p in arb_params(), s in 0.0f64..1.0) {
            let f = StandardLorenzMap::new(p).unwrap();
            prop_assume!((s - p.c).abs() > 1e-9);
            prop_assert!(f.derivative(s, 1).unwrap() > 0.0);
        }
    }
}

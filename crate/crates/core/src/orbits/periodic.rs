// Periodic orbits by itinerary.
//
// Words are stored as bit strings: bit i is letter i of the itinerary
// (0 = L, 1 = R). The domain D(w) of the branch composition f_w is built by
// prepending letters, D(x.s) = f_x^{-1}(D(s) ∩ im f_x), so one depth-first
// walk over suffix trees visits every admissible word once.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{IntervalMap, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stability {
    Attracting,
    Repelling,
    Neutral,
    SuperAttractor,
}

impl Stability {
    pub fn is_attractor(self) -> bool {
        matches!(self, Stability::Attracting | Stability::SuperAttractor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    /// Letters `L`/`R` of the points in orbit order.
    pub itinerary: String,
    pub points: Vec<f64>,
    pub period: usize,
    /// `|Df^period|` along the orbit.
    pub multiplier: f64,
    pub stability: Stability,
}

impl PeriodicOrbit {
    pub fn min_point(&self) -> f64 {
        self.points.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_point(&self) -> f64 {
        self.points.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest orbit point below `c` and smallest above it.
    pub fn nearest_to(&self, c: f64) -> (Option<f64>, Option<f64>) {
        let below = self.points.iter().copied().filter(|&x| x < c).fold(None, |m: Option<f64>, x| {
            Some(m.map_or(x, |m| m.max(x)))
        });
        let above = self.points.iter().copied().filter(|&x| x > c).fold(None, |m: Option<f64>, x| {
            Some(m.map_or(x, |m| m.min(x)))
        });
        (below, above)
    }

    /// Some orbit point lies in the open interval.
    pub fn meets(&self, lo: f64, hi: f64) -> bool {
        self.points.iter().any(|&x| x > lo && x < hi)
    }

    fn same_points(&self, other: &PeriodicOrbit, eps: f64) -> bool {
        if self.period != other.period {
            return false;
        }
        let mut a = self.points.clone();
        let mut b = other.points.clone();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= eps)
    }
}

#[inline]
fn letter(w: u64, i: usize) -> Side {
    if (w >> i) & 1 == 0 {
        Side::Left
    } else {
        Side::Right
    }
}

fn word_string(w: u64, n: usize) -> String {
    (0..n).map(|i| letter(w, i).letter()).collect()
}

#[inline]
fn rotate(w: u64, n: usize, k: usize) -> u64 {
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    ((w >> k) | (w << (n - k))) & mask
}

/// Lexicographic comparison reading letter 0 first.
fn lex_less(a: u64, b: u64, n: usize) -> bool {
    for i in 0..n {
        let (x, y) = ((a >> i) & 1, (b >> i) & 1);
        if x != y {
            return x < y;
        }
    }
    false
}

/// Primitive and strictly smallest among its rotations.
pub fn is_lyndon(w: u64, n: usize) -> bool {
    (1..n).all(|k| lex_less(w, rotate(w, n, k), n))
}

/// `f_w(x)` following the letters of `w`.
#[inline]
fn compose<M: IntervalMap + ?Sized>(f: &M, w: u64, n: usize, mut x: f64) -> f64 {
    for i in 0..n {
        x = f.branch(letter(w, i), x);
    }
    x
}

/// `f_w(x)` and `|Df_w(x)|`.
#[inline]
fn compose_slope<M: IntervalMap + ?Sized>(f: &M, w: u64, n: usize, mut x: f64) -> (f64, f64) {
    let mut d = 1.0;
    for i in 0..n {
        let s = letter(w, i);
        d *= f.branch_derivative(s, x);
        x = f.branch(s, x);
    }
    (x, d)
}

struct Search<'a, M: ?Sized> {
    f: &'a M,
    max_period: usize,
    found: Vec<PeriodicOrbit>,
    index: BTreeSet<(usize, u64, usize)>,
}

impl<M: IntervalMap + ?Sized> Search<'_, M> {
    fn walk(&mut self, w: u64, n: usize, lo: f64, hi: f64) {
        if is_lyndon(w, n) {
            self.solve(w, n, lo, hi);
        }
        if n == self.max_period {
            return;
        }
        for side in [Side::Left, Side::Right] {
            let (ylo, yhi) = self.f.branch_image(side);
            let (a, b) = (lo.max(ylo), hi.min(yhi));
            if a > b {
                continue;
            }
            let child = (w << 1) | (side == Side::Right) as u64;
            let (pa, pb) = (self.f.branch_preimage(side, a), self.f.branch_preimage(side, b));
            self.walk(child, n + 1, pa, pb);
        }
    }

    fn solve(&mut self, w: u64, n: usize, lo: f64, hi: f64) {
        let tol = *self.f.tolerances();
        let (f_lo, d_lo) = compose_slope(self.f, w, n, lo);
        let (f_hi, d_hi) = compose_slope(self.f, w, n, hi);
        // f_w is increasing, so its image is [f_w(lo), f_w(hi)]
        if f_lo > hi + tol.eps_value || f_hi < lo - tol.eps_value {
            return;
        }
        let (h_lo, h_hi) = (f_lo - lo, f_hi - hi);
        let mut roots: Vec<f64> = Vec::new();
        if self.f.negative_schwarzian() && d_lo > 1.0 && d_hi > 1.0 {
            // the slope is smallest at an endpoint, so f_w - id is strictly
            // increasing and has at most one zero
            if h_lo == 0.0 {
                roots.push(lo);
            } else if h_hi == 0.0 {
                roots.push(hi);
            } else if h_lo < 0.0 && h_hi > 0.0 {
                roots.push(self.bisect(w, n, lo, hi, true));
            }
        } else {
            self.scan(w, n, lo, hi, h_lo, h_hi, &mut roots);
        }
        for x in roots {
            if let Some(o) = self.orbit_from(w, n, x) {
                self.push(o);
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn scan(&self, w: u64, n: usize, lo: f64, hi: f64, h_lo: f64, h_hi: f64, roots: &mut Vec<f64>) {
        const SCAN: usize = 64;
        let mut prev_x = lo;
        let mut prev_h = h_lo;
        if h_lo == 0.0 {
            roots.push(lo);
        }
        for i in 1..SCAN {
            let x = if i == SCAN - 1 { hi } else { lo + (hi - lo) * i as f64 / (SCAN - 1) as f64 };
            let h = if i == SCAN - 1 { h_hi } else { compose(self.f, w, n, x) - x };
            if h == 0.0 {
                roots.push(x);
            } else if prev_h != 0.0 && (prev_h < 0.0) != (h < 0.0) {
                roots.push(self.bisect(w, n, prev_x, x, prev_h < 0.0));
            }
            prev_x = x;
            prev_h = h;
        }
    }

    fn bisect(&self, w: u64, n: usize, mut a: f64, mut b: f64, rising: bool) -> f64 {
        for _ in 0..self.f.tolerances().max_bisect {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let h = compose(self.f, w, n, m) - m;
            if (h < 0.0) == rising {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn orbit_from(&self, w: u64, n: usize, x: f64) -> Option<PeriodicOrbit> {
        let tol = self.f.tolerances();
        let c = self.f.critical_point();
        let mut points = Vec::with_capacity(n);
        let mut y = x;
        let mut multiplier = 1.0;
        let mut critical = false;
        for i in 0..n {
            let side = letter(w, i);
            if (y - c).abs() <= tol.eps_critical {
                critical = true;
            } else if self.f.side_of(y) != side {
                return None;
            }
            points.push(y);
            multiplier *= self.f.branch_derivative(side, y).abs();
            y = self.f.branch(side, y);
        }
        if (y - x).abs() > tol.eps_value {
            return None;
        }
        Some(PeriodicOrbit {
            itinerary: word_string(w, n),
            points,
            period: n,
            multiplier: if critical { 0.0 } else { multiplier },
            stability: classify(multiplier, critical, tol.eps_value),
        })
    }

    fn push(&mut self, o: PeriodicOrbit) {
        let eps = self.f.tolerances().eps_point;
        // orbit points are non-negative, so bit patterns order like values
        let m = o.min_point();
        let lo = (o.period, (m - eps).max(0.0).to_bits(), 0);
        let hi = (o.period, (m + eps).to_bits(), usize::MAX);
        let hit = self
            .index
            .range(lo..=hi)
            .map(|&(_, _, i)| i)
            .find(|&i| self.found[i].same_points(&o, eps));
        if let Some(i) = hit {
            // keep the super-attracting reading of an orbit through c
            if o.stability == Stability::SuperAttractor {
                self.found[i] = o;
            }
            return;
        }
        self.index.insert((o.period, m.max(0.0).to_bits(), self.found.len()));
        self.found.push(o);
    }

    /// Orbits of `c-` and `c+` returning to `c` within the period bound.
    fn critical_returns(&mut self) {
        let f = self.f;
        let c = f.critical_point();
        let tol = *f.tolerances();
        for side in [Side::Left, Side::Right] {
            let mut points = alloc::vec![c];
            let mut sides = alloc::vec![side];
            let mut y = f.branch(side, c);
            for _ in 1..self.max_period {
                if (y - c).abs() <= tol.eps_critical {
                    let n = points.len();
                    let w = sides
                        .iter()
                        .enumerate()
                        .fold(0u64, |acc, (i, s)| acc | (((*s == Side::Right) as u64) << i));
                    // rotate to the smallest rotation for a canonical start
                    let k = (0..n).min_by(|&a, &b| {
                        let (ra, rb) = (rotate(w, n, a), rotate(w, n, b));
                        if lex_less(ra, rb, n) {
                            core::cmp::Ordering::Less
                        } else if lex_less(rb, ra, n) {
                            core::cmp::Ordering::Greater
                        } else {
                            core::cmp::Ordering::Equal
                        }
                    });
                    let k = k.unwrap_or(0);
                    let mut pts = points.clone();
                    pts.rotate_left(k);
                    self.push(PeriodicOrbit {
                        itinerary: word_string(rotate(w, n, k), n),
                        points: pts,
                        period: n,
                        multiplier: 0.0,
                        stability: Stability::SuperAttractor,
                    });
                    break;
                }
                let s = f.side_of(y);
                points.push(y);
                sides.push(s);
                y = f.branch(s, y);
            }
        }
    }
}

fn classify(multiplier: f64, critical: bool, eps: f64) -> Stability {
    if critical {
        Stability::SuperAttractor
    } else if multiplier < 1.0 - eps {
        Stability::Attracting
    } else if multiplier > 1.0 + eps {
        Stability::Repelling
    } else {
        Stability::Neutral
    }
}

/// All periodic orbits of period `<= max_period`, one per cyclic itinerary
/// class, sorted by period and then by smallest point.
pub fn periodic_orbits<M: IntervalMap + ?Sized>(f: &M, max_period: usize) -> Vec<PeriodicOrbit> {
    let max_period = max_period.clamp(1, 63);
    let mut s = Search { f, max_period, found: Vec::new(), index: BTreeSet::new() };
    let c = f.critical_point();
    s.walk(0, 1, 0.0, c);
    s.walk(1, 1, c, 1.0);
    s.critical_returns();
    let mut found = s.found;
    found.sort_by(|a, b| a.period.cmp(&b.period).then(a.min_point().total_cmp(&b.min_point())));
    found
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimalPeriodOrbit {
    pub orbit: PeriodicOrbit,
    /// No other orbit of the same period meets the window.
    pub unique: bool,
    pub competitors: Vec<PeriodicOrbit>,
}

/// The periodic orbit of least period meeting `(c - eps, c)` (left) or
/// `(c, c + eps)` (right).
pub fn minimal_period_orbit<M: IntervalMap + ?Sized>(
    f: &M,
    side: Side,
    eps: f64,
    max_period: usize,
) -> Result<MinimalPeriodOrbit> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("window size must be positive, got {eps}")));
    }
    let c = f.critical_point();
    let (lo, hi) = match side {
        Side::Left => (c - eps, c),
        Side::Right => (c, c + eps),
    };
    let mut hits: Vec<PeriodicOrbit> =
        periodic_orbits(f, max_period).into_iter().filter(|o| o.meets(lo, hi)).collect();
    let Some(p) = hits.iter().map(|o| o.period).min() else {
        return Err(Error::NoPeriodicOrbitInWindow { max_period });
    };
    hits.retain(|o| o.period == p);
    let orbit = hits.remove(0);
    Ok(MinimalPeriodOrbit { orbit, unique: hits.is_empty(), competitors: hits })
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
    fn lyndon_words() {
        // L = 0, R = 1, letter 0 in bit 0
        assert!(is_lyndon(0b0, 1) && is_lyndon(0b1, 1));
        assert!(is_lyndon(0b10, 2)); // LR
        assert!(!is_lyndon(0b01, 2)); // RL
        assert!(!is_lyndon(0b00, 2));
        assert!(is_lyndon(0b110, 3) && is_lyndon(0b100, 3));
        assert!(!is_lyndon(0b1010, 4));
        // number of Lyndon words of length 6 over two letters is 9
        assert_eq!((0u64..64).filter(|&w| is_lyndon(w, 6)).count(), 9);
    }

    #[test]
    fn full_map_orbits() {
        let o = periodic_orbits(&fmap(), 2);
        assert_eq!(o.len(), 3);
        assert_eq!(o[0].points, [0.0]);
        assert_eq!(o[1].points, [1.0]);
        assert_eq!(o[2].itinerary, "LR");
        assert!((o[2].points[0] - 0.25).abs() < 1e-12 && (o[2].points[1] - 0.75).abs() < 1e-12);
        for p in &o {
            assert!((p.multiplier - 4.0).abs() < 1e-8);
            assert_eq!(p.stability, Stability::Repelling);
        }
    }

    #[test]
    fn full_map_counts() {
        // the full map realises every primitive cyclic word once
        let o = periodic_orbits(&fmap(), 8);
        let lyndon: usize = (1..=8).map(|n| (0u64..1 << n).filter(|&w| is_lyndon(w, n)).count()).sum();
        assert_eq!(o.len(), lyndon);
    }

    #[test]
    fn contracting_map_orbits() {
        let o = periodic_orbits(&cmap(), 1);
        assert_eq!(o.len(), 2);
        assert_eq!(o[0].points, [0.0]);
        assert!((o[0].multiplier - 0.8).abs() < 1e-12);
        assert_eq!(o[0].stability, Stability::Attracting);
        assert!((o[1].multiplier - 3.6).abs() < 1e-12);
        assert_eq!(o[1].stability, Stability::Repelling);
        assert_eq!(periodic_orbits(&cmap(), 8).len(), 2);
    }

    #[test]
    fn super_attractor_found() {
        // v1 = c makes c- a fixed point of the left branch after one step
        // only if f(c-) = c; choose v1 = c
        let f = StandardLorenzMap::new(MapParams::new(0.5, 2.0, 2.0, 0.5, 0.1)).unwrap();
        let o = periodic_orbits(&f, 4);
        let sup: Vec<_> = o.iter().filter(|p| p.stability == Stability::SuperAttractor).collect();
        assert_eq!(sup.len(), 1);
        assert_eq!(sup[0].period, 1);
        assert_eq!(sup[0].points, [0.5]);
    }

    #[test]
    fn minimal_period_examples() {
        let m = minimal_period_orbit(&fmap(), Side::Left, 0.3, 6).unwrap();
        assert_eq!(m.orbit.period, 2);
        assert!(m.unique);
        let m = minimal_period_orbit(&fmap(), Side::Right, 0.3, 6).unwrap();
        assert_eq!(m.orbit.period, 2);
        assert!(matches!(
            minimal_period_orbit(&cmap(), Side::Left, 0.5, 4),
            Err(Error::NoPeriodicOrbitInWindow { max_period: 4 })
        ));
    }

    #[test]
    fn orbits_close_and_match_itinerary() {
        let f = StandardLorenzMap::new(MapParams::new(0.47, 2.3, 1.8, 0.93, 0.08)).unwrap();
        for o in periodic_orbits(&f, 10) {
            let n = o.period;
            let mut prod = 1.0;
            for k in 0..n {
                let x = o.points[k];
                let y = o.points[(k + 1) % n];
                assert!((f.apply(x) - y).abs() <= 1e-9 || o.stability == Stability::SuperAttractor);
                let letter = o.itinerary.as_bytes()[k] as char;
                assert!(f.is_critical(x) || f.side_of(x).letter() == letter);
                prod *= f.branch_derivative(f.side_of(x), x).abs();
            }
            if o.stability != Stability::SuperAttractor {
                assert!((prod - o.multiplier).abs() <= 1e-8 * prod.max(1.0));
            }
        }
    }
}

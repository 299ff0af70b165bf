//! Closed-form evaluation of the replicator family `f_{a,b}`, its conjugate
//! `g_{a,b}` on the real line, and the generic family `h⁻¹(h(x) + a(x − b))`.
//!
//! The replicator map is
//!
//! ```text
//! f(x) = x / (x + (1 − x) e^{a(x − b)})
//! ```
//!
//! and is never evaluated in that form: with the logit `h(x) = ln((1 − x)/x)`
//! it equals `1 / (1 + e^u)` for `u = h(x) + a(x − b)`, which stays finite for
//! any `a`. The conjugate is `g(y) = y + a/(e^y + 1) − ab = h ∘ f ∘ h⁻¹`.
//!
//! The three-parameter form of the replicator map (with `C`, `V`, `γ`) reduces
//! to this one with `a = Cγ/2` and `b = V/C`; only `(a, b)` is implemented.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

/// Parameters `(a, b)` of the replicator family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    a: f64,
    b: f64,
}

impl MapParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParams(format!("a must be positive, got {a}")));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParams(format!("b must lie in (0, 1), got {b}")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `a ≤ 4`: `f` has no interior critical points.
    pub fn is_monotone(&self) -> bool {
        self.a <= 4.0
    }

    /// Parameters of the mirrored map `f_{a,1−b}`.
    pub fn mirrored(&self) -> Self {
        Self { a: self.a, b: 1.0 - self.b }
    }

    /// The value of `a` at which the interior fixed point loses stability.
    pub fn stability_threshold(&self) -> f64 {
        2.0 / (self.b * (1.0 - self.b))
    }
}

impl fmt::Display for MapParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(a={}, b={})", self.a, self.b)
    }
}

/// Which coordinate system a map lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// `f_{a,b}` on `[0, 1]`.
    Replicator,
    /// `g_{a,b}` on the real line.
    Conjugate,
}

// ---------------------------------------------------------------------------
// logistic helpers

/// `1 / (1 + e^{-t})` without overflow.
#[inline]
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// The logit coordinate change `h(x) = ln((1 − x)/x)`.
#[inline]
pub fn logit(x: f64) -> f64 {
    if x < 0.5 {
        (-x).ln_1p() - x.ln()
    } else {
        (1.0 - x).ln() - (x - 1.0).ln_1p()
    }
}

/// `h⁻¹(y) = 1/(e^y + 1)`.
#[inline]
pub fn logit_inv(y: f64) -> f64 {
    sigmoid(-y)
}

/// `h` evaluated from a point and its complement `1 − x`, both carried with
/// full relative accuracy.
#[inline]
pub fn logit_pair(x: f64, complement: f64) -> f64 {
    complement.ln() - x.ln()
}

#[inline]
fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { x, lo: 0.0, hi: 1.0 })
    }
}

// ---------------------------------------------------------------------------
// replicator map

/// `f_{a,b}(x)`.
pub fn eval_f(p: &MapParams, x: f64) -> Result<f64> {
    Ok(eval_f_pair(p, x)?.0)
}

/// `(f(x), 1 − f(x))`, each to full relative accuracy.
///
/// Near `x = 1` an `f64` cannot hold `1 − f(x)`, so callers that need the
/// logit of the image should use the complement returned here.
pub fn eval_f_pair(p: &MapParams, x: f64) -> Result<(f64, f64)> {
    check_unit(x)?;
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == 1.0 {
        return Ok((1.0, 0.0));
    }
    let shift = p.a * (x - p.b);
    if shift == 0.0 {
        return Ok((x, 1.0 - x));
    }
    let u = logit(x) + shift;
    Ok((sigmoid(-u), sigmoid(u)))
}

/// `f'_{a,b}(x)`.
///
/// For interior points this is `f(1 − f)(1 − a x(1 − x)) / (x(1 − x))`, the
/// closed form rewritten without the exponential.
pub fn eval_f_prime(p: &MapParams, x: f64) -> Result<f64> {
    check_unit(x)?;
    if x == 0.0 {
        return Ok((p.a * p.b).exp());
    }
    if x == 1.0 {
        return Ok((p.a * (1.0 - p.b)).exp());
    }
    let (f, fc) = eval_f_pair(p, x)?;
    let q = x * (1.0 - x);
    Ok(f * fc * (1.0 - p.a * q) / q)
}

/// `f''_{a,b}(x)` for interior `x`.
pub fn eval_f_second(p: &MapParams, x: f64) -> Result<f64> {
    interior(x)?;
    let (f, fc) = eval_f_pair(p, x)?;
    let q = x * (1.0 - x);
    let c = 1.0 - p.a * q;
    let s = 1.0 - 2.0 * x;
    Ok(f * fc / q * ((1.0 - 2.0 * f) * c * c / q - c * s / q - p.a * s))
}

fn interior(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { x, lo: 0.0, hi: 1.0 })
    }
}

// ---------------------------------------------------------------------------
// conjugate map on the line

/// `g_{a,b}(y) = y + a/(e^y + 1) − ab`.
pub fn eval_g(p: &MapParams, y: f64) -> f64 {
    y + p.a * sigmoid(-y) - p.a * p.b
}

/// `g'(y) = 1 − a e^y/(e^y + 1)²`.
pub fn eval_g_prime(p: &MapParams, y: f64) -> f64 {
    1.0 - p.a * sigmoid(y) * sigmoid(-y)
}

/// `g''(y) = a e^y (e^y − 1)/(e^y + 1)³`.
pub fn eval_g_second(p: &MapParams, y: f64) -> f64 {
    let s = sigmoid(y);
    let sc = sigmoid(-y);
    p.a * s * sc * (s - sc)
}

// ---------------------------------------------------------------------------
// generic generator h

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Inverse {
    Closed(RealFn),
    /// Bisection over `[lo, hi]` followed by Newton polish.
    Numeric { lo: f64, hi: f64 },
}

/// A strictly monotone generator `h` on an open interval, used to build maps
/// `f_h(x) = h⁻¹(h(x) + a(x − b))`. Every such map has `b` as the mean of
/// all its periodic orbits.
#[derive(Clone)]
pub struct GeneratorH {
    name: String,
    forward: RealFn,
    derivative: RealFn,
    inverse: Inverse,
    domain: (f64, f64),
    range: (f64, f64),
}

impl fmt::Debug for GeneratorH {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorH")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("range", &self.range)
            .finish()
    }
}

/// Tolerance for numeric inversion of a generator.
pub const INVERSION_TOL: f64 = 1e-13;

impl GeneratorH {
    /// `h(x) = ln((1 − x)/x)` on `(0, 1)`; reproduces `f_{a,b}`.
    pub fn logit() -> Self {
        Self {
            name: "logit".into(),
            forward: Arc::new(logit),
            derivative: Arc::new(|x| -1.0 / (x * (1.0 - x))),
            inverse: Inverse::Closed(Arc::new(logit_inv)),
            domain: (0.0, 1.0),
            range: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `h(x) = −ln x` on `(0, ∞)`; with `a = 1` gives `x ↦ e^b x e^{−x}`.
    pub fn neg_log() -> Self {
        Self {
            name: "neg_log".into(),
            forward: Arc::new(|x: f64| -x.ln()),
            derivative: Arc::new(|x| -1.0 / x),
            inverse: Inverse::Closed(Arc::new(|y: f64| (-y).exp())),
            domain: (0.0, f64::INFINITY),
            range: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `h(x) = −tan x` on `(−π/2, π/2)`; gives `x ↦ arctan(tan x − a(x − b))`.
    pub fn neg_tan() -> Self {
        Self {
            name: "neg_tan".into(),
            forward: Arc::new(|x: f64| -x.tan()),
            derivative: Arc::new(|x: f64| {
                let c = x.cos();
                -1.0 / (c * c)
            }),
            inverse: Inverse::Closed(Arc::new(|y: f64| -y.atan())),
            domain: (-FRAC_PI_2, FRAC_PI_2),
            range: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// A generator known only through `h` and `h'`, inverted numerically on
    /// the declared bracket `[lo, hi]` (which is also its working domain).
    pub fn numeric<F, D>(name: &str, forward: F, derivative: D, lo: f64, hi: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo < hi) {
            return Err(Error::InvalidParams(format!("empty bracket [{lo}, {hi}]")));
        }
        let (h_lo, h_hi) = (forward(lo), forward(hi));
        if !(h_lo.is_finite() && h_hi.is_finite()) || h_lo == h_hi {
            return Err(Error::InvalidParams(format!(
                "generator {name} is not strictly monotone on [{lo}, {hi}]"
            )));
        }
        Ok(Self {
            name: name.into(),
            forward: Arc::new(forward),
            derivative: Arc::new(derivative),
            inverse: Inverse::Numeric { lo, hi },
            domain: (lo, hi),
            range: (h_lo.min(h_hi), h_lo.max(h_hi)),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn h(&self, x: f64) -> f64 {
        (self.forward)(x)
    }

    pub fn h_prime(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn h_inv(&self, y: f64) -> Result<f64> {
        let (lo, hi) = self.range;
        let inside = match self.inverse {
            Inverse::Closed(_) => y > lo && y < hi,
            Inverse::Numeric { .. } => y >= lo && y <= hi,
        };
        if !inside || y.is_nan() {
            return Err(Error::Range { y, lo, hi });
        }
        match &self.inverse {
            Inverse::Closed(inv) => Ok(inv(y)),
            Inverse::Numeric { lo, hi } => roots::solve_monotone(
                |x| (self.forward)(x),
                |x| (self.derivative)(x),
                *lo,
                *hi,
                y,
            ),
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain;
        let ok = match self.inverse {
            Inverse::Closed(_) => x > lo && x < hi,
            Inverse::Numeric { .. } => x >= lo && x <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain { x, lo, hi })
        }
    }
}

/// `f_h(x) = h⁻¹(h(x) + a(x − b))`.
pub fn eval_fh(gen: &GeneratorH, a: f64, b: f64, x: f64) -> Result<f64> {
    gen.check_domain(x)?;
    let shift = a * (x - b);
    if shift == 0.0 {
        return Ok(x);
    }
    gen.h_inv(gen.h(x) + shift)
}

/// `f_h'(x) = (h'(x) + a) / h'(f_h(x))`.
pub fn eval_fh_prime(gen: &GeneratorH, a: f64, b: f64, x: f64) -> Result<f64> {
    let fx = eval_fh(gen, a, b, x)?;
    Ok((gen.h_prime(x) + a) / gen.h_prime(fx))
}

// ---------------------------------------------------------------------------
// fixed points, critical points, stability

/// Stability class of a fixed point or cycle, from its multiplier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Superstable,
    Stable,
    Neutral,
    Unstable,
}

/// Half-width of the band around `|multiplier| = 1` classified as neutral.
pub const NEUTRAL_BAND: f64 = 1e-6;

/// Multipliers below this magnitude count as superstable.
pub const SUPERSTABLE_TOL: f64 = 1e-12;

impl Stability {
    pub fn from_multiplier(m: f64) -> Self {
        let r = m.abs();
        if r <= SUPERSTABLE_TOL {
            Stability::Superstable
        } else if (r - 1.0).abs() <= NEUTRAL_BAND {
            Stability::Neutral
        } else if r < 1.0 {
            Stability::Stable
        } else {
            Stability::Unstable
        }
    }

    pub fn is_attracting(self) -> bool {
        matches!(self, Stability::Superstable | Stability::Stable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub kind: MapKind,
    pub points: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub stability: Vec<Stability>,
}

/// Fixed points with their multipliers: `{0, b, 1}` for `f`, `{ln((1−b)/b)}`
/// for `g`.
pub fn fixed_points(p: &MapParams, kind: MapKind) -> FixedPointReport {
    let (a, b) = (p.a, p.b);
    let interior = 1.0 - a * b * (1.0 - b);
    let (points, multipliers) = match kind {
        MapKind::Replicator => (
            vec![0.0, b, 1.0],
            vec![(a * b).exp(), interior, (a * (1.0 - b)).exp()],
        ),
        MapKind::Conjugate => (vec![logit(b)], vec![interior]),
    };
    let stability = multipliers.iter().map(|&m| Stability::from_multiplier(m)).collect();
    FixedPointReport { kind, points, multipliers, stability }
}

/// The two critical points; `low` is the local maximum, `high` the local
/// minimum, in both coordinate systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub low: f64,
    pub high: f64,
}

pub fn critical_points(p: &MapParams, kind: MapKind) -> Result<CriticalPoints> {
    let a = p.a;
    if a <= 4.0 {
        return Err(Error::NoCriticalPoints { a });
    }
    Ok(match kind {
        MapKind::Replicator => {
            let x_min = 0.5 + (0.25 - 1.0 / a).sqrt();
            // x_max via the product x_min x_max = 1/a avoids cancellation
            CriticalPoints { low: (1.0 / a) / x_min, high: x_min }
        }
        MapKind::Conjugate => {
            // e^{y_min} and e^{y_max} are the roots of t² − (a − 2)t + 1
            let y_min = (0.5 * a - 1.0 + (0.25 * a * a - a).sqrt()).ln();
            CriticalPoints { low: -y_min, high: y_min }
        }
    })
}

/// `[f_min, f_max]`, images of the two critical points. Every interior orbit
/// eventually enters it.
pub fn absorbing_interval(p: &MapParams) -> Result<(f64, f64)> {
    let c = critical_points(p, MapKind::Replicator)?;
    Ok((eval_f(p, c.high)?, eval_f(p, c.low)?))
}

// ---------------------------------------------------------------------------
// Schwarzian derivative

/// Pieces of `R = f''/f'` and its derivative, all closed form.
fn schwarzian_parts(p: &MapParams, x: f64) -> Result<(f64, f64)> {
    let a = p.a;
    let (f, fc) = eval_f_pair(p, x)?;
    let q = x * (1.0 - x);
    let c = 1.0 - a * q;
    let s = 1.0 - 2.0 * x;
    if c.abs() <= 8.0 * f64::EPSILON {
        return Err(Error::SingularAtCritical { x });
    }
    let fp = f * fc * c / q;
    // R = (1 − 2f) P − Q − T with P = c/q, Q = s/q, T = a s / c
    let big_p = c / q;
    let big_q = s / q;
    let big_t = a * s / c;
    let r = (1.0 - 2.0 * f) * big_p - big_q - big_t;
    let dp = -s / (q * q);
    let dq = -(1.0 - 2.0 * q) / (q * q);
    let dt = (a * a * s * s - 2.0 * a * c) / (c * c);
    let dr = -2.0 * fp * big_p + (1.0 - 2.0 * f) * dp - dq - dt;
    Ok((r, dr))
}

/// `Sf(x) = (f''/f')' − ½ (f''/f')²` for `x ∈ (0, 1)`.
pub fn schwarzian(p: &MapParams, x: f64) -> Result<f64> {
    interior(x)?;
    let (r, dr) = schwarzian_parts(p, x)?;
    Ok(dr - 0.5 * r * r)
}

/// Schwarzian with `(f''/f')'` taken by a Richardson-extrapolated central
/// difference of the closed-form `f''/f'` (step `1e-4`).
pub fn schwarzian_numeric(p: &MapParams, x: f64) -> Result<f64> {
    interior(x)?;
    let ratio = |t: f64| -> Result<f64> { Ok(schwarzian_parts(p, t)?.0) };
    let h = 1e-4_f64.min(0.25 * x.min(1.0 - x));
    let d = |h: f64| -> Result<f64> { Ok((ratio(x + h)? - ratio(x - h)?) / (2.0 * h)) };
    let d1 = d(h)?;
    let d2 = d(0.5 * h)?;
    let dr = (4.0 * d2 - d1) / 3.0;
    let r = ratio(x)?;
    Ok(dr - 0.5 * r * r)
}

// ---------------------------------------------------------------------------
// conjugacy and symmetry residuals

/// `sup |h(f(x)) − g(h(x))|` over `grid` with the logit `h`.
pub fn conjugacy_residual(p: &MapParams, grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &x in grid {
        interior(x)?;
        let (fx, fxc) = eval_f_pair(p, x)?;
        let lhs = logit_pair(fx, fxc);
        let rhs = eval_g(p, logit(x));
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `sup |f_{a,1−b}(x) − (1 − f_{a,b}(1 − x))|` over `grid`.
pub fn symmetry_residual(p: &MapParams, grid: &[f64]) -> Result<f64> {
    let m = p.mirrored();
    let mut worst = 0.0_f64;
    for &x in grid {
        let lhs = eval_f(&m, x)?;
        let rhs = 1.0 - eval_f(p, 1.0 - x)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `n` evenly spaced points covering `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> MapParams {
        MapParams::new(a, b).unwrap()
    }

    #[test]
    fn params_are_validated() {
        assert!(MapParams::new(0.0, 0.5).is_err());
        assert!(MapParams::new(-1.0, 0.5).is_err());
        assert!(MapParams::new(8.0, 0.0).is_err());
        assert!(MapParams::new(8.0, 1.0).is_err());
        assert!(MapParams::new(f64::NAN, 0.5).is_err());
        assert!(p(4.0, 0.3).is_monotone());
        assert!(!p(4.0001, 0.3).is_monotone());
    }

    #[test]
    fn fixed_points_are_exact() {
        let q = p(8.0, 1.0 / 3.0);
        assert_eq!(eval_f(&q, 1.0 / 3.0).unwrap(), 1.0 / 3.0);
        for params in [p(8.0, 0.2), p(1000.0, 0.7), p(0.5, 0.01)] {
            assert_eq!(eval_f(&params, 0.0).unwrap(), 0.0);
            assert_eq!(eval_f(&params, 1.0).unwrap(), 1.0);
            assert_eq!(eval_f(&params, params.b()).unwrap(), params.b());
        }
    }

    #[test]
    fn domain_errors() {
        let q = p(8.0, 0.3);
        assert!(matches!(eval_f(&q, 1.5), Err(Error::Domain { .. })));
        assert!(matches!(eval_f(&q, -1e-9), Err(Error::Domain { .. })));
        assert!(eval_f_prime(&q, f64::NAN).is_err());
    }

    #[test]
    fn large_a_does_not_overflow() {
        let q = p(1000.0, 0.3);
        for x in uniform_grid(0.0, 1.0, 101) {
            let v = eval_f(&q, x).unwrap();
            assert!((0.0..=1.0).contains(&v), "f({x}) = {v}");
            assert!(eval_f_prime(&q, x).unwrap().is_finite());
        }
    }

    #[test]
    fn agrees_with_naive_formula() {
        let q = p(8.0, 1.0 / 3.0);
        for x in uniform_grid(0.01, 0.99, 50) {
            let naive = x / (x + (1.0 - x) * (8.0 * (x - 1.0 / 3.0)).exp());
            assert!((eval_f(&q, x).unwrap() - naive).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_generic_generator_form() {
        let q = p(8.0, 1.0 / 3.0);
        let x = 0.9;
        let cross = logit_inv(logit(x) + 8.0 * (x - 1.0 / 3.0));
        assert!((eval_f(&q, x).unwrap() - cross).abs() < 1e-12);
        let g = GeneratorH::logit();
        assert_eq!(eval_fh(&g, 8.0, 1.0 / 3.0, 0.5).unwrap(), eval_f(&q, 0.5).unwrap());
    }

    #[test]
    fn derivative_values() {
        let q = p(8.0, 1.0 / 3.0);
        let d0 = eval_f_prime(&q, 0.0).unwrap();
        assert!((d0 - (8.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!((d0 - 14.391916095149892).abs() < 1e-9);
        let db = eval_f_prime(&q, 1.0 / 3.0).unwrap();
        assert!((db + 7.0 / 9.0).abs() < 1e-12);
        let c = critical_points(&q, MapKind::Replicator).unwrap();
        assert!(eval_f_prime(&q, c.low).unwrap().abs() < 1e-12);
        assert!(eval_f_prime(&q, c.high).unwrap().abs() < 1e-12);
    }

    #[test]
    fn derivative_matches_central_difference() {
        for (a, b) in [(8.0, 1.0 / 3.0), (30.0, 0.25), (4.5, 0.5)] {
            let q = p(a, b);
            for x in uniform_grid(1e-3, 1.0 - 1e-3, 1000) {
                let h = 1e-6;
                let fd = (eval_f(&q, x + h).unwrap() - eval_f(&q, x - h).unwrap()) / (2.0 * h);
                let d = eval_f_prime(&q, x).unwrap();
                assert!((d - fd).abs() <= 1e-6 * (1.0 + d.abs()), "a={a} x={x}: {d} vs {fd}");
            }
        }
    }

    #[test]
    fn second_derivative_matches_difference_of_first() {
        let q = p(8.0, 1.0 / 3.0);
        for x in uniform_grid(0.02, 0.98, 97) {
            let h = 1e-5;
            let fd = (eval_f_prime(&q, x + h).unwrap() - eval_f_prime(&q, x - h).unwrap()) / (2.0 * h);
            let d2 = eval_f_second(&q, x).unwrap();
            assert!((d2 - fd).abs() <= 1e-5 * (1.0 + d2.abs()), "x={x}: {d2} vs {fd}");
        }
    }

    #[test]
    fn conjugate_map_values() {
        let q = p(30.0, 1.0 / 3.0);
        let y0 = 2f64.ln();
        assert!((eval_g(&q, y0) - y0).abs() < 1e-14);
        assert!((eval_g_prime(&q, y0) + 17.0 / 3.0).abs() < 1e-12);
        assert_eq!(eval_g_second(&q, 0.0), 0.0);
        // overflow-safe far out on both sides
        assert!((eval_g(&q, 800.0) - (800.0 - 10.0)).abs() < 1e-9);
        assert!((eval_g(&q, -800.0) - (-800.0 + 20.0)).abs() < 1e-9);
        let h = 1e-5;
        for y in uniform_grid(-8.0, 8.0, 41) {
            let fd = (eval_g(&q, y + h) - eval_g(&q, y - h)) / (2.0 * h);
            assert!((fd - eval_g_prime(&q, y)).abs() < 1e-7);
            let fd2 = (eval_g_prime(&q, y + h) - eval_g_prime(&q, y - h)) / (2.0 * h);
            assert!((fd2 - eval_g_second(&q, y)).abs() < 1e-7);
        }
    }

    #[test]
    fn multiplier_is_conjugacy_invariant() {
        for (a, b) in [(30.0, 1.0 / 3.0), (8.0, 0.2), (12.0, 0.75)] {
            let q = p(a, b);
            let y0 = logit(b);
            let fp = eval_f_prime(&q, b).unwrap();
            assert!((eval_g_prime(&q, y0) - fp).abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_report() {
        let r = fixed_points(&p(8.0, 1.0 / 3.0), MapKind::Replicator);
        assert_eq!(r.points, vec![0.0, 1.0 / 3.0, 1.0]);
        assert!((r.multipliers[1] + 7.0 / 9.0).abs() < 1e-12);
        assert_eq!(r.stability[1], Stability::Stable);
        assert_eq!(r.stability[0], Stability::Unstable);
        assert_eq!(r.stability[2], Stability::Unstable);
        let r = fixed_points(&p(12.0, 1.0 / 3.0), MapKind::Replicator);
        assert!((r.multipliers[1] + 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.stability[1], Stability::Unstable);
        assert!((p(1.0, 1.0 / 3.0).stability_threshold() - 9.0).abs() < 1e-12);
        let r = fixed_points(&p(9.0, 1.0 / 3.0), MapKind::Replicator);
        assert_eq!(r.stability[1], Stability::Neutral);
        let r = fixed_points(&p(30.0, 1.0 / 3.0), MapKind::Conjugate);
        assert!((r.points[0] - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn critical_point_identities() {
        let c = critical_points(&p(8.0, 1.0 / 3.0), MapKind::Replicator).unwrap();
        assert!((c.low - (0.5 - 0.125f64.sqrt())).abs() < 1e-15);
        assert!((c.low - 0.146447).abs() < 1e-6);
        assert!((c.high - 0.853553).abs() < 1e-6);
        let g = critical_points(&p(30.0, 0.1), MapKind::Conjugate).unwrap();
        assert!((g.high - (14.0 + 195f64.sqrt()).ln()).abs() < 1e-14);
        assert!((g.high - 3.3310).abs() < 1e-4);
        assert_eq!(g.low + g.high, 0.0);
        for a in [4.001, 4.5, 8.0, 30.0, 1e3, 1e6] {
            let c = critical_points(&p(a, 0.4), MapKind::Replicator).unwrap();
            assert!(((c.low + c.high) - 1.0).abs() <= 1e-14);
            assert!((c.low * c.high * a - 1.0).abs() <= 1e-14);
            // x-space maximum sits at the image of the y-space minimum
            let g = critical_points(&p(a, 0.4), MapKind::Conjugate).unwrap();
            assert!((logit(c.low) - g.high).abs() <= 1e-9 * g.high.abs().max(1.0));
        }
        assert!(matches!(
            critical_points(&p(4.0, 0.3), MapKind::Replicator),
            Err(Error::NoCriticalPoints { .. })
        ));
    }

    #[test]
    fn schwarzian_closed_form_matches_numeric() {
        for (a, b) in [(8.0, 1.0 / 3.0), (4.5, 0.5), (30.0, 0.2)] {
            let q = p(a, b);
            for x in uniform_grid(0.03, 0.97, 95) {
                let (Ok(s), Ok(sn)) = (schwarzian(&q, x), schwarzian_numeric(&q, x)) else {
                    continue;
                };
                assert!((s - sn).abs() <= 1e-5 * (1.0 + s.abs()), "a={a} x={x}: {s} vs {sn}");
            }
        }
    }

    #[test]
    fn schwarzian_is_negative_and_diverges_at_critical_points() {
        let q = p(8.0, 1.0 / 3.0);
        assert!(schwarzian(&q, 0.5).unwrap() < 0.0);
        assert!(schwarzian(&p(4.5, 0.5), 0.25).unwrap() < 0.0);
        let c = critical_points(&q, MapKind::Replicator).unwrap();
        let mut prev = 0.0;
        for k in 2..9 {
            let s = schwarzian(&q, c.low + 10f64.powi(-k)).unwrap();
            assert!(s < prev, "not diverging at step {k}: {s}");
            prev = s;
        }
        assert!(prev < -1e12);
    }

    #[test]
    fn generic_generators() {
        // −ln x with a = 1 gives A x e^{−x}, A = e^b
        let g = GeneratorH::neg_log();
        let b = 0.7;
        for x in [0.1, 0.5, 1.0, 2.5, 7.0] {
            let v = eval_fh(&g, 1.0, b, x).unwrap();
            assert!((v - b.exp() * x * (-x).exp()).abs() < 1e-14 * (1.0 + v));
        }
        // tangent family fixes x = b
        let t = GeneratorH::neg_tan();
        assert_eq!(eval_fh(&t, 3.0, 0.4, 0.4).unwrap(), 0.4);
        let v = eval_fh(&t, 3.0, 0.4, 0.1).unwrap();
        assert!((v - (0.1f64.tan() - 3.0 * (0.1 - 0.4)).atan()).abs() < 1e-15);
    }

    #[test]
    fn numeric_generator_inversion() {
        let g = GeneratorH::numeric("cubic", |x| x + x * x * x, |x| 1.0 + 3.0 * x * x, -2.0, 2.0)
            .unwrap();
        for y in uniform_grid(-9.5, 9.5, 39) {
            let x = g.h_inv(y).unwrap();
            assert!((g.h(x) - y).abs() <= 1e-12);
        }
        // out-of-range shifts are reported
        assert!(matches!(eval_fh(&g, 10.0, 0.0, 1.9), Err(Error::Range { .. })));
        assert!(matches!(eval_fh(&g, 1.0, 0.0, 2.5), Err(Error::Domain { .. })));
        let v = eval_fh(&g, 0.5, 0.2, 0.7).unwrap();
        assert!((g.h(v) - (g.h(0.7) + 0.5 * 0.5)).abs() < 1e-12);
        let d = eval_fh_prime(&g, 0.5, 0.2, 0.7).unwrap();
        let fd = (eval_fh(&g, 0.5, 0.2, 0.7 + 1e-6).unwrap() - eval_fh(&g, 0.5, 0.2, 0.7 - 1e-6).unwrap())
            / 2e-6;
        assert!((d - fd).abs() < 1e-6);
    }

    #[test]
    fn conjugacy_and_symmetry_residuals() {
        let grid = uniform_grid(0.01, 0.99, 10_000);
        for (a, b) in [(8.0, 1.0 / 3.0), (30.0, 0.75)] {
            let q = p(a, b);
            assert!(conjugacy_residual(&q, &grid).unwrap() <= 1e-10);
            let full = uniform_grid(0.0, 1.0, 10_000);
            assert!(symmetry_residual(&q, &full).unwrap() <= 1e-12);
        }
        let q = p(8.0, 1.0 / 3.0);
        let yb = logit(1.0 / 3.0);
        let (fb, fbc) = eval_f_pair(&q, 1.0 / 3.0).unwrap();
        assert!((logit_pair(fb, fbc) - yb).abs() < 1e-15);
        assert!((eval_g(&q, yb) - yb).abs() < 1e-15);
    }
}

//! Constructive hyperbolicity certificate for `g_{a,b}`.
//!
//! For large `a` the conjugate map has two disjoint intervals `J₁` (where `g`
//! decreases) and `J₂` (where it increases) with `g(J₁) ⊇ J₁ ∪ J₂`,
//! `g(J₂) ⊇ J₁` and `g(J₂) ∩ J₂ = ∅`. The set `K` of points that never leave
//! `J₁ ∪ J₂` then carries the golden-mean subshift, and `g²` expands on it.
//! Everything here checks those facts numerically for one `(a, b)`.
//!
//! The construction is stated for `b ≤ 1/2`. For `b > 1/2` the certificate is
//! computed for `1 − b` and reflected through `y ↦ −y`, using
//! `g_{a,1−b}(y) = −g_{a,b}(−y)`; reported landmarks and intervals stay in the
//! working (reflected) frame and `reflected` is set.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::Conjugate;
use crate::error::{Error, Result};
use crate::map::{self, MapKind, MapParams};
use crate::output::fmt_f64;
use crate::periodic::{self, PeriodicOrbit};
use crate::roots;
use crate::symbolic::{self, Mode, SymbolicWord};

/// Default depth of the `K` approximation used for the expansion check.
pub const DEFAULT_DEPTH: usize = 10;
/// Maximum supported depth.
pub const MAX_DEPTH: usize = 25;
/// Samples per component in the expansion check.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Residual required of the defining equations of the boundary points.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Slack allowed in endpoint comparisons that hold with equality in theory.
pub const COVER_SLACK: f64 = 1e-9;

const SYMBOL_SLACK: f64 = 1e-10;
const CYCLE_SEED_LENGTH: usize = 40;

/// Recorded in every certificate: the third gap inequality is reconstructed.
pub const GAP_ASSUMPTION: &str =
    "third gap inequality taken as g(g_max) > y_min, the form the covering argument needs";

/// Fixed point and critical data of `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmarks {
    pub y0: f64,
    pub y_max: f64,
    pub y_min: f64,
    pub g_min: f64,
    pub g_max: f64,
}

/// `y₀`, the critical points and critical values of `g_{a,b}`.
pub fn landmarks(p: &MapParams) -> Result<Landmarks> {
    let c = map::critical_points(p, MapKind::Conjugate)?;
    debug_assert_eq!(c.low + c.high, 0.0);
    Ok(Landmarks {
        y0: map::logit(p.b()),
        y_max: c.low,
        y_min: c.high,
        g_min: map::eval_g(p, c.high),
        g_max: map::eval_g(p, c.low),
    })
}

/// Signed margins of the three gap inequalities:
/// `y_max − g_min`, `g_max − y_min`, `g(g_max) − y_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapMargins {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    pub pass: bool,
}

fn gap_margins_working(w: &MapParams, l: &Landmarks) -> GapMargins {
    let first = l.y_max - l.g_min;
    let second = l.g_max - l.y_min;
    let third = map::eval_g(w, l.g_max) - l.y_min;
    GapMargins { first, second, third, pass: first > 0.0 && second > 0.0 && third > 0.0 }
}

fn working(p: &MapParams) -> (MapParams, bool) {
    if p.b() > 0.5 {
        (p.mirrored(), true)
    } else {
        (*p, false)
    }
}

/// Gap inequality margins (computed in the working frame, so `b > 1/2`
/// reports the margins of `1 − b`).
pub fn check_gap_inequalities(p: &MapParams) -> Result<GapMargins> {
    let (w, _) = working(p);
    Ok(gap_margins_working(&w, &landmarks(&w)?))
}

/// Endpoints of `J₁ = [y₁⁻, y₁⁺]` and `J₂ = [y₂⁻, y₂⁺]` with the residuals of
/// their defining equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoints {
    pub y1_minus: f64,
    pub y1_plus: f64,
    pub y2_minus: f64,
    pub y2_plus: f64,
    /// `|g(y) − target|` for `y₁⁻, y₁⁺, y₂⁻, y₂⁺`.
    pub residuals: [f64; 4],
}

impl BoundaryPoints {
    pub fn j1(&self) -> (f64, f64) {
        (self.y1_minus, self.y1_plus)
    }
    pub fn j2(&self) -> (f64, f64) {
        (self.y2_minus, self.y2_plus)
    }
}

fn boundary_points_working(w: &MapParams, l: &Landmarks) -> Result<BoundaryPoints> {
    let g = |y: f64| map::eval_g(w, y);
    let dg = |y: f64| map::eval_g_prime(w, y);
    let solve = |lo: f64, hi: f64, target: f64| -> Result<f64> {
        let flo = g(lo) - target;
        let fhi = g(hi) - target;
        if flo == 0.0 {
            return Ok(lo);
        }
        if fhi == 0.0 {
            return Ok(hi);
        }
        if flo.signum() == fhi.signum() {
            return Err(Error::RootNotBracketed { lo, hi, target });
        }
        roots::safe_newton_tol(|y| g(y) - target, dg, lo, hi, 0.0)
    };
    // g(y) ≥ y − ab to the right, so this bound clears every target below
    let far = l.y_min + w.a() * w.b() + 10.0 + l.g_max.abs();
    let y2_plus = solve(l.y_min, far, l.y_min)?;
    let y1_minus = solve(l.y_max, l.y_min, y2_plus)?;
    let y1_plus = solve(l.y_max, l.y_min, l.y_max)?;
    let y2_minus = solve(l.y_min, far, l.y_max)?;
    let residuals = [
        (g(y1_minus) - y2_plus).abs(),
        (g(y1_plus) - l.y_max).abs(),
        (g(y2_minus) - l.y_max).abs(),
        (g(y2_plus) - l.y_min).abs(),
    ];
    Ok(BoundaryPoints { y1_minus, y1_plus, y2_minus, y2_plus, residuals })
}

/// Boundary points of `J₁, J₂` in the working frame.
pub fn boundary_points(p: &MapParams) -> Result<BoundaryPoints> {
    let (w, _) = working(p);
    boundary_points_working(&w, &landmarks(&w)?)
}

/// Covering relations, decided from endpoint values and monotonicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringFlags {
    /// `J₁ ⊂ (y_max, y_min)`, where `g` decreases.
    pub j1_in_decreasing_branch: bool,
    /// `J₂ ⊂ (y_min, ∞)`, where `g` increases.
    pub j2_in_increasing_branch: bool,
    /// `y₁⁻ < y₁⁺ < y₂⁻ < y₂⁺`.
    pub ordered: bool,
    /// `g(J₁) ⊇ J₁ ∪ J₂`.
    pub j1_covers_both: bool,
    /// `g(J₂) ⊇ J₁`.
    pub j2_covers_j1: bool,
    /// `g(J₂) ∩ J₂ = ∅`.
    pub j2_image_misses_j2: bool,
    /// `g²(J_i) ⊇ J₁ ∪ J₂` for both `i`, as a consequence of the above.
    pub second_iterate_covers: bool,
    pub all: bool,
}

fn covering_working(w: &MapParams, l: &Landmarks, bp: &BoundaryPoints) -> CoveringFlags {
    let g = |y: f64| map::eval_g(w, y);
    let slack = |v: f64| COVER_SLACK * (1.0 + v.abs());
    let j1_in = l.y_max < bp.y1_minus && bp.y1_plus < l.y_min;
    let j2_in = l.y_min < bp.y2_minus;
    let ordered = bp.y1_minus < bp.y1_plus && bp.y1_plus < bp.y2_minus && bp.y2_minus < bp.y2_plus;
    // g decreasing on J₁: g(J₁) = [g(y₁⁺), g(y₁⁻)]
    let (i1_lo, i1_hi) = (g(bp.y1_plus), g(bp.y1_minus));
    let j1_covers = i1_lo <= bp.y1_minus + slack(i1_lo) && i1_hi >= bp.y2_plus - slack(i1_hi);
    // g increasing on J₂: g(J₂) = [g(y₂⁻), g(y₂⁺)]
    let (i2_lo, i2_hi) = (g(bp.y2_minus), g(bp.y2_plus));
    let j2_covers = i2_lo <= bp.y1_minus + slack(i2_lo) && i2_hi >= bp.y1_plus - slack(i2_hi);
    let j2_misses = i2_hi < bp.y2_minus;
    let base = j1_in && j2_in && ordered;
    let second = base && j1_covers && j2_covers;
    CoveringFlags {
        j1_in_decreasing_branch: j1_in,
        j2_in_increasing_branch: j2_in,
        ordered,
        j1_covers_both: j1_covers,
        j2_covers_j1: j2_covers,
        j2_image_misses_j2: j2_misses,
        second_iterate_covers: second,
        all: second && j2_misses,
    }
}

/// Covering flags for the boundary points of `p` (working frame).
pub fn covering_check(p: &MapParams, bp: &BoundaryPoints) -> Result<CoveringFlags> {
    let (w, _) = working(p);
    Ok(covering_working(&w, &landmarks(&w)?, bp))
}

/// The endpoint derivative product `min(|g'(y₁⁻)|, |g'(y₁⁺)|)·g'(y₂⁻)`, with
/// the large-`a` leading terms it is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointExpansion {
    pub g_prime_y1_minus: f64,
    pub g_prime_y1_plus: f64,
    pub g_prime_y2_minus: f64,
    pub product: f64,
    pub margin: f64,
    pub pass: bool,
    /// `1 − 2ab(1 − 2b)`, the leading behaviour of `g'(y₁⁻)`.
    pub leading_y1_minus: f64,
    /// `1 − ab(1 − b)`, the leading behaviour of `g'(y₁⁺)`.
    pub leading_y1_plus: f64,
    /// `1 − a² e^{3 − ab}`, a large-`a` lower bound for `g'(y₂⁻)`.
    pub lower_bound_y2_minus: f64,
}

fn endpoint_expansion_working(w: &MapParams, bp: &BoundaryPoints) -> EndpointExpansion {
    let (a, b) = (w.a(), w.b());
    let d1m = map::eval_g_prime(w, bp.y1_minus);
    let d1p = map::eval_g_prime(w, bp.y1_plus);
    let d2m = map::eval_g_prime(w, bp.y2_minus);
    let product = d1m.abs().min(d1p.abs()) * d2m;
    EndpointExpansion {
        g_prime_y1_minus: d1m,
        g_prime_y1_plus: d1p,
        g_prime_y2_minus: d2m,
        product,
        margin: product - 1.0,
        pass: product > 1.0,
        leading_y1_minus: 1.0 - 2.0 * a * b * (1.0 - 2.0 * b),
        leading_y1_plus: 1.0 - a * b * (1.0 - b),
        lower_bound_y2_minus: 1.0 - a * a * (3.0 - a * b).exp(),
    }
}

/// Endpoint derivative product for the boundary points of `p`.
pub fn check_endpoint_expansion(p: &MapParams, bp: &BoundaryPoints) -> EndpointExpansion {
    let (w, _) = working(p);
    endpoint_expansion_working(&w, bp)
}

/// Minimum of `|(g²)'|` over dense samples of a `K` approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub depth: usize,
    pub samples_per_component: usize,
    pub min_derivative: f64,
    /// Working-frame point where the minimum was seen.
    pub argmin: f64,
    pub margin: f64,
}

/// Result of the full check at one `(a, b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicCertificate {
    pub params: MapParams,
    /// `b` of the frame the construction ran in (`min(b, 1 − b)`).
    pub working_b: f64,
    pub reflected: bool,
    pub landmarks: Landmarks,
    pub gap: GapMargins,
    pub boundary: Option<BoundaryPoints>,
    pub covering: Option<CoveringFlags>,
    pub endpoint_expansion: Option<EndpointExpansion>,
    pub depth: usize,
    pub component_count: Option<usize>,
    pub expansion: Option<ExpansionReport>,
    pub assumptions: Vec<String>,
    pub diagnostics: Vec<String>,
    pub pass: bool,
}

impl HyperbolicCertificate {
    fn working_params(&self) -> MapParams {
        working(&self.params).0
    }

    fn sign(&self) -> f64 {
        if self.reflected {
            -1.0
        } else {
            1.0
        }
    }

    fn require_intervals(&self) -> Result<BoundaryPoints> {
        match (self.boundary, self.covering) {
            (Some(bp), Some(c)) if c.all => Ok(bp),
            _ => Err(Error::CertificateFailed(format!("no valid J1/J2 at {}", self.params))),
        }
    }

    /// `J₁` and `J₂` in the coordinates of `g_{a,b}` itself.
    pub fn native_intervals(&self) -> Option<[(f64, f64); 2]> {
        let bp = self.boundary?;
        let s = self.sign();
        let fix = |(lo, hi): (f64, f64)| if s > 0.0 { (lo, hi) } else { (-hi, -lo) };
        Some([fix(bp.j1()), fix(bp.j2())])
    }

    /// The expansion margin `min |(g²)'| − 1`, when it was computed.
    pub fn expansion_margin(&self) -> Option<f64> {
        self.expansion.map(|e| e.margin)
    }

    pub fn to_json(&self) -> Value {
        let l = &self.landmarks;
        let opt = |v: Option<f64>| v.map_or(Value::Null, |x| json!(x));
        json!({
            "a": self.params.a(),
            "b": self.params.b(),
            "working_b": self.working_b,
            "reflected": self.reflected,
            "landmarks": {
                "y0": l.y0, "y_max": l.y_max, "y_min": l.y_min, "g_min": l.g_min, "g_max": l.g_max,
            },
            "gap_margins": [self.gap.first, self.gap.second, self.gap.third],
            "gap_pass": self.gap.pass,
            "boundary_points": self.boundary.map(|bp| json!({
                "y1_minus": bp.y1_minus, "y1_plus": bp.y1_plus,
                "y2_minus": bp.y2_minus, "y2_plus": bp.y2_plus,
                "residuals": bp.residuals,
            })),
            "J1": self.boundary.map(|bp| [bp.y1_minus, bp.y1_plus]),
            "J2": self.boundary.map(|bp| [bp.y2_minus, bp.y2_plus]),
            "covering": self.covering,
            "endpoint_expansion": self.endpoint_expansion,
            "depth": self.depth,
            "component_count": self.component_count,
            "expansion": self.expansion,
            "expansion_margin": opt(self.expansion_margin()),
            "assumptions": self.assumptions,
            "diagnostics": self.diagnostics,
            "pass": self.pass,
        })
    }
}

/// Runs every check at `(a, b)`: gap inequalities, boundary points, covering,
/// the endpoint product and `|(g²)'|` on a depth-`depth` approximation of `K`.
///
/// Fails with an error only when `a ≤ 4`; any other failure is recorded in the
/// certificate with `pass = false`.
pub fn certify(p: &MapParams, depth: usize) -> Result<HyperbolicCertificate> {
    certify_with_samples(p, depth, DEFAULT_SAMPLES)
}

pub fn certify_with_samples(p: &MapParams, depth: usize, samples: usize) -> Result<HyperbolicCertificate> {
    if depth < 2 || depth > MAX_DEPTH {
        return Err(Error::InvalidParams(format!("depth must lie in 2..={MAX_DEPTH}, got {depth}")));
    }
    let (w, reflected) = working(p);
    let l = landmarks(&w)?;
    let gap = gap_margins_working(&w, &l);
    let mut cert = HyperbolicCertificate {
        params: *p,
        working_b: w.b(),
        reflected,
        landmarks: l,
        gap,
        boundary: None,
        covering: None,
        endpoint_expansion: None,
        depth,
        component_count: None,
        expansion: None,
        assumptions: vec![GAP_ASSUMPTION.to_string()],
        diagnostics: Vec::new(),
        pass: false,
    };
    if !gap.pass {
        cert.diagnostics.push(format!(
            "gap inequalities fail: margins ({}, {}, {})",
            gap.first, gap.second, gap.third
        ));
        return Ok(cert);
    }
    let bp = match boundary_points_working(&w, &l) {
        Ok(bp) => bp,
        Err(e) => {
            cert.diagnostics.push(format!("boundary points: {e}"));
            return Ok(cert);
        }
    };
    cert.boundary = Some(bp);
    if let Some(r) = bp.residuals.iter().find(|&&r| !(r <= BOUNDARY_TOL * (1.0 + l.g_max.abs()))) {
        cert.diagnostics.push(format!("boundary residual {r} above tolerance"));
    }
    let cover = covering_working(&w, &l, &bp);
    cert.covering = Some(cover);
    let ends = endpoint_expansion_working(&w, &bp);
    cert.endpoint_expansion = Some(ends);
    if !cover.all {
        cert.diagnostics.push("covering relations fail".into());
        return Ok(cert);
    }
    if !ends.pass {
        cert.diagnostics.push(format!("endpoint derivative product {} <= 1", ends.product));
    }
    let k = match approximate_k(&cert, depth) {
        Ok(k) => k,
        Err(e) => {
            cert.diagnostics.push(format!("K approximation: {e}"));
            return Ok(cert);
        }
    };
    cert.component_count = Some(k.components.len());
    let expected = symbolic::counts(depth as u64 + 1)?.a_n;
    if num_bigint::BigUint::from(k.components.len()) != expected {
        cert.diagnostics.push(format!("component count {} differs from {expected}", k.components.len()));
    }
    let report = expansion_check(&cert, &k, samples)?;
    cert.expansion = Some(report);
    if !(report.margin > 0.0) {
        cert.diagnostics.push(format!("min |(g^2)'| = {} <= 1", report.min_derivative));
    }
    cert.pass = cert.diagnostics.is_empty();
    Ok(cert)
}

/// One connected component of the depth-`m` approximation of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KComponent {
    /// Itinerary of the component, `m + 1` symbols.
    pub label: String,
    pub left: f64,
    pub right: f64,
}

impl KComponent {
    pub fn width(&self) -> f64 {
        self.right - self.left
    }
}

/// Components of `∩_{k≤m} g^{−k}(J₁ ∪ J₂)` in the working frame, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KApproximation {
    pub depth: usize,
    pub components: Vec<KComponent>,
}

impl KApproximation {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,left,right\n");
        for c in &self.components {
            s.push_str(&format!("{},{},{}\n", c.label, fmt_f64(c.left), fmt_f64(c.right)));
        }
        s
    }

    pub fn max_width(&self) -> f64 {
        self.components.iter().map(KComponent::width).fold(0.0, f64::max)
    }
}

// Monotone inverse of g on a branch, clamped to the branch when the target
// sits on an image endpoint up to rounding.
fn pull_back(w: &MapParams, branch: (f64, f64), target: f64) -> Result<f64> {
    let (lo, hi) = branch;
    let (glo, ghi) = (map::eval_g(w, lo), map::eval_g(w, hi));
    let (tmin, tmax) = if glo <= ghi { (glo, ghi) } else { (ghi, glo) };
    let slack = COVER_SLACK * (1.0 + target.abs());
    if target < tmin - slack || target > tmax + slack {
        return Err(Error::CertificateFailed(format!(
            "empty pullback of {target} through [{lo}, {hi}] (image [{tmin}, {tmax}])"
        )));
    }
    let end_for = |v: f64| if (v == glo) == (glo <= ghi) { lo } else { hi };
    if target <= tmin {
        return Ok(end_for(tmin));
    }
    if target >= tmax {
        return Ok(end_for(tmax));
    }
    roots::safe_newton_tol(|y| map::eval_g(w, y) - target, |y| map::eval_g_prime(w, y), lo, hi, 0.0)
}

fn pull_back_interval(w: &MapParams, branch: (f64, f64), interval: (f64, f64)) -> Result<(f64, f64)> {
    let u = pull_back(w, branch, interval.0)?;
    let v = pull_back(w, branch, interval.1)?;
    Ok(if u <= v { (u, v) } else { (v, u) })
}

/// Builds the depth-`m` approximation of `K` by pulling cylinders back through
/// the two monotone branches.
pub fn approximate_k(cert: &HyperbolicCertificate, m: usize) -> Result<KApproximation> {
    if m > MAX_DEPTH {
        return Err(Error::InvalidParams(format!("depth {m} exceeds {MAX_DEPTH}")));
    }
    let bp = cert.require_intervals()?;
    let w = cert.working_params();
    let branches = [bp.j1(), bp.j2()];
    let mut level: Vec<(Vec<u8>, (f64, f64))> = vec![(vec![0], bp.j1()), (vec![1], bp.j2())];
    for _ in 0..m {
        let next: Vec<Result<(Vec<u8>, (f64, f64))>> = level
            .par_iter()
            .flat_map_iter(|(word, iv)| {
                let w = &w;
                (0u8..2).filter(move |&s| !(s == 1 && word[0] == 1)).map(move |s| {
                    let mut label = Vec::with_capacity(word.len() + 1);
                    label.push(s);
                    label.extend_from_slice(word);
                    Ok((label, pull_back_interval(w, branches[s as usize], *iv)?))
                })
            })
            .collect();
        level = next.into_iter().collect::<Result<Vec<_>>>()?;
    }
    let mut components: Vec<KComponent> = level
        .into_iter()
        .map(|(word, (l, r))| KComponent {
            label: word.iter().map(|&s| char::from(b'0' + s)).collect(),
            left: l,
            right: r,
        })
        .collect();
    components.sort_by(|a, b| a.left.total_cmp(&b.left).then(a.right.total_cmp(&b.right)));
    Ok(KApproximation { depth: m, components })
}

/// Minimum of `|g'(y)·g'(g(y))|` over `samples` evenly spaced points of each
/// component.
pub fn expansion_check(cert: &HyperbolicCertificate, k: &KApproximation, samples: usize) -> Result<ExpansionReport> {
    if k.depth < 2 {
        return Err(Error::InvalidParams("expansion check needs depth >= 2".into()));
    }
    if k.components.is_empty() {
        return Err(Error::Empty);
    }
    let w = cert.working_params();
    let samples = samples.max(2);
    let (min_derivative, argmin) = k
        .components
        .par_iter()
        .map(|c| {
            let mut best = (f64::INFINITY, c.left);
            for i in 0..samples {
                let t = i as f64 / (samples - 1) as f64;
                let y = c.left + t * (c.right - c.left);
                let d = (map::eval_g_prime(&w, y) * map::eval_g_prime(&w, map::eval_g(&w, y))).abs();
                if d < best.0 {
                    best = (d, y);
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
    Ok(ExpansionReport {
        depth: k.depth,
        samples_per_component: samples,
        min_derivative,
        argmin,
        margin: min_derivative - 1.0,
    })
}

fn symbol_of(bp: &BoundaryPoints, y: f64) -> Option<u8> {
    let slack = SYMBOL_SLACK * (1.0 + y.abs());
    if y >= bp.y1_minus - slack && y <= bp.y1_plus + slack {
        Some(0)
    } else if y >= bp.y2_minus - slack && y <= bp.y2_plus + slack {
        Some(1)
    } else {
        None
    }
}

/// The first `m` symbols of the orbit of `y` (in the coordinates of
/// `g_{a,b}`): symbol 0 for `J₁`, 1 for `J₂`.
pub fn itinerary(cert: &HyperbolicCertificate, y: f64, m: usize) -> Result<SymbolicWord> {
    let bp = cert.require_intervals()?;
    let w = cert.working_params();
    let mut z = cert.sign() * y;
    let mut symbols = Vec::with_capacity(m);
    for step in 0..m {
        let s = symbol_of(&bp, z).ok_or(Error::EscapedK { step, y: cert.sign() * z })?;
        symbols.push(s);
        z = map::eval_g(&w, z);
    }
    SymbolicWord::new(symbols, Mode::Linear)
}

// Working-frame cylinder of a linearly admissible word.
fn cylinder(w: &MapParams, bp: &BoundaryPoints, symbols: &[u8]) -> Result<(f64, f64)> {
    let branches = [bp.j1(), bp.j2()];
    let last = *symbols.last().ok_or(Error::Empty)?;
    let mut iv = branches[last as usize];
    for &s in symbols.iter().rev().skip(1) {
        iv = pull_back_interval(w, branches[s as usize], iv)?;
    }
    Ok(iv)
}

/// A point of `K` realising `word`: the midpoint of its cylinder for a linear
/// word, the refined periodic point for a cyclic one.
pub fn point_from_word(cert: &HyperbolicCertificate, word: &SymbolicWord) -> Result<f64> {
    if !word.is_admissible() {
        return Err(Error::Inadmissible(word.to_string()));
    }
    match word.mode() {
        Mode::Linear => {
            let bp = cert.require_intervals()?;
            let (l, r) = cylinder(&cert.working_params(), &bp, word.symbols())?;
            Ok(cert.sign() * 0.5 * (l + r))
        }
        Mode::Cyclic => Ok(cycle_from_word(cert, word)?.0[0]),
    }
}

/// The periodic orbit of `g_{a,b}` with itinerary `word^∞`, in orbit order
/// starting at the point coded by `word`, with its cycle defect.
pub fn cycle_from_word(cert: &HyperbolicCertificate, word: &SymbolicWord) -> Result<(Vec<f64>, f64)> {
    if word.mode() != Mode::Cyclic || !word.is_admissible() {
        return Err(Error::Inadmissible(word.to_string()));
    }
    let bp = cert.require_intervals()?;
    let w = cert.working_params();
    let n = word.len();
    let reps = CYCLE_SEED_LENGTH.div_ceil(n);
    let long: Vec<u8> = word.symbols().iter().copied().cycle().take(reps * n).collect();
    let (l, r) = cylinder(&w, &bp, &long)?;
    let mut seed = Vec::with_capacity(n);
    let mut y = 0.5 * (l + r);
    for _ in 0..n {
        seed.push(y);
        y = map::eval_g(&w, y);
    }
    let (cycle, residual) = periodic::refine_cycle(&Conjugate(w), &seed)?;
    let s = cert.sign();
    let got = itinerary(cert, s * cycle[0], n)?;
    if got.symbols() != word.symbols() {
        return Err(Error::Numerical(format!("refined cycle has itinerary {got}, expected {word}")));
    }
    Ok((cycle.into_iter().map(|y| s * y).collect(), residual))
}

/// The `f_{a,b}` orbit, in `x`, of the periodic point coded by a cyclic word.
pub fn replicator_cycle_from_word(cert: &HyperbolicCertificate, word: &SymbolicWord) -> Result<PeriodicOrbit> {
    let (ys, residual) = cycle_from_word(cert, word)?;
    let n = ys.len();
    let multiplier: f64 = ys.iter().map(|&y| map::eval_g_prime(&cert.params, y)).product();
    let mut points: Vec<f64> = ys.iter().map(|&y| map::logit_inv(y)).collect();
    let mut x = points[0];
    for _ in 0..n {
        x = map::eval_f(&cert.params, x)?;
    }
    let shooting_residual = (x - points[0]).abs();
    let i = points.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map_or(0, |(i, _)| i);
    points.rotate_left(i);
    Ok(PeriodicOrbit {
        least_period: word.least_period(),
        mean: points.iter().sum::<f64>() / n as f64,
        points,
        multiplier,
        residual,
        shooting_residual,
        stability: map::Stability::from_multiplier(multiplier),
    })
}

/// The geometric grid `4.1·1.05^k` up to 200.
pub fn default_a_grid() -> Vec<f64> {
    let mut out = Vec::new();
    let mut a = 4.1;
    while a <= 200.0 {
        out.push(a);
        a *= 1.05;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A0Row {
    pub a: f64,
    pub pass: bool,
    pub gap_third: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A0Report {
    pub b: f64,
    /// Smallest grid value where the certificate passes.
    pub threshold: Option<f64>,
    pub passes_at_double: Option<bool>,
    pub passes_at_quadruple: Option<bool>,
    pub rows: Vec<A0Row>,
    pub note: String,
}

impl A0Report {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

/// Scans `a_grid` for the smallest `a` where the certificate passes, then
/// spot-checks `2a` and `4a`. Validity need not be monotone in `a`.
pub fn find_a0(b: f64, a_grid: &[f64]) -> Result<A0Report> {
    if a_grid.is_empty() {
        return Err(Error::Empty);
    }
    let rows = a_grid
        .par_iter()
        .map(|&a| -> Result<A0Row> {
            let c = certify(&MapParams::new(a, b)?, DEFAULT_DEPTH)?;
            Ok(A0Row { a, pass: c.pass, gap_third: c.gap.third, note: c.diagnostics.first().cloned() })
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = rows.iter().find(|r| r.pass).map(|r| r.a);
    let check = |a: f64| -> Result<bool> { Ok(certify(&MapParams::new(a, b)?, DEFAULT_DEPTH)?.pass) };
    let (passes_at_double, passes_at_quadruple) = match threshold {
        Some(t) => (Some(check(2.0 * t)?), Some(check(4.0 * t)?)),
        None => (None, None),
    };
    let note = if threshold.is_some() {
        "grid threshold only; validity is not claimed to be monotone in a".to_string()
    } else {
        "no certificate in range".to_string()
    };
    Ok(A0Report { b, threshold, passes_at_double, passes_at_quadruple, rows, note })
}

//! Periodic orbits: bracketing of `T^n(x) − x`, multiple-shooting refinement,
//! deduplication up to cyclic rotation, the mean-value check, and attractor
//! bookkeeping (census, bifurcation scans).
//!
//! Replicator orbits are searched in the conjugate coordinate `y = h(x)` and
//! mapped back: in `x` the interesting orbits crowd exponentially close to 0
//! and 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{Conjugate, Dynamics, Replicator};
use crate::error::{Error, Result};
use crate::map::{self, MapKind, MapParams, Stability};
use crate::output::fmt_f64;
use crate::roots;

/// Cyclic-equivalence tolerance for orbits of `f` (x-space).
pub const DEDUP_TOL_X: f64 = 1e-9;
/// Cyclic-equivalence tolerance for orbits of `g` (y-space).
pub const DEDUP_TOL_Y: f64 = 1e-8;
/// Required cycle defect after refinement.
pub const RESIDUAL_TOL: f64 = 1e-12;
/// Default tolerance of the mean-value check.
pub const MEAN_TOL: f64 = 1e-8;

const MAX_SUBDIVISION: usize = 48;
const TANGENCY_LEVEL: f64 = 1e-10;
const REFINE_STEPS: usize = 100;

/// Recommended number of grid points for period `n`: `max(10⁴, 500·2ⁿ)`.
pub fn default_grid(n: usize) -> usize {
    let scaled = 500usize.saturating_mul(1usize << n.min(40));
    scaled.max(10_000)
}

/// A refined periodic orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub least_period: usize,
    /// The cycle, rotated so that the smallest point comes first.
    pub points: Vec<f64>,
    /// `(T^n)'` at a point of the cycle.
    pub multiplier: f64,
    pub mean: f64,
    /// Cycle defect `max_k |T(p_k) − p_{k+1}|` in the coordinates the orbit
    /// was refined in.
    pub residual: f64,
    /// `|T^n(p_0) − p_0|` in the coordinates of `points`.
    pub shooting_residual: f64,
    pub stability: Stability,
}

impl PeriodicOrbit {
    pub fn to_json(&self) -> Value {
        json!({
            "period": self.least_period,
            "points": self.points,
            "multiplier": self.multiplier,
            "mean": self.mean,
            "residual": self.residual,
            "shooting_residual": self.shooting_residual,
            "stability": self.stability,
        })
    }
}

/// A grid cell where `|T^n(x) − x|` came close to zero without a sign change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencySuspect {
    pub x: f64,
    pub value: f64,
}

/// Everything a period-`n` search produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSearch {
    pub period: usize,
    pub grid_resolution: usize,
    /// Distinct solutions of `T^n(x) = x`, sorted, including points of
    /// divisor periods.
    pub solutions: Vec<f64>,
    /// Orbits of least period exactly `n`.
    pub orbits: Vec<PeriodicOrbit>,
    /// Orbits whose least period is a proper divisor of `n`.
    pub divisor_orbits: Vec<PeriodicOrbit>,
    pub tangencies: Vec<TangencySuspect>,
}

impl PeriodicSearch {
    pub fn to_json(&self) -> Value {
        json!({
            "period": self.period,
            "grid_resolution": self.grid_resolution,
            "solution_count": self.solutions.len(),
            "solutions": self.solutions,
            "orbits": self.orbits.iter().map(PeriodicOrbit::to_json).collect::<Vec<_>>(),
            "divisor_orbits": self.divisor_orbits.iter().map(PeriodicOrbit::to_json).collect::<Vec<_>>(),
            "tangencies": self.tangencies,
        })
    }

    /// Solutions inside any of the given closed intervals.
    pub fn solutions_in(&self, intervals: &[(f64, f64)]) -> usize {
        self.solutions
            .iter()
            .filter(|&&s| intervals.iter().any(|&(lo, hi)| s >= lo && s <= hi))
            .count()
    }
}

/// `(T^n(x), (T^n)'(x))`, or `None` if the orbit leaves the domain.
pub fn iterate_with_derivative<M: Dynamics + ?Sized>(map: &M, x: f64, n: usize) -> Option<(f64, f64)> {
    let mut y = x;
    let mut d = 1.0;
    for _ in 0..n {
        d *= map.derivative(y).ok()?;
        y = map.step(y).ok()?;
    }
    (y.is_finite() && d.is_finite()).then_some((y, d))
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    x: f64,
    f: f64,
    df: f64,
}

fn sample<M: Dynamics + ?Sized>(map: &M, x: f64, n: usize) -> Option<Sample> {
    iterate_with_derivative(map, x, n).map(|(y, d)| Sample { x, f: y - x, df: d - 1.0 })
}

#[derive(Default)]
struct CellOutcome {
    brackets: Vec<(f64, f64)>,
    zeros: Vec<f64>,
    tangencies: Vec<TangencySuspect>,
}

// F' roughly constant across the cell, and consistent with the secant.
fn near_linear(l: &Sample, r: &Sample) -> bool {
    if l.df == 0.0 || r.df == 0.0 || l.df.signum() != r.df.signum() {
        return false;
    }
    let dmax = l.df.abs().max(r.df.abs());
    if (r.df - l.df).abs() > 0.5 * dmax {
        return false;
    }
    let s = (r.f - l.f) / (r.x - l.x);
    if s == 0.0 || s.signum() != l.df.signum() {
        return false;
    }
    let ratio = s.abs() / dmax;
    (0.4..=2.5).contains(&ratio)
}

fn scan_cell<M: Dynamics + ?Sized>(map: &M, n: usize, l: Sample, r: Sample, depth: usize, out: &mut CellOutcome) {
    let h = r.x - l.x;
    let sign_change = l.f * r.f < 0.0;
    let linear = near_linear(&l, &r);
    if sign_change && linear {
        out.brackets.push((l.x, r.x));
        return;
    }
    if !sign_change {
        if linear {
            return;
        }
        // |F(l)| + |F(r)| cannot be covered by a dip of slope ≲ 8 max|F'|
        let lip = 8.0 * l.df.abs().max(r.df.abs()).max(((r.f - l.f) / h).abs());
        if l.f.abs() + r.f.abs() > lip * h {
            return;
        }
    }
    let m = 0.5 * (l.x + r.x);
    let exhausted = depth >= MAX_SUBDIVISION || m <= l.x || m >= r.x;
    if exhausted {
        if sign_change {
            out.brackets.push((l.x, r.x));
        } else {
            let (x, v) = if l.f.abs() < r.f.abs() { (l.x, l.f) } else { (r.x, r.f) };
            if v.abs() < TANGENCY_LEVEL {
                out.tangencies.push(TangencySuspect { x, value: v });
            }
        }
        return;
    }
    let Some(mid) = sample(map, m, n) else {
        if sign_change {
            out.brackets.push((l.x, r.x));
        }
        return;
    };
    if mid.f == 0.0 {
        out.zeros.push(m);
    }
    scan_cell(map, n, l, mid, depth + 1, out);
    scan_cell(map, n, mid, r, depth + 1, out);
}

/// Distinct roots of `T^n(x) = x` on the given intervals, plus tangency
/// suspects. Roots closer than `dedup_tol` are merged.
pub fn solve_periodic_equation<M: Dynamics + ?Sized>(
    map: &M,
    n: usize,
    domain: &[(f64, f64)],
    grid_resolution: usize,
    dedup_tol: f64,
) -> Result<(Vec<f64>, Vec<TangencySuspect>)> {
    if n == 0 {
        return Err(Error::InvalidParams("period must be at least 1".into()));
    }
    if grid_resolution < 2 {
        return Err(Error::InvalidParams("grid needs at least 2 points".into()));
    }
    let mut roots_found = Vec::new();
    let mut tangencies = Vec::new();
    for &(lo, hi) in domain {
        if !(lo < hi) {
            return Err(Error::InvalidParams(format!("empty search interval [{lo}, {hi}]")));
        }
        let grid = map::uniform_grid(lo, hi, grid_resolution);
        let samples: Vec<Option<Sample>> = grid.par_iter().map(|&x| sample(map, x, n)).collect();
        let outcomes: Vec<CellOutcome> = (0..samples.len() - 1)
            .into_par_iter()
            .map(|i| {
                let mut out = CellOutcome::default();
                if let (Some(l), Some(r)) = (samples[i], samples[i + 1]) {
                    scan_cell(map, n, l, r, 0, &mut out);
                }
                out
            })
            .collect();
        for s in samples.iter().flatten() {
            if s.f == 0.0 {
                roots_found.push(s.x);
            }
        }
        let brackets: Vec<(f64, f64)> = outcomes.iter().flat_map(|o| o.brackets.iter().copied()).collect();
        for o in &outcomes {
            roots_found.extend_from_slice(&o.zeros);
            tangencies.extend_from_slice(&o.tangencies);
        }
        let polished: Vec<f64> = brackets
            .par_iter()
            .filter_map(|&(a, b)| {
                roots::safe_newton_tol(
                    |x| sample(map, x, n).map_or(f64::NAN, |s| s.f),
                    |x| sample(map, x, n).map_or(f64::NAN, |s| s.df),
                    a,
                    b,
                    0.0,
                )
                .ok()
            })
            .collect();
        roots_found.extend(polished);
    }
    roots_found.sort_by(f64::total_cmp);
    let mut merged: Vec<f64> = Vec::with_capacity(roots_found.len());
    for x in roots_found {
        match merged.last() {
            Some(&last) if (x - last).abs() <= dedup_tol => {}
            _ => merged.push(x),
        }
    }
    Ok((merged, tangencies))
}

/// Multiple-shooting Newton on the cycle equations `T(p_k) = p_{k+1}`.
/// Returns the refined cycle and its defect `max_k |T(p_k) − p_{k+1}|`.
pub fn refine_cycle<M: Dynamics + ?Sized>(map: &M, seed: &[f64]) -> Result<(Vec<f64>, f64)> {
    let n = seed.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    let defect = |p: &[f64]| -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut r = Vec::with_capacity(n);
        let mut m = Vec::with_capacity(n);
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let v = map.step(p[k])? - p[(k + 1) % n];
            worst = worst.max(v.abs());
            r.push(v);
            m.push(map.derivative(p[k])?);
        }
        Ok((r, m, worst))
    };
    let mut p = seed.to_vec();
    let (mut r, mut m, mut current) = defect(&p)?;
    let mut best = (p.clone(), current);
    let mut stalls = 0;
    for _ in 0..REFINE_STEPS {
        if current == 0.0 {
            break;
        }
        // δ_{k+1} = m_k δ_k + r_k around the cycle, closed by δ_n = δ_0
        let mut s = 0.0;
        let mut big_m = 1.0;
        for k in 0..n {
            s = m[k] * s + r[k];
            big_m *= m[k];
        }
        let denom = 1.0 - big_m;
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let mut delta = vec![0.0; n];
        delta[0] = s / denom;
        for k in 0..n - 1 {
            delta[k + 1] = m[k] * delta[k] + r[k];
        }
        let trial: Vec<f64> = p.iter().zip(&delta).map(|(x, d)| x + d).collect();
        let Ok((r2, m2, d2)) = defect(&trial) else { break };
        p = trial;
        r = r2;
        m = m2;
        current = d2;
        if current < best.1 {
            best = (p.clone(), current);
            stalls = 0;
        } else {
            stalls += 1;
            if stalls >= 3 {
                break;
            }
        }
    }
    Ok(best)
}

fn rotate_canonical(points: &mut Vec<f64>) {
    if let Some(i) = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    {
        points.rotate_left(i);
    }
}

fn same_cycle(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Least `d | n` with the cycle repeating after `d` steps to within `tol`.
fn least_period(points: &[f64], tol: f64) -> usize {
    let n = points.len();
    (1..=n)
        .filter(|d| n % d == 0)
        .find(|&d| (0..n).all(|k| (points[(k + d) % n] - points[k]).abs() <= tol))
        .unwrap_or(n)
}

fn build_orbit<M: Dynamics + ?Sized>(map: &M, cycle: Vec<f64>, residual: f64) -> Result<PeriodicOrbit> {
    let mut points = cycle;
    rotate_canonical(&mut points);
    let n = points.len();
    let mut multiplier = 1.0;
    for &p in &points {
        multiplier *= map.derivative(p)?;
    }
    let mut y = points[0];
    for _ in 0..n {
        y = map.step(y)?;
    }
    Ok(PeriodicOrbit {
        least_period: n,
        mean: points.iter().sum::<f64>() / n as f64,
        shooting_residual: (y - points[0]).abs(),
        points,
        multiplier,
        residual,
        stability: Stability::from_multiplier(multiplier),
    })
}

/// Locates periodic orbits of `map` of period `n` on `domain`.
///
/// Sign changes of `F(x) = T^n(x) − x` are bracketed on an adaptive grid,
/// polished, then each root is grown into a cycle, refined by multiple
/// shooting and reduced to its least period.
pub fn find_periodic<M: Dynamics + ?Sized>(
    map: &M,
    n: usize,
    domain: &[(f64, f64)],
    grid_resolution: usize,
    dedup_tol: f64,
) -> Result<PeriodicSearch> {
    let (solutions, tangencies) = solve_periodic_equation(map, n, domain, grid_resolution, dedup_tol)?;
    let candidates: Vec<Option<PeriodicOrbit>> = solutions
        .par_iter()
        .map(|&x0| -> Option<PeriodicOrbit> {
            let mut seed = Vec::with_capacity(n);
            let mut x = x0;
            for _ in 0..n {
                seed.push(x);
                x = map.step(x).ok()?;
            }
            let (cycle, _) = refine_cycle(map, &seed).ok()?;
            let d = least_period(&cycle, dedup_tol);
            let (cycle, residual) = refine_cycle(map, &cycle[..d]).ok()?;
            build_orbit(map, cycle, residual).ok()
        })
        .collect();
    let mut orbits: Vec<PeriodicOrbit> = Vec::new();
    let mut divisor_orbits: Vec<PeriodicOrbit> = Vec::new();
    for orbit in candidates.into_iter().flatten() {
        let bucket = if orbit.least_period == n { &mut orbits } else { &mut divisor_orbits };
        if !bucket.iter().any(|o| same_cycle(&o.points, &orbit.points, dedup_tol)) {
            bucket.push(orbit);
        }
    }
    let key = |o: &PeriodicOrbit| o.points[0];
    orbits.sort_by(|a, b| key(a).total_cmp(&key(b)));
    divisor_orbits.sort_by(|a, b| a.least_period.cmp(&b.least_period).then(key(a).total_cmp(&key(b))));
    Ok(PeriodicSearch { period: n, grid_resolution, solutions, orbits, divisor_orbits, tangencies })
}

/// An interval of the conjugate line containing every periodic point of `g`.
pub fn conjugate_search_interval(p: &MapParams) -> (f64, f64) {
    let y0 = map::logit(p.b());
    match map::critical_points(p, MapKind::Conjugate) {
        Ok(c) => {
            let g_min = map::eval_g(p, c.high);
            let g_max = map::eval_g(p, c.low);
            let lo = g_min.min(c.low).min(y0) - 1.0;
            let hi = g_max.max(c.high).max(y0) + 1.0;
            (lo, hi)
        }
        // monotone g: the fixed point is the only periodic point
        Err(_) => (y0 - 1.0, y0 + 1.0),
    }
}

/// Interior periodic orbits of `f_{a,b}` of period `n`, searched for in the
/// conjugate coordinate and reported in `x`.
///
/// `residual` is the cycle defect of the refined `g`-cycle; `multiplier` is
/// shared by both coordinate systems.
pub fn replicator_orbits(p: &MapParams, n: usize, grid_resolution: usize) -> Result<PeriodicSearch> {
    let g = Conjugate(*p);
    let f = Replicator(*p);
    let domain = [conjugate_search_interval(p)];
    let search = find_periodic(&g, n, &domain, grid_resolution, DEDUP_TOL_Y)?;
    let to_x = |o: &PeriodicOrbit| -> Result<PeriodicOrbit> {
        let mut points: Vec<f64> = o.points.iter().map(|&y| map::logit_inv(y)).collect();
        rotate_canonical(&mut points);
        let mut x = points[0];
        for _ in 0..points.len() {
            x = f.step(x)?;
        }
        Ok(PeriodicOrbit {
            least_period: o.least_period,
            mean: points.iter().sum::<f64>() / points.len() as f64,
            shooting_residual: (x - points[0]).abs(),
            points,
            multiplier: o.multiplier,
            residual: o.residual,
            stability: o.stability,
        })
    };
    let mut solutions: Vec<f64> = search.solutions.iter().map(|&y| map::logit_inv(y)).collect();
    solutions.sort_by(f64::total_cmp);
    let mut orbits = search.orbits.iter().map(to_x).collect::<Result<Vec<_>>>()?;
    let mut divisor_orbits = search.divisor_orbits.iter().map(to_x).collect::<Result<Vec<_>>>()?;
    orbits.sort_by(|a, b| a.points[0].total_cmp(&b.points[0]));
    divisor_orbits.sort_by(|a, b| a.least_period.cmp(&b.least_period).then(a.points[0].total_cmp(&b.points[0])));
    let tangencies = search
        .tangencies
        .iter()
        .map(|t| TangencySuspect { x: map::logit_inv(t.x), value: t.value })
        .collect();
    Ok(PeriodicSearch { period: n, grid_resolution, solutions, orbits, divisor_orbits, tangencies })
}

/// All interior orbits of `f_{a,b}` with least period `1..=max_period`.
pub fn replicator_orbits_up_to(p: &MapParams, max_period: usize) -> Result<Vec<PeriodicOrbit>> {
    let mut all = Vec::new();
    for n in 1..=max_period {
        all.extend(replicator_orbits(p, n, default_grid(n))?.orbits);
    }
    Ok(all)
}

pub fn classify(orbit: &PeriodicOrbit) -> Stability {
    Stability::from_multiplier(orbit.multiplier)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanLawViolation {
    pub period: usize,
    pub mean: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanLawReport {
    pub b: f64,
    pub tolerance: f64,
    pub checked: usize,
    /// Orbits through the boundary fixed points 0 or 1.
    pub excluded: usize,
    pub worst_deviation: f64,
    pub worst_period: Option<usize>,
    pub violations: Vec<MeanLawViolation>,
    pub pass: bool,
}

/// Checks `|mean − b| ≤ tol` for every orbit that avoids 0 and 1.
pub fn verify_mean_law(orbits: &[PeriodicOrbit], b: f64, tol: f64) -> MeanLawReport {
    let mut report = MeanLawReport {
        b,
        tolerance: tol,
        checked: 0,
        excluded: 0,
        worst_deviation: 0.0,
        worst_period: None,
        violations: Vec::new(),
        pass: true,
    };
    for o in orbits {
        if o.points.iter().any(|&x| x <= 0.0 || x >= 1.0) {
            report.excluded += 1;
            continue;
        }
        report.checked += 1;
        let dev = (o.mean - b).abs();
        if dev > report.worst_deviation || report.worst_period.is_none() {
            report.worst_deviation = dev;
            report.worst_period = Some(o.least_period);
        }
        if !(dev <= tol) {
            report.pass = false;
            report.violations.push(MeanLawViolation { period: o.least_period, mean: o.mean, deviation: dev });
        }
    }
    report
}

// ---------------------------------------------------------------------------
// attractors

/// Eventual behaviour of a window of iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodEstimate {
    pub period: usize,
    /// `false` when the window is still creeping towards the cycle: every
    /// residue class modulo `period` is monotone but not yet settled.
    pub converged: bool,
}

/// Least `p ≤ max_period` for which the window repeats to within
/// `tol·(1 + |s|)`, falling back to the least `p` whose residue classes are
/// all monotone (slow convergence, e.g. near a neutral cycle).
pub fn detect_period(series: &[f64], tol: f64, max_period: usize) -> Option<PeriodEstimate> {
    let len = series.len();
    let max_p = max_period.min(len / 2);
    for p in 1..=max_p {
        if (0..len - p).all(|k| (series[k + p] - series[k]).abs() <= tol * (1.0 + series[k].abs())) {
            return Some(PeriodEstimate { period: p, converged: true });
        }
    }
    let monotone = |r: usize, p: usize| {
        let sub: Vec<f64> = series[r..].iter().step_by(p).copied().collect();
        let up = sub.windows(2).all(|w| w[1] >= w[0]);
        let down = sub.windows(2).all(|w| w[1] <= w[0]);
        up || down
    };
    (1..=max_period.min(len / 8)).find(|&p| (0..p).all(|r| monotone(r, p))).map(|p| PeriodEstimate { period: p, converged: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attractor {
    /// `None` marks an aperiodic attractor candidate.
    pub period: Option<PeriodEstimate>,
    /// Cycle (canonical rotation) or, when aperiodic, the last window, in `x`.
    pub points: Vec<f64>,
    /// Same points in the conjugate coordinate.
    pub points_y: Vec<f64>,
    /// Critical seeds attracted here: `"x_max"` and/or `"x_min"`.
    pub seeds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorCensus {
    pub params: MapParams,
    pub transient: usize,
    pub window: usize,
    pub count: usize,
    pub attractors: Vec<Attractor>,
}

const MAX_DETECTED_PERIOD: usize = 64;

fn settle(p: &MapParams, seed: f64, transient: usize, window: usize) -> Vec<f64> {
    let mut y = seed;
    for _ in 0..transient {
        y = map::eval_g(p, y);
    }
    let mut out = Vec::with_capacity(window);
    for _ in 0..window {
        out.push(y);
        y = map::eval_g(p, y);
    }
    out
}

fn summarize(series: &[f64], cluster_tol: f64) -> (Option<PeriodEstimate>, Vec<f64>) {
    match detect_period(series, cluster_tol, MAX_DETECTED_PERIOD) {
        Some(est) => {
            let mut cycle = series[series.len() - est.period..].to_vec();
            rotate_canonical(&mut cycle);
            (Some(est), cycle)
        }
        None => (None, series.to_vec()),
    }
}

fn same_attractor(a: &(Option<PeriodEstimate>, Vec<f64>), b: &(Option<PeriodEstimate>, Vec<f64>), tol: f64) -> bool {
    match (a.0, b.0) {
        (Some(pa), Some(pb)) if pa.period == pb.period => {
            if pa.converged && pb.converged {
                same_cycle(&a.1, &b.1, tol * 1e2 * (1.0 + a.1.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
            } else {
                // slow cycles: the two windows must interleave point by point
                a.1.iter().zip(&b.1).all(|(x, y)| x.signum() == y.signum())
            }
        }
        (None, None) => {
            let hull = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            let (l1, h1) = hull(&a.1);
            let (l2, h2) = hull(&b.1);
            l1 <= h2 && l2 <= h1
        }
        _ => false,
    }
}

/// Distinct attracting sets reached from the two critical points.
pub fn attractor_census(p: &MapParams, transient: usize, window: usize, cluster_tol: f64) -> Result<AttractorCensus> {
    let c = map::critical_points(p, MapKind::Conjugate)?;
    if window < 16 {
        return Err(Error::InvalidParams("window must hold at least 16 points".into()));
    }
    let seeds = [("x_max", c.high), ("x_min", c.low)];
    let runs: Vec<(Option<PeriodEstimate>, Vec<f64>)> =
        seeds.iter().map(|&(_, y)| summarize(&settle(p, y, transient, window), cluster_tol)).collect();
    let mut attractors: Vec<Attractor> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        if let Some(j) = reps.iter().position(|&r| same_attractor(&runs[r], run, cluster_tol)) {
            attractors[j].seeds.push(seeds[i].0.into());
            continue;
        }
        reps.push(i);
        attractors.push(Attractor {
            period: run.0,
            points: run.1.iter().map(|&y| map::logit_inv(y)).collect(),
            points_y: run.1.clone(),
            seeds: vec![seeds[i].0.into()],
        });
    }
    Ok(AttractorCensus { params: *p, transient, window, count: attractors.len(), attractors })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationRow {
    pub a: f64,
    /// Attractor samples in `x`, first from the `x_max` seed then `x_min`.
    pub samples: Vec<f64>,
    /// Detected period per seed.
    pub periods: Vec<Option<PeriodEstimate>>,
}

impl BifurcationRow {
    /// Largest detected period over both seeds; `None` if either is aperiodic.
    pub fn period(&self) -> Option<usize> {
        self.periods.iter().map(|p| p.map(|e| e.period)).try_fold(0, |m, p| p.map(|v| m.max(v)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationTable {
    pub b: f64,
    pub transient: usize,
    pub rows: Vec<BifurcationRow>,
}

impl BifurcationTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("a,sample\n");
        for row in &self.rows {
            for &x in &row.samples {
                s.push_str(&format!("{},{}\n", fmt_f64(row.a), fmt_f64(x)));
            }
        }
        s
    }

    /// First scanned `a` whose period is `to` right after a row with period
    /// `from`.
    pub fn period_change(&self, from: usize, to: usize) -> Option<f64> {
        self.rows
            .windows(2)
            .find(|w| w[0].period() == Some(from) && w[1].period() == Some(to))
            .map(|w| w[1].a)
    }
}

/// Attractor samples over `a_steps` evenly spaced values of `a` in `a_range`
/// (inclusive), iterating both critical points in the conjugate coordinate.
pub fn bifurcation_scan(
    b: f64,
    a_range: (f64, f64),
    a_steps: usize,
    samples_per_a: usize,
    transient: usize,
) -> Result<BifurcationTable> {
    let (lo, hi) = a_range;
    if !(lo > 4.0 && hi >= lo) {
        return Err(Error::InvalidParams(format!("a range ({lo}, {hi}) must lie in (4, inf)")));
    }
    if a_steps == 0 || samples_per_a == 0 {
        return Err(Error::InvalidParams("a_steps and samples_per_a must be positive".into()));
    }
    MapParams::new(lo, b)?;
    let window = samples_per_a.max(256);
    let a_values = if a_steps == 1 { vec![lo] } else { map::uniform_grid(lo, hi, a_steps) };
    let rows = a_values
        .par_iter()
        .map(|&a| -> Result<BifurcationRow> {
            let p = MapParams::new(a, b)?;
            let c = map::critical_points(&p, MapKind::Conjugate)?;
            let mut samples = Vec::with_capacity(2 * samples_per_a);
            let mut periods = Vec::with_capacity(2);
            for seed in [c.high, c.low] {
                let series = settle(&p, seed, transient, window);
                periods.push(detect_period(&series, 1e-9, MAX_DETECTED_PERIOD));
                samples.extend(series[window - samples_per_a..].iter().map(|&y| map::logit_inv(y)));
            }
            Ok(BifurcationRow { a, samples, periods })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BifurcationTable { b, transient, rows })
}

//! Orbits, Birkhoff averages, Lyapunov exponents and bounded-sum probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Dynamics;
use crate::error::{Error, Result};
use crate::map::{self, MapParams};
use crate::output::{csv_row, fmt_f64};

/// Default number of discarded transient iterations.
pub const DEFAULT_BURN_IN: usize = 1000;

/// Derivative magnitudes below this count as a hit on a critical point.
pub const DEGENERATE_DERIVATIVE: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub label: String,
    pub x0: f64,
    /// `x_0, …, x_N`.
    pub points: Vec<f64>,
}

impl Orbit {
    /// Number of steps `N`.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() <= 1
    }

    /// CSV with columns `k, x_k, S_k` where `S_k = Σ_{i<k} ψ(x_i)`.
    pub fn to_csv(&self, psi: impl Fn(f64) -> f64) -> String {
        let mut out = String::from("k,x_k,S_k\n");
        let mut sum = 0.0;
        for (k, &x) in self.points.iter().enumerate() {
            out.push_str(&csv_row([k.to_string(), fmt_f64(x), fmt_f64(sum)]));
            out.push('\n');
            sum += psi(x);
        }
        out
    }
}

/// `x_0, T x_0, …, T^n x_0`.
pub fn iterate<M: Dynamics + ?Sized>(map: &M, x0: f64, n: usize) -> Result<Orbit> {
    let mut points = Vec::with_capacity(n + 1);
    let mut x = x0;
    // validates x0 against the map's domain
    map.step(x0)?;
    points.push(x);
    for _ in 0..n {
        x = map.step(x)?;
        points.push(x);
    }
    Ok(Orbit { label: map.label(), x0, points })
}

/// `(1/n) Σ_{i<n} φ(T^i x_0)`.
pub fn birkhoff_average<M, F>(map: &M, phi: F, x0: f64, n: usize) -> Result<f64>
where
    M: Dynamics + ?Sized,
    F: Fn(f64) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidParams("birkhoff_average needs n >= 1".into()));
    }
    let mut x = x0;
    let mut sum = 0.0;
    for _ in 0..n {
        sum += phi(x);
        x = map.step(x)?;
    }
    Ok(sum / n as f64)
}

/// `f^n(x)` via the closed form `x / (x + (1 − x) e^{a Σ_{i<n}(f^i(x) − b)})`,
/// with the iterates inside the sum produced by composition.
pub fn iterate_recursive_formula(p: &MapParams, x: f64, n: usize) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain { x, lo: 0.0, hi: 1.0 });
    }
    if n == 0 {
        return Err(Error::InvalidParams("iterate_recursive_formula needs n >= 1".into()));
    }
    let mut partial = 0.0;
    let mut xi = x;
    for step in 0..n {
        partial += xi - p.b();
        let u = map::logit(x) + p.a() * partial;
        if !u.is_finite() {
            return Err(Error::Overflow { steps: step + 1, partial_sum: partial });
        }
        if step + 1 < n {
            xi = map::eval_f(p, xi)?;
        }
    }
    Ok(map::logit_inv(map::logit(x) + p.a() * partial))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    pub steps: usize,
    /// Iterates whose derivative fell below [`DEGENERATE_DERIVATIVE`].
    pub degenerate_hits: usize,
}

/// `(1/n) Σ ln|T'(x_k)|` over `n` iterates following `burn_in` discarded ones.
pub fn lyapunov_exponent<M: Dynamics + ?Sized>(
    map: &M,
    x0: f64,
    n: usize,
    burn_in: usize,
) -> Result<LyapunovEstimate> {
    if n == 0 {
        return Err(Error::InvalidParams("lyapunov_exponent needs n >= 1".into()));
    }
    let mut x = x0;
    for _ in 0..burn_in {
        x = map.step(x)?;
    }
    let mut sum = 0.0;
    let mut degenerate_hits = 0;
    for _ in 0..n {
        let d = map.derivative(x)?.abs();
        if d < DEGENERATE_DERIVATIVE {
            degenerate_hits += 1;
            sum += DEGENERATE_DERIVATIVE.ln();
        } else {
            sum += d.ln();
        }
        x = map.step(x)?;
    }
    Ok(LyapunovEstimate { exponent: sum / n as f64, steps: n, degenerate_hits })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    GrowthSuspected,
}

/// Log-log slope of the running maximum above which growth is suspected.
/// A random walk gives about 1/2, linear drift 1, a bounded sum 0.
pub const GROWTH_EXPONENT_THRESHOLD: f64 = 0.25;

/// Evidence on whether the Birkhoff sums of `ψ` stay bounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoboundaryProbe {
    pub horizon: usize,
    pub mean: f64,
    /// `sup_{k ≤ N, x} |S_k(ψ)(x) − k·mean|`.
    pub value: f64,
    pub per_sample: Vec<f64>,
    /// `(k, running maximum over samples)` at geometrically spaced `k`.
    pub checkpoints: Vec<(usize, f64)>,
    /// Least-squares slope of `ln(running max)` against `ln k`.
    pub growth_exponent: f64,
    pub growth: GrowthClass,
}

impl CoboundaryProbe {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,running_max\n");
        for &(k, r) in &self.checkpoints {
            out.push_str(&csv_row([k.to_string(), fmt_f64(r)]));
            out.push('\n');
        }
        out
    }
}

fn checkpoints(horizon: usize) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut k = 1.0_f64;
    while (k as usize) < horizon {
        let ki = k as usize;
        if ks.last() != Some(&ki) {
            ks.push(ki);
        }
        k *= 1.25;
    }
    ks.push(horizon);
    ks
}

/// Running maxima of `|S_k − k·mean|` for one orbit, sampled at `ks`.
fn running_maxima(points: &[f64], psi: &(dyn Fn(f64) -> f64 + Sync), mean: f64, ks: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(ks.len());
    let mut sum = 0.0;
    let mut best = 0.0_f64;
    let mut next = 0;
    for (i, &x) in points.iter().enumerate() {
        sum += psi(x) - mean;
        best = best.max(sum.abs());
        let k = i + 1;
        while next < ks.len() && ks[next] == k {
            out.push(best);
            next += 1;
        }
    }
    out
}

/// Probes boundedness of Birkhoff sums along precomputed orbit segments; each
/// series must hold at least `horizon` points `x_0, …`.
pub fn coboundary_probe_series(
    series: &[Vec<f64>],
    psi: &(dyn Fn(f64) -> f64 + Sync),
    mean: f64,
    horizon: usize,
) -> Result<CoboundaryProbe> {
    if series.is_empty() || horizon == 0 {
        return Err(Error::Empty);
    }
    if let Some(s) = series.iter().find(|s| s.len() < horizon) {
        return Err(Error::LengthMismatch(s.len(), horizon));
    }
    let ks = checkpoints(horizon);
    let maxima: Vec<Vec<f64>> = series
        .par_iter()
        .map(|s| running_maxima(&s[..horizon], psi, mean, &ks))
        .collect();
    let per_sample: Vec<f64> = maxima.iter().map(|m| *m.last().unwrap()).collect();
    let checkpoints: Vec<(usize, f64)> = ks
        .iter()
        .enumerate()
        .map(|(j, &k)| (k, maxima.iter().map(|m| m[j]).fold(0.0, f64::max)))
        .collect();
    let value = per_sample.iter().copied().fold(0.0, f64::max);
    let growth_exponent = loglog_slope(&checkpoints, horizon);
    let growth = if growth_exponent < GROWTH_EXPONENT_THRESHOLD {
        GrowthClass::Bounded
    } else {
        GrowthClass::GrowthSuspected
    };
    Ok(CoboundaryProbe { horizon, mean, value, per_sample, checkpoints, growth_exponent, growth })
}

/// Slope fitted over the last two decades of the horizon.
fn loglog_slope(points: &[(usize, f64)], horizon: usize) -> f64 {
    let start = (horizon / 100).max(10);
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(k, r)| k >= start && r > 0.0)
        .map(|&(k, r)| ((k as f64).ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Iterates `map` from every sample for `horizon` steps and probes the
/// Birkhoff sums of `ψ` against `k·mean`.
pub fn coboundary_probe<M: Dynamics + ?Sized>(
    map: &M,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    x_samples: &[f64],
    horizon: usize,
    mean: f64,
) -> Result<CoboundaryProbe> {
    let series: Vec<Vec<f64>> = x_samples
        .par_iter()
        .map(|&x0| iterate(map, x0, horizon.saturating_sub(1)).map(|o| o.points))
        .collect::<Result<_>>()?;
    coboundary_probe_series(&series, psi, mean, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Conjugate, Generated, ReferenceMap, Replicator};
    use crate::map::GeneratorH;

    fn f(a: f64, b: f64) -> Replicator {
        Replicator(MapParams::new(a, b).unwrap())
    }

    #[test]
    fn fixed_points_stay_put() {
        let o = iterate(&f(8.0, 1.0 / 3.0), 1.0 / 3.0, 5).unwrap();
        assert_eq!(o.points, vec![1.0 / 3.0; 6]);
        let o = iterate(&f(8.0, 1.0 / 3.0), 0.5, 1).unwrap();
        assert_eq!(o.points[1], map::eval_f(&MapParams::new(8.0, 1.0 / 3.0).unwrap(), 0.5).unwrap());
        let g = Conjugate(MapParams::new(30.0, 1.0 / 3.0).unwrap());
        let y0 = map::logit(1.0 / 3.0);
        let o = iterate(&g, y0, 10).unwrap();
        for y in o.points {
            assert!((y - 2f64.ln()).abs() < 1e-14);
        }
        for x0 in [0.0, 1.0] {
            let o = iterate(&f(30.0, 0.4), x0, 100).unwrap();
            assert!(o.points.iter().all(|&x| x == x0));
        }
    }

    #[test]
    fn iteration_is_reproducible() {
        let m = f(30.0, 0.25);
        let a = iterate(&m, 0.123, 500).unwrap();
        let b = iterate(&m, 0.123, 500).unwrap();
        assert_eq!(a, b);
        for w in a.points.windows(2) {
            assert_eq!(m.step(w[0]).unwrap(), w[1]);
        }
    }

    #[test]
    fn generated_map_escape_is_an_error() {
        let g = GeneratorH::numeric("cubic", |x| x + x * x * x, |x| 1.0 + 3.0 * x * x, -2.0, 2.0)
            .unwrap();
        let m = Generated { generator: g, a: 10.0, b: 0.0 };
        assert!(matches!(iterate(&m, 1.9, 3), Err(Error::Range { .. })));
    }

    #[test]
    fn telescoping_shift_function() {
        let m = f(30.0, 0.25);
        let psi = |x: f64| x * x;
        let phi = |x: f64| psi(x) - psi(map::eval_f(&m.0, x).unwrap());
        for n in [1, 7, 100, 1000] {
            let avg = birkhoff_average(&m, phi, 0.4, n).unwrap();
            assert!(avg.abs() <= 2.0 / n as f64);
        }
    }

    #[test]
    fn stable_fixed_point_average() {
        let avg = birkhoff_average(&f(8.0, 1.0 / 3.0), |x| x, 0.5, 100_000).unwrap();
        assert!((avg - 1.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn chaotic_average_is_b() {
        let m = f(30.0, 0.25);
        let n = 1_000_000;
        let avg = birkhoff_average(&m, |x| x, 0.5, n).unwrap();
        assert!((avg - 0.25).abs() < 5e-3, "{avg}");
        // the mean-b law with the observed bound on |h(f^k x)|
        let o = iterate(&m, 0.5, n).unwrap();
        let bound = o.points.iter().map(|&x| map::logit(x).abs()).fold(0.0, f64::max);
        assert!((avg - 0.25).abs() <= 2.0 * bound / (30.0 * n as f64));
    }

    #[test]
    fn recursive_formula_matches_composition() {
        let p = MapParams::new(8.0, 1.0 / 3.0).unwrap();
        assert_eq!(iterate_recursive_formula(&p, 0.5, 1).unwrap(), map::eval_f(&p, 0.5).unwrap());
        let direct = *iterate(&Replicator(p), 0.5, 10).unwrap().points.last().unwrap();
        assert!((iterate_recursive_formula(&p, 0.5, 10).unwrap() - direct).abs() < 1e-9);
        for n in [1, 5, 50] {
            assert!((iterate_recursive_formula(&p, 1.0 / 3.0, n).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        }
        assert!(iterate_recursive_formula(&p, 0.0, 3).is_err());
    }

    #[test]
    fn lyapunov_regimes() {
        let l = lyapunov_exponent(&f(8.0, 1.0 / 3.0), 0.5, 10_000, DEFAULT_BURN_IN).unwrap();
        assert!((l.exponent - (7.0f64 / 9.0).ln()).abs() < 1e-2);
        let l = lyapunov_exponent(&f(8.0, 1.0 / 3.0), 0.0, 1000, 0).unwrap();
        assert!((l.exponent - 8.0 / 3.0).abs() < 1e-12);
        assert_eq!(l.degenerate_hits, 0);
    }

    #[test]
    fn lyapunov_counts_critical_hits() {
        let p = MapParams::new(8.0, 1.0 / 3.0).unwrap();
        // a map whose derivative vanishes identically on its orbit
        struct Flat;
        impl Dynamics for Flat {
            fn step(&self, _x: f64) -> Result<f64> {
                Ok(0.5)
            }
            fn derivative(&self, _x: f64) -> Result<f64> {
                Ok(0.0)
            }
            fn label(&self) -> String {
                "flat".into()
            }
        }
        let l = lyapunov_exponent(&Flat, 0.1, 1000, 0).unwrap();
        assert_eq!(l.degenerate_hits, 1000);
        assert!((l.exponent - DEGENERATE_DERIVATIVE.ln()).abs() < 1e-9);
        let _ = p;
    }

    #[test]
    fn rotation_probe_is_bounded() {
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let rot = ReferenceMap::Rotation { alpha };
        let psi = |x: f64| (2.0 * std::f64::consts::PI * x).cos();
        let probe = coboundary_probe(&rot, &psi, &[0.0, 0.3, 0.71], 100_000, 0.0).unwrap();
        // Fourier solution φ = Re(c e^{2πix}), c = 1/(1 − e^{2πiα}): |S_k| ≤ 2|c|
        let c = 1.0 / (2.0 - 2.0 * (2.0 * std::f64::consts::PI * alpha).cos()).sqrt();
        assert!(probe.value <= 2.0 * c + 1e-6, "{} vs {}", probe.value, 2.0 * c);
        assert_eq!(probe.growth, GrowthClass::Bounded);
        for w in probe.checkpoints.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn replicator_probe_is_bounded_by_logit_excursion() {
        let p = MapParams::new(30.0, 0.25).unwrap();
        let m = Replicator(p);
        let (lo, hi) = map::absorbing_interval(&p).unwrap();
        let samples: Vec<f64> = (1..8).map(|i| lo + (hi - lo) * i as f64 / 8.0).collect();
        let psi = |x: f64| x - 0.25;
        let probe = coboundary_probe(&m, &psi, &samples, 50_000, 0.0).unwrap();
        // S_k = (h(f^k x) − h(x))/a
        let mut bound = 0.0_f64;
        for &x in &samples {
            let o = iterate(&m, x, 50_000).unwrap();
            let hx = map::logit(x);
            for &xk in &o.points {
                bound = bound.max((map::logit(xk) - hx).abs() / 30.0);
            }
        }
        assert!(probe.value <= bound + 1e-9, "{} vs {bound}", probe.value);
        assert_eq!(probe.growth, GrowthClass::Bounded);
    }

    #[test]
    fn doubling_probe_grows() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let horizon = 200_000;
        let series: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let bits: Vec<bool> = (0..horizon + 64).map(|_| rng.random()).collect();
                crate::dynamics::doubling_expansion_orbit(&bits, horizon)
            })
            .collect();
        let psi = |x: f64| x - 0.5;
        let probe = coboundary_probe_series(&series, &psi, 0.0, horizon).unwrap();
        assert_eq!(probe.growth, GrowthClass::GrowthSuspected, "{}", probe.growth_exponent);
        assert!(probe.value > 20.0);
    }

    #[test]
    fn csv_columns() {
        let o = iterate(&f(8.0, 1.0 / 3.0), 0.5, 2).unwrap();
        let csv = o.to_csv(|x| x);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,x_k,S_k");
        assert_eq!(lines.len(), 4);
        let last: Vec<f64> = lines[3].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last[2], o.points[0] + o.points[1]);
    }
}

//! Finite-dimensional experiments on shift functions `ψ = φ − φ∘T`:
//! empirical invariant measures, invariance residuals, least-squares
//! coboundary fits over a function basis, and rank probes of the
//! measure–basis moment matrix.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::dynamics::{Dynamics, ReferenceMap};
use crate::error::{Error, Result};
use crate::map;
use crate::output::fmt_f64;
use crate::periodic::PeriodicOrbit;

/// Default ridge weight of the least-squares fit.
pub const DEFAULT_RIDGE: f64 = 1e-12;
/// Relative singular-value cutoff of the rank probe.
pub const RANK_TOL: f64 = 1e-8;
/// Condition estimate above which the ridge is raised and the fit flagged.
pub const CONDITION_LIMIT: f64 = 1e10;
/// Default polynomial degree of the basis.
pub const DEFAULT_DEGREE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureSource {
    PeriodicOrbit,
    LongOrbit,
    UniformGrid,
}

/// A finitely supported probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    atoms: Vec<(f64, f64)>,
    source: MeasureSource,
}

impl EmpiricalMeasure {
    /// Normalises non-negative weights to total mass 1.
    pub fn new(atoms: Vec<(f64, f64)>, source: MeasureSource) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty);
        }
        if atoms.iter().any(|&(x, w)| !x.is_finite() || !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParams("atoms need finite points and non-negative weights".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParams("total mass must be positive".into()));
        }
        let atoms = atoms.into_iter().map(|(x, w)| (x, w / total)).collect();
        Ok(Self { atoms, source })
    }

    /// Equal weights on the given points.
    pub fn uniform(points: &[f64], source: MeasureSource) -> Result<Self> {
        Self::new(points.iter().map(|&x| (x, 1.0)).collect(), source)
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn source(&self) -> MeasureSource {
        self.source
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn integrate(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(x, w)| w * phi(x)).sum()
    }
}

/// Uniform atoms on the points of a cycle.
pub fn orbit_measure(orbit: &PeriodicOrbit) -> EmpiricalMeasure {
    EmpiricalMeasure::uniform(&orbit.points, MeasureSource::PeriodicOrbit)
        .expect("a periodic orbit has at least one finite point")
}

/// Equal weights on `n` points of an orbit after `burn_in` steps.
pub fn long_orbit_measure<M: Dynamics + ?Sized>(map: &M, x0: f64, n: usize, burn_in: usize) -> Result<EmpiricalMeasure> {
    let mut x = x0;
    for _ in 0..burn_in {
        x = map.step(x)?;
    }
    let mut pts = Vec::with_capacity(n);
    for _ in 0..n {
        pts.push(x);
        x = map.step(x)?;
    }
    EmpiricalMeasure::uniform(&pts, MeasureSource::LongOrbit)
}

/// Equal weights on the cell midpoints of `[lo, hi)` split into `n` cells.
pub fn grid_measure(lo: f64, hi: f64, n: usize) -> Result<EmpiricalMeasure> {
    if n == 0 || !(lo < hi) {
        return Err(Error::InvalidParams(format!("bad grid [{lo}, {hi}) with {n} cells")));
    }
    let h = (hi - lo) / n as f64;
    let pts: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect();
    EmpiricalMeasure::uniform(&pts, MeasureSource::UniformGrid)
}

/// `n` points drawn uniformly from `[lo, hi]` with a seeded ChaCha stream;
/// the same seed always gives the same points.
pub fn random_samples(lo: f64, hi: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if !(lo < hi) {
        return Err(Error::InvalidParams(format!("empty interval [{lo}, {hi}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| rng.random_range(lo..=hi)).collect())
}

/// `|∫φ dμ − ∫φ∘T dμ|`.
pub fn invariance_residual<M: Dynamics + ?Sized>(
    measure: &EmpiricalMeasure,
    map: &M,
    phi: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for &(x, w) in measure.atoms() {
        acc += w * (phi(x) - phi(map.step(x)?));
    }
    Ok(acc.abs())
}

type BasisFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named list of real functions.
#[derive(Clone, Default)]
pub struct FunctionBasis {
    names: Vec<String>,
    funcs: Vec<BasisFn>,
}

impl fmt::Debug for FunctionBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionBasis").field("names", &self.names).finish()
    }
}

impl FunctionBasis {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Chebyshev polynomials `T_0 … T_degree` in `t = (2x − lo − hi)/(hi − lo)`.
    pub fn chebyshev(degree: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidParams(format!("empty interval [{lo}, {hi}]")));
        }
        let mut basis = Self::empty();
        for k in 0..=degree {
            basis = basis.with(&format!("T{k}"), move |x| {
                let t = (2.0 * x - lo - hi) / (hi - lo);
                chebyshev_t(k, t)
            });
        }
        Ok(basis)
    }

    /// `cos 2πkx, sin 2πkx` for `k = 1..=degree`.
    pub fn trigonometric(degree: usize) -> Self {
        let mut basis = Self::empty();
        for k in 1..=degree {
            let w = 2.0 * PI * k as f64;
            basis = basis.with(&format!("cos{k}"), move |x| (w * x).cos());
            basis = basis.with(&format!("sin{k}"), move |x| (w * x).sin());
        }
        basis
    }

    /// Appends the logit `h(x) = ln((1 − x)/x)`; only meaningful on
    /// intervals interior to `(0, 1)`.
    pub fn with_logit(self) -> Self {
        self.with("logit", map::logit)
    }

    pub fn with(mut self, name: &str, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.names.push(name.to_string());
        self.funcs.push(Arc::new(f));
        self
    }

    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn eval(&self, j: usize, x: f64) -> f64 {
        (self.funcs[j])(x)
    }

    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        self.funcs.iter().map(|f| f(x)).collect()
    }

    /// The first `len` members.
    pub fn truncated(&self, len: usize) -> Self {
        let len = len.min(self.len());
        Self { names: self.names[..len].to_vec(), funcs: self.funcs[..len].to_vec() }
    }
}

fn chebyshev_t(k: usize, t: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => t,
        _ => {
            let (mut prev, mut cur) = (1.0, t);
            for _ in 1..k {
                let next = 2.0 * t * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Outcome of a least-squares coboundary fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsqFit {
    /// Root-mean-square of `ψ − (φ − φ∘T)` over the samples.
    pub residual: f64,
    pub coefficients: Vec<(String, f64)>,
    pub ridge: f64,
    /// `σ_max/σ_min` of the ridge-augmented system.
    pub condition: f64,
    pub flagged: bool,
    pub samples: usize,
}

impl LsqFit {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.coefficients.iter().find(|(n, _)| n == name).map(|c| c.1)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).unwrap_or(Value::Null)
    }
}

fn ridge_solve(a: &DMatrix<f64>, y: &DVector<f64>, ridge: f64) -> Result<(DVector<f64>, f64)> {
    let (m, k) = a.shape();
    let s = ridge.sqrt();
    let aug = DMatrix::from_fn(m + k, k, |i, j| if i < m { a[(i, j)] } else if i - m == j { s } else { 0.0 });
    let rhs = DVector::from_fn(m + k, |i, _| if i < m { y[i] } else { 0.0 });
    let sv = aug.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let (q, r) = aug.qr().unpack();
    let qtb = q.transpose() * rhs;
    let c = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Numerical("singular triangular factor".into()))?;
    Ok((c, condition))
}

/// Fits `ψ ≈ φ − φ∘T` with `φ` in the span of `basis`, minimising the mean
/// square misfit over `samples` plus `ridge·|c|²`.
///
/// The ridge-augmented system `[A; √λ I] c = [ψ; 0]` is solved by QR rather
/// than through the normal equations. If its condition estimate exceeds
/// [`CONDITION_LIMIT`] the ridge is raised a thousandfold and the fit flagged.
pub fn coboundary_lsq<M: Dynamics + ?Sized>(
    map: &M,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    basis: &FunctionBasis,
    samples: &[f64],
) -> Result<LsqFit> {
    coboundary_lsq_ridge(map, psi, basis, samples, DEFAULT_RIDGE)
}

pub fn coboundary_lsq_ridge<M: Dynamics + ?Sized>(
    map: &M,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    basis: &FunctionBasis,
    samples: &[f64],
    ridge: f64,
) -> Result<LsqFit> {
    if basis.is_empty() || samples.is_empty() {
        return Err(Error::Empty);
    }
    let k = basis.len();
    let rows: Vec<(Vec<f64>, f64)> = samples
        .par_iter()
        .map(|&x| -> Result<(Vec<f64>, f64)> {
            let tx = map.step(x)?;
            let row = (0..k).map(|j| basis.eval(j, x) - basis.eval(j, tx)).collect();
            Ok((row, psi(x)))
        })
        .collect::<Result<Vec<_>>>()?;
    let m = rows.len();
    let a = DMatrix::from_fn(m, k, |i, j| rows[i].0[j]);
    let y = DVector::from_fn(m, |i, _| rows[i].1);
    if a.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("basis or psi not finite on the samples".into()));
    }
    let (mut c, mut condition) = ridge_solve(&a, &y, ridge)?;
    let mut used = ridge;
    let mut flagged = false;
    if condition > CONDITION_LIMIT {
        used = ridge * 1e3;
        flagged = true;
        (c, condition) = ridge_solve(&a, &y, used)?;
    }
    let misfit = &y - &a * &c;
    let residual = (misfit.norm_squared() / m as f64).sqrt();
    Ok(LsqFit {
        residual,
        coefficients: basis.names().iter().cloned().zip(c.iter().copied()).collect(),
        ridge: used,
        condition,
        flagged,
        samples: m,
    })
}

/// Residual of the fit as the basis grows: one point per prefix length.
pub fn residual_curve<M: Dynamics + ?Sized>(
    map: &M,
    psi: &(dyn Fn(f64) -> f64 + Sync),
    basis: &FunctionBasis,
    samples: &[f64],
) -> Result<Vec<(usize, f64)>> {
    (1..=basis.len())
        .map(|len| Ok((len, coboundary_lsq(map, psi, &basis.truncated(len), samples)?.residual)))
        .collect()
}

pub fn residual_curve_csv(curve: &[(usize, f64)]) -> String {
    let mut s = String::from("basis_size,residual\n");
    for &(n, r) in curve {
        s.push_str(&format!("{n},{}\n", fmt_f64(r)));
    }
    s
}

/// Singular-value rank of the moment matrix `M[i][j] = ∫ basis_j dμ_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub moments: Vec<Vec<f64>>,
    pub basis: Vec<String>,
    pub singular_values: Vec<f64>,
    pub tolerance: f64,
    pub effective_rank: usize,
}

impl RankReport {
    /// Rank of the chosen columns after subtracting each column's mean over
    /// the measures; 0 when those moments agree across all measures.
    pub fn centered_rank(&self, columns: &[usize]) -> usize {
        let rows = self.moments.len();
        if rows == 0 || columns.is_empty() {
            return 0;
        }
        let m = DMatrix::from_fn(rows, columns.len(), |i, j| {
            let col = columns[j];
            let mean = self.moments.iter().map(|r| r[col]).sum::<f64>() / rows as f64;
            self.moments[i][col] - mean
        });
        let scale = columns
            .iter()
            .flat_map(|&c| self.moments.iter().map(move |r| r[c].abs()))
            .fold(0.0, f64::max);
        let sv = m.singular_values();
        sv.iter().filter(|&&s| s > RANK_TOL * scale.max(f64::MIN_POSITIVE)).count()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "measures": self.moments.len(),
            "basis": self.basis,
            "singular_values": self.singular_values,
            "tolerance": self.tolerance,
            "effective_rank": self.effective_rank,
            "moments": self.moments,
        })
    }
}

pub fn measure_rank_probe(measures: &[EmpiricalMeasure], basis: &FunctionBasis) -> Result<RankReport> {
    if measures.is_empty() || basis.is_empty() {
        return Err(Error::Empty);
    }
    let moments: Vec<Vec<f64>> = measures
        .par_iter()
        .map(|mu| (0..basis.len()).map(|j| mu.integrate(|x| basis.eval(j, x))).collect())
        .collect();
    let m = DMatrix::from_fn(moments.len(), basis.len(), |i, j| moments[i][j]);
    let mut singular_values: Vec<f64> = m.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let tolerance = RANK_TOL * smax;
    let effective_rank = singular_values.iter().filter(|&&s| s > tolerance).count();
    Ok(RankReport { moments, basis: basis.names().to_vec(), singular_values, tolerance, effective_rank })
}

/// Rotation by `alpha`, refusing angles within machine scale of a rational
/// with denominator ≤ 1000.
pub fn rotation(alpha: f64) -> Result<ReferenceMap> {
    if !alpha.is_finite() {
        return Err(Error::InvalidParams("rotation angle must be finite".into()));
    }
    for q in 1..=1000u32 {
        let qa = alpha * q as f64;
        if (qa - qa.round()).abs() <= 1e-12 * q as f64 {
            return Err(Error::InvalidParams(format!("rotation angle {alpha} is rational to machine scale (q={q})")));
        }
    }
    Ok(ReferenceMap::Rotation { alpha })
}

pub fn doubling() -> ReferenceMap {
    ReferenceMap::Doubling
}

/// `(√5 − 1)/2`.
pub fn golden_angle() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

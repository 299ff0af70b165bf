//! Executes one [`RunConfig`] and writes its artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use meanorbit::certify;
use meanorbit::map::{self, MapKind};
use meanorbit::orbit;
use meanorbit::periodic;
use meanorbit::shiftlab::{self, FunctionBasis};
use meanorbit::symbolic;
use meanorbit::{Conjugate, MapParams, Replicator};
use serde_json::{json, Value};
use thiserror::Error;

use crate::config::{Command, MapChoice, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Lab(#[from] meanorbit::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Lab(e) => match e {
                meanorbit::Error::InvalidParams(_)
                | meanorbit::Error::NoCriticalPoints { .. }
                | meanorbit::Error::Domain { .. }
                | meanorbit::Error::Inadmissible(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } => 1,
        }
    }
}

/// What a run produced.
pub struct Report {
    pub summary: String,
    /// Outcome of the command's check, when it has one.
    pub check: Option<bool>,
    pub outputs: Vec<PathBuf>,
}

struct Writer<'a> {
    dir: &'a Path,
    hash: String,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    fn csv(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.write(name, &format!("# config_hash={}\n{body}", self.hash))
    }

    fn json(&mut self, name: &str, value: Value) -> Result<(), CliError> {
        let mut value = value;
        match value.as_object_mut() {
            Some(obj) => {
                obj.insert("config_hash".into(), json!(self.hash));
            }
            None => value = json!({ "config_hash": self.hash, "result": value }),
        }
        let text = serde_json::to_string_pretty(&value).expect("json serialises");
        self.write(name, &(text + "\n"))
    }
}

fn params(a: f64, b: f64) -> Result<MapParams, CliError> {
    MapParams::new(a, b).map_err(|e| CliError::Config(e.to_string()))
}

/// Runs the configured experiment and writes outputs plus `manifest.json`.
pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    let start = Instant::now();
    let dir = &config.common.out_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
    let hash = config.hash();
    let mut w = Writer { dir, hash: hash.clone(), written: Vec::new() };
    let (summary, check) = dispatch(config, &mut w)?;
    let manifest = json!({
        "config": config,
        "config_hash": hash,
        "versions": { "meanorbit": meanorbit::VERSION, "meanorbit-cli": env!("CARGO_PKG_VERSION") },
        "outputs": w.written.iter().map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned())).collect::<Vec<_>>(),
        "check": check,
        "timings": { "elapsed_seconds": start.elapsed().as_secs_f64() },
    });
    let manifest_path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("json serialises") + "\n";
    fs::write(&manifest_path, text).map_err(|source| CliError::Io { path: manifest_path.clone(), source })?;
    let mut outputs = w.written;
    outputs.push(manifest_path);
    Ok(Report { summary, check, outputs })
}

fn dispatch(config: &RunConfig, w: &mut Writer<'_>) -> Result<(String, Option<bool>), CliError> {
    let seed = config.common.seed;
    match &config.command {
        Command::Orbit { params: pa, map: choice, x0, n, burn_in } => {
            let p = params(pa.a, pa.b)?;
            let b = p.b();
            let (o, lyap) = match choice {
                MapChoice::Replicator => {
                    let m = Replicator(p);
                    (orbit::iterate(&m, *x0, *n)?, orbit::lyapunov_exponent(&m, *x0, (*n).max(1), *burn_in)?)
                }
                MapChoice::Conjugate => {
                    let m = Conjugate(p);
                    (orbit::iterate(&m, *x0, *n)?, orbit::lyapunov_exponent(&m, *x0, (*n).max(1), *burn_in)?)
                }
            };
            let average = if *n > 0 {
                o.points[..*n].iter().sum::<f64>() / *n as f64
            } else {
                o.points[0]
            };
            w.csv("orbit.csv", &o.to_csv(|x| x - b))?;
            w.json(
                "orbit.json",
                json!({ "label": o.label, "x0": x0, "steps": n, "average": average, "lyapunov": lyap }),
            )?;
            Ok((format!("{}: average {average:.12}, lyapunov {:.6}", o.label, lyap.exponent), None))
        }
        Command::Periodic { params: pa, period, map: choice, grid } => {
            let p = params(pa.a, pa.b)?;
            let grid = grid.unwrap_or_else(|| periodic::default_grid(*period));
            let search = match choice {
                MapChoice::Replicator => periodic::replicator_orbits(&p, *period, grid)?,
                MapChoice::Conjugate => periodic::find_periodic(
                    &Conjugate(p),
                    *period,
                    &[periodic::conjugate_search_interval(&p)],
                    grid,
                    periodic::DEDUP_TOL_Y,
                )?,
            };
            w.json("periodic.json", search.to_json())?;
            Ok((
                format!(
                    "period {}: {} solutions, {} orbits of least period {}, {} tangency suspects",
                    period,
                    search.solutions.len(),
                    search.orbits.len(),
                    period,
                    search.tangencies.len()
                ),
                None,
            ))
        }
        Command::Bifurcation { b, a_min, a_max, a_steps, samples, transient } => {
            let table = periodic::bifurcation_scan(*b, (*a_min, *a_max), *a_steps, *samples, *transient)?;
            w.csv("bifurcation.csv", &table.to_csv())?;
            let change = table.period_change(1, 2);
            Ok((format!("{} rows, period 1 -> 2 at a = {change:?}", table.rows.len()), None))
        }
        Command::Certify { params: pa, depth, samples } => {
            let p = params(pa.a, pa.b)?;
            let cert = certify::certify_with_samples(&p, *depth, *samples)?;
            w.json("certificate.json", cert.to_json())?;
            if cert.pass {
                let k = certify::approximate_k(&cert, *depth)?;
                w.csv("k_approximation.csv", &k.to_csv())?;
            }
            let summary = match cert.endpoint_expansion {
                Some(e) => format!("pass={} product={:.4} expansion_margin={:?}", cert.pass, e.product, cert.expansion_margin()),
                None => format!("pass={} {}", cert.pass, cert.diagnostics.join("; ")),
            };
            Ok((summary, Some(cert.pass)))
        }
        Command::FindA0 { b, a_min, a_max, factor } => {
            if !(*factor > 1.0 && *a_min > 4.0 && a_max >= a_min) {
                return Err(CliError::Config("need factor > 1 and 4 < a_min <= a_max".into()));
            }
            let mut grid = Vec::new();
            let mut a = *a_min;
            while a <= *a_max {
                grid.push(a);
                a *= factor;
            }
            let report = certify::find_a0(*b, &grid)?;
            w.json("find_a0.json", report.to_json())?;
            Ok((format!("threshold {:?} ({})", report.threshold, report.note), Some(report.threshold.is_some())))
        }
        Command::Symbolic { max_n } => {
            if *max_n == 0 || *max_n > symbolic::MAX_COUNT_N {
                return Err(CliError::Config(format!("max-n must lie in 1..={}", symbolic::MAX_COUNT_N)));
            }
            let rows = (1..=*max_n)
                .map(|n| {
                    let t = symbolic::counts(n)?;
                    let mut v = t.to_json();
                    v["exhaustively_verified"] = json!(t.exhaustively_verified);
                    Ok(v)
                })
                .collect::<Result<Vec<_>, meanorbit::Error>>()?;
            let last = rows.last().cloned().unwrap_or(Value::Null);
            w.json("symbolic.json", json!({ "max_n": max_n, "rows": rows }))?;
            Ok((format!("B_{max_n} = {}", last["B_n"]), None))
        }
        Command::Shiftlab { params: pa, degree, no_logit, max_period, grid, random } => {
            let p = params(pa.a, pa.b)?;
            let b = p.b();
            let f = Replicator(p);
            let (lo, hi) = map::absorbing_interval(&p).map_err(|e| CliError::Config(e.to_string()))?;
            let delta = 1e-3 * (hi - lo);
            let mut samples = map::uniform_grid(lo + delta, hi - delta, (*grid).max(2));
            samples.extend(shiftlab::random_samples(lo + delta, hi - delta, *random, seed)?);
            let orbits = periodic::replicator_orbits_up_to(&p, *max_period)?;
            for o in &orbits {
                samples.extend_from_slice(&o.points);
            }
            let mut basis = FunctionBasis::chebyshev(*degree, lo, hi)?;
            if !no_logit {
                basis = basis.with_logit();
            }
            let psi = move |x: f64| x - b;
            let fit = shiftlab::coboundary_lsq(&f, &psi, &basis, &samples)?;
            let curve = shiftlab::residual_curve(&f, &psi, &basis, &samples)?;
            w.csv("shiftlab_residuals.csv", &shiftlab::residual_curve_csv(&curve))?;
            w.json("shiftlab_fit.json", fit.to_json())?;
            let measures: Vec<_> = orbits.iter().map(shiftlab::orbit_measure).collect();
            let poly = FunctionBasis::chebyshev(*degree, 0.0, 1.0)?;
            if !measures.is_empty() {
                let rank = shiftlab::measure_rank_probe(&measures, &poly)?;
                let centered_mean = shiftlab::measure_rank_probe(
                    &measures,
                    &FunctionBasis::empty().with("x", |x| x),
                )?
                .centered_rank(&[0]);
                let mut v = rank.to_json();
                v["centered_mean_rank"] = json!(centered_mean);
                w.json("shiftlab_rank.json", v)?;
            }
            let logit = fit.coefficient("logit");
            Ok((format!("residual {:.3e}, logit coefficient {logit:?}", fit.residual), None))
        }
        Command::ConjugacyCheck { params: pa, grid } => {
            let p = params(pa.a, pa.b)?;
            if *grid < 2 {
                return Err(CliError::Config("grid needs at least 2 points".into()));
            }
            let pts = map::uniform_grid(0.01, 0.99, *grid);
            let conj = map::conjugacy_residual(&p, &pts)?;
            let sym = map::symmetry_residual(&p, &map::uniform_grid(0.0, 1.0, *grid))?;
            let pass = conj <= 1e-10 && sym <= 1e-12;
            w.json(
                "conjugacy.json",
                json!({ "a": p.a(), "b": p.b(), "grid": grid, "conjugacy_residual": conj, "symmetry_residual": sym, "pass": pass }),
            )?;
            Ok((format!("conjugacy {conj:.3e}, symmetry {sym:.3e}"), Some(pass)))
        }
        Command::MeanLaw { params: pa, max_period, tol } => {
            let p = params(pa.a, pa.b)?;
            let orbits = periodic::replicator_orbits_up_to(&p, *max_period)?;
            let report = periodic::verify_mean_law(&orbits, p.b(), *tol);
            let critical = map::critical_points(&p, MapKind::Replicator).ok();
            w.json(
                "mean_law.json",
                json!({
                    "a": p.a(),
                    "b": p.b(),
                    "max_period": max_period,
                    "critical_points": critical,
                    "report": report,
                    "orbits": orbits.iter().map(|o| o.to_json()).collect::<Vec<_>>(),
                }),
            )?;
            Ok((
                format!("{} orbits, worst |mean - b| = {:.3e}", report.checked, report.worst_deviation),
                Some(report.pass),
            ))
        }
    }
}

//! Command-line schema. The same structure is the JSON run configuration, so
//! a run can be replayed from its manifest.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Parser)]
#[command(name = "meanorbit", version, about = "Numerical laboratory for replicator maps with a common orbit mean")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,

    /// Read the whole run configuration from a JSON file instead of flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(flatten)]
    pub common: Common,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct Common {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,

    /// Seed for sampled experiments.
    #[arg(long, global = true, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,

    /// Exit with status 1 when the experiment's check fails.
    #[arg(long, global = true)]
    #[serde(default)]
    pub require_pass: bool,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}

/// A complete, replayable run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    #[serde(flatten)]
    pub common: Common,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON form without `out_dir`, in hex, so a
    /// replay into another directory reproduces the same bytes.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serialises");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("out_dir");
        }
        let canonical = value.to_string();
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapChoice {
    Replicator,
    Conjugate,
}

/// `a` and `b` of the replicator family.
#[derive(Debug, Clone, Copy, PartialEq, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub a: f64,
    /// Decimal or exact fraction such as 1/3.
    #[arg(long, value_parser = parse_b)]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Iterate a map and write the orbit with running sums of x − b.
    Orbit {
        #[command(flatten)]
        #[serde(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "replicator")]
        map: MapChoice,
        #[arg(long, default_value_t = 0.3)]
        x0: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Burn-in before the Lyapunov estimate.
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
    },
    /// Periodic orbits of one period.
    Periodic {
        #[command(flatten)]
        #[serde(flatten)]
        params: ParamArgs,
        #[arg(long)]
        period: usize,
        #[arg(long, value_enum, default_value = "replicator")]
        map: MapChoice,
        /// Grid points (default max(10^4, 500·2^n)).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Attractor samples over a range of a.
    Bifurcation {
        #[arg(long, value_parser = parse_b)]
        b: f64,
        #[arg(long, default_value_t = 5.0)]
        a_min: f64,
        #[arg(long, default_value_t = 40.0)]
        a_max: f64,
        #[arg(long, default_value_t = 400)]
        a_steps: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        transient: usize,
    },
    /// Hyperbolicity certificate for g_{a,b}.
    Certify {
        #[command(flatten)]
        #[serde(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Samples per component in the expansion check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Smallest a on a geometric grid where the certificate passes.
    FindA0 {
        #[arg(long, value_parser = parse_b)]
        b: f64,
        #[arg(long, default_value_t = 4.1)]
        a_min: f64,
        #[arg(long, default_value_t = 200.0)]
        a_max: f64,
        #[arg(long, default_value_t = 1.05)]
        factor: f64,
    },
    /// Counts of admissible and periodic golden-mean words.
    Symbolic {
        #[arg(long, default_value_t = 12)]
        max_n: u64,
    },
    /// Coboundary fits, residual curve and rank probe.
    Shiftlab {
        #[command(flatten)]
        #[serde(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 16)]
        degree: usize,
        /// Leave the logit out of the basis.
        #[arg(long)]
        no_logit: bool,
        /// Periodic orbits up to this period supply atoms.
        #[arg(long, default_value_t = 4)]
        max_period: usize,
        /// Uniform grid points in the absorbing interval.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Extra seeded random points in the absorbing interval.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
    /// Conjugacy and mirror-symmetry residuals on a grid.
    ConjugacyCheck {
        #[command(flatten)]
        #[serde(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Mean of every interior periodic orbit up to a period.
    MeanLaw {
        #[command(flatten)]
        #[serde(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 8)]
        max_period: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Orbit { .. } => "orbit",
            Command::Periodic { .. } => "periodic",
            Command::Bifurcation { .. } => "bifurcation",
            Command::Certify { .. } => "certify",
            Command::FindA0 { .. } => "find-a0",
            Command::Symbolic { .. } => "symbolic",
            Command::Shiftlab { .. } => "shiftlab",
            Command::ConjugacyCheck { .. } => "conjugacy-check",
            Command::MeanLaw { .. } => "mean-law",
        }
    }
}

/// Parses `b` as a decimal or as `p/q`.
pub fn parse_b(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in {s:?}"))?;
            if q == 0 {
                return Err("zero denominator".into());
            }
            p as f64 / q as f64
        }
        None => s.parse::<f64>().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(format!("b must lie in (0, 1), got {value}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_parse_exactly() {
        assert_eq!(parse_b("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_b(" 2 / 7 ").unwrap(), 2.0 / 7.0);
        assert_eq!(parse_b("0.25").unwrap(), 0.25);
        assert!(parse_b("3/2").is_err());
        assert!(parse_b("1/0").is_err());
        assert!(parse_b("x").is_err());
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            command: Command::Certify { params: ParamArgs { a: 30.0, b: 1.0 / 3.0 }, depth: 10, samples: 1000 },
            common: Common { out_dir: "out".into(), seed: 3, require_pass: true },
        };
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_eq!(cfg.hash().len(), 64);
        let moved = RunConfig { common: Common { out_dir: "elsewhere".into(), ..cfg.common.clone() }, ..cfg.clone() };
        assert_eq!(moved.hash(), cfg.hash());
        let reseeded = RunConfig { common: Common { seed: 4, ..cfg.common.clone() }, ..cfg.clone() };
        assert_ne!(reseeded.hash(), cfg.hash());
    }
}

//! A common interface over the maps the laboratory iterates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{self, GeneratorH, MapParams};

/// A one-dimensional map with a derivative.
pub trait Dynamics: Send + Sync {
    fn step(&self, x: f64) -> Result<f64>;

    fn derivative(&self, x: f64) -> Result<f64>;

    fn label(&self) -> String;
}

impl<T: Dynamics + ?Sized> Dynamics for &T {
    fn step(&self, x: f64) -> Result<f64> {
        (**self).step(x)
    }
    fn derivative(&self, x: f64) -> Result<f64> {
        (**self).derivative(x)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

impl<T: Dynamics + ?Sized> Dynamics for Box<T> {
    fn step(&self, x: f64) -> Result<f64> {
        (**self).step(x)
    }
    fn derivative(&self, x: f64) -> Result<f64> {
        (**self).derivative(x)
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// `f_{a,b}` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Replicator(pub MapParams);

impl Dynamics for Replicator {
    fn step(&self, x: f64) -> Result<f64> {
        map::eval_f(&self.0, x)
    }
    fn derivative(&self, x: f64) -> Result<f64> {
        map::eval_f_prime(&self.0, x)
    }
    fn label(&self) -> String {
        format!("f{}", self.0)
    }
}

/// `g_{a,b}` on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conjugate(pub MapParams);

impl Dynamics for Conjugate {
    fn step(&self, y: f64) -> Result<f64> {
        if y.is_nan() {
            return Err(Error::Domain { x: y, lo: f64::NEG_INFINITY, hi: f64::INFINITY });
        }
        Ok(map::eval_g(&self.0, y))
    }
    fn derivative(&self, y: f64) -> Result<f64> {
        Ok(map::eval_g_prime(&self.0, y))
    }
    fn label(&self) -> String {
        format!("g{}", self.0)
    }
}

/// `f_h(x) = h⁻¹(h(x) + a(x − b))` for a user generator `h`.
#[derive(Debug, Clone)]
pub struct Generated {
    pub generator: GeneratorH,
    pub a: f64,
    pub b: f64,
}

impl Dynamics for Generated {
    fn step(&self, x: f64) -> Result<f64> {
        map::eval_fh(&self.generator, self.a, self.b, x)
    }
    fn derivative(&self, x: f64) -> Result<f64> {
        map::eval_fh_prime(&self.generator, self.a, self.b, x)
    }
    fn label(&self) -> String {
        format!("f_h[{}](a={}, b={})", self.generator.name(), self.a, self.b)
    }
}

/// Reference systems on the unit circle `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ReferenceMap {
    /// `x ↦ x + α mod 1`.
    Rotation { alpha: f64 },
    /// `x ↦ 2x mod 1`.
    Doubling,
}

impl Dynamics for ReferenceMap {
    fn step(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::Domain { x, lo: 0.0, hi: 1.0 });
        }
        let y = match *self {
            ReferenceMap::Rotation { alpha } => (x + alpha).rem_euclid(1.0),
            ReferenceMap::Doubling => (2.0 * x).rem_euclid(1.0),
        };
        // rem_euclid can round up to exactly 1.0
        Ok(if y >= 1.0 { 0.0 } else { y })
    }
    fn derivative(&self, _x: f64) -> Result<f64> {
        Ok(match self {
            ReferenceMap::Rotation { .. } => 1.0,
            ReferenceMap::Doubling => 2.0,
        })
    }
    fn label(&self) -> String {
        match self {
            ReferenceMap::Rotation { alpha } => format!("rotation(alpha={alpha})"),
            ReferenceMap::Doubling => "doubling".into(),
        }
    }
}

/// Doubling-map orbit read off a binary expansion: `x_k = Σ_i bits[k+i] 2^{−i−1}`
/// over a 53-bit window. Iterating `2x mod 1` in `f64` instead runs out of
/// bits after 53 steps.
pub fn doubling_expansion_orbit(bits: &[bool], len: usize) -> Vec<f64> {
    const WINDOW: usize = 53;
    assert!(bits.len() >= len + WINDOW - 1, "need {} bits", len + WINDOW - 1);
    let scale = 0.5f64.powi(WINDOW as i32);
    let mask = (1u64 << WINDOW) - 1;
    let mut word: u64 = 0;
    for &b in &bits[..WINDOW] {
        word = (word << 1) | b as u64;
    }
    let mut out = Vec::with_capacity(len);
    for k in 0..len {
        out.push(word as f64 * scale);
        if k + 1 < len {
            word = ((word << 1) & mask) | bits[k + WINDOW] as u64;
        }
    }
    out
}

/// The doubling-map cycle through `k/(2^n − 1)`, in exact rational arithmetic.
pub fn doubling_cycle(n: u32, k: u64) -> Vec<f64> {
    assert!((1..=62).contains(&n), "period out of range");
    let q = (1u64 << n) - 1;
    let mut num = k % q;
    let mut out = Vec::with_capacity(n as usize);
    for _ in 0..n {
        out.push(num as f64 / q as f64);
        num = (2 * num) % q;
    }
    out
}

use thiserror::Error;

/// Errors raised by the laboratory's numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument {x} outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("value {y} outside the range ({lo}, {hi}) of the generator")]
    Range { y: f64, lo: f64, hi: f64 },

    #[error("no critical points: a = {a} <= 4, the map is monotone")]
    NoCriticalPoints { a: f64 },

    #[error("Schwarzian derivative is singular at the critical point {x}")]
    SingularAtCritical { x: f64 },

    #[error("root not bracketed on [{lo}, {hi}] for target {target}")]
    RootNotBracketed { lo: f64, hi: f64, target: f64 },

    #[error("exponent overflow after {steps} steps (partial sum {partial_sum})")]
    Overflow { steps: usize, partial_sum: f64 },

    #[error("orbit escaped the invariant set at step {step} (value {y})")]
    EscapedK { step: usize, y: f64 },

    #[error("inadmissible word {0}")]
    Inadmissible(String),

    #[error("empty input")]
    Empty,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("certificate failed: {0}")]
    CertificateFailed(String),

    #[error("{0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

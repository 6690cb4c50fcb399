//! Numerical integration, differentiation and root finding.
//!
//! All routines take plain `Fn(f64) -> f64` evaluators. A non-finite value
//! returned by an evaluator aborts the routine with
//! [`QuadratureError::NonFinite`] instead of propagating NaN.

mod derivative;
mod kronrod;
mod roots;

pub use derivative::{differentiate_time, differentiate_time_within, Derivative};
pub use kronrod::{
    integrate_abs_finite, integrate_abs_semi_infinite, integrate_finite, integrate_finite_with,
    integrate_semi_infinite, integrate_semi_infinite_with, IntegrationOptions, SemiInfiniteOptions,
};
pub use roots::{find_zero, find_zero_with, sign_scan, RootOptions, ScanOptions};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl IntegrationResult {
    fn zero() -> Self {
        IntegrationResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }

    fn accumulate(&mut self, other: &IntegrationResult) {
        self.value += other.value;
        self.abs_error_estimate += other.abs_error_estimate;
        self.evaluations += other.evaluations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroKind {
    SignChange,
    TangentialZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub location: f64,
    pub bracket_width: f64,
    pub classification: ZeroKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadratureError {
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("evaluator returned a non-finite value at {0}")]
    NonFinite(f64),
    #[error("evaluation budget exhausted (best estimate {} +/- {})", best.value, best.abs_error_estimate)]
    BudgetExceeded { best: IntegrationResult },
    #[error("no decay detected after truncation at {upper} (last increment {increment})")]
    NoDecay { upper: f64, increment: f64 },
    #[error("no zero found in [{0}, {1}]")]
    NoZero(f64, f64),
}

pub type Result<T> = std::result::Result<T, QuadratureError>;

pub(crate) fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(QuadratureError::NonFinite(x))
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(QuadratureError::InvalidInterval(a, b))
    }
}

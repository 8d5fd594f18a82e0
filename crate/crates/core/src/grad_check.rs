//! Central-difference gradient verification.
//!
//! `run_suite` drives every differentiable operator plus the full lifting
//! layer composition against finite differences and reports the worst
//! relative error per check.

use crate::error::{Error, Result};
use crate::signal::TemporalSignal;

/// Central difference of a scalar function at `x`, one coordinate at a time.
pub fn finite_diff_grad<F>(mut f: F, x: &TemporalSignal, eps: f64) -> Result<TemporalSignal>
where
    F: FnMut(&TemporalSignal) -> Result<f64>,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("finite-difference eps must be positive, got {eps}")));
    }
    let mut probe = x.clone();
    let (b, c, t) = x.shape();
    let mut grad = vec![0.0; x.numel()];
    for i in 0..x.numel() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + eps;
        let hi = f(&probe)?;
        probe.data_mut()[i] = orig - eps;
        let lo = f(&probe)?;
        probe.data_mut()[i] = orig;
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    TemporalSignal::new(b, c, t, grad)
}

/// Central difference over a flat coordinate vector.
pub fn finite_diff_flat<F>(mut f: F, x: &[f64], eps: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config(format!("finite-difference eps must be positive, got {eps}")));
    }
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + eps;
        let hi = f(&probe)?;
        probe[i] = orig - eps;
        let lo = f(&probe)?;
        probe[i] = orig;
        grad[i] = (hi - lo) / (2.0 * eps);
    }
    Ok(grad)
}

/// `|a - b| / max(1, |a|, |b|)`: absolute near zero, relative at scale.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs())
}

pub fn max_rel_err(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(&x, &y)| rel_err(x, y))
        .fold(0.0, f64::max)
}

/// Outcome of one suite entry.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub max_rel_err: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.max_rel_err.is_finite() && self.max_rel_err <= self.tolerance
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(CheckResult::passed)
    }

    pub fn worst(&self) -> Option<&CheckResult> {
        self.checks.iter().max_by(|a, b| {
            (a.max_rel_err / a.tolerance)
                .partial_cmp(&(b.max_rel_err / b.tolerance))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

mod suite;
pub use suite::run_suite;

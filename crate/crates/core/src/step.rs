//! Step-size rules: the `2/(t+2)` schedule and bisection line search.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::losses::{LossKind, LossModel};

pub const DEFAULT_LINE_SEARCH_TOL: f64 = 1e-10;

/// Cap on unconstrained (baseline) steps.
pub const MAX_RAY_STEP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepPolicy {
    /// `γ_t = 2/(t+2)`.
    Schedule,
    /// Exact minimization along the direction, to within `tol`.
    LineSearch { tol: f64 },
}

impl StepPolicy {
    pub fn line_search() -> Self {
        StepPolicy::LineSearch {
            tol: DEFAULT_LINE_SEARCH_TOL,
        }
    }

    pub fn tol(&self) -> f64 {
        match *self {
            StepPolicy::Schedule => DEFAULT_LINE_SEARCH_TOL,
            StepPolicy::LineSearch { tol } => tol,
        }
    }
}

/// `2/(t+2)` for `t ≥ 1`.
pub fn step_schedule(t: usize) -> Result<f64> {
    if t < 1 {
        return Err(Error::InvalidParameter(
            "iteration index starts at 1".into(),
        ));
    }
    Ok(2.0 / (t as f64 + 2.0))
}

/// `φ'(γ) = (1/m) Σ d_i l'(p_i + γ d_i, y_i)`.
#[inline]
fn slope(kind: LossKind, preds: &[f64], direction: &[f64], targets: &[f64], gamma: f64) -> f64 {
    let mut acc = 0.0;
    for ((&p, &d), &y) in preds.iter().zip(direction).zip(targets) {
        if d != 0.0 {
            acc += d * kind.derivative(p + gamma * d, y);
        }
    }
    acc / preds.len() as f64
}

fn check_inputs(preds: &[f64], direction: &[f64], targets: &[f64], tol: f64) -> Result<()> {
    check_len(preds.len(), direction.len())?;
    check_len(preds.len(), targets.len())?;
    if direction.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("line search direction"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "line search tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// Minimizes `φ(γ) = L(preds + γ·direction)` over `[0, upper]` by bisection
/// on the monotone derivative. Returns an endpoint exactly when `φ'` does not
/// change sign on the interval.
pub fn line_search_bounded(
    loss: &LossModel,
    preds: &[f64],
    direction: &[f64],
    targets: &[f64],
    upper: f64,
    tol: f64,
) -> Result<f64> {
    check_inputs(preds, direction, targets, tol)?;
    if !(upper >= 0.0) || !upper.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bad line search bound {upper}"
        )));
    }
    let kind = loss.kind;
    if upper == 0.0 || direction.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }
    if slope(kind, preds, direction, targets, 0.0) >= 0.0 {
        return Ok(0.0);
    }
    if slope(kind, preds, direction, targets, upper) <= 0.0 {
        return Ok(upper);
    }
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(kind, preds, direction, targets, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Line search over `γ ∈ [0, 1]`.
pub fn line_search(
    loss: &LossModel,
    preds: &[f64],
    direction: &[f64],
    targets: &[f64],
    tol: f64,
) -> Result<f64> {
    line_search_bounded(loss, preds, direction, targets, 1.0, tol)
}

/// Minimizes `φ(α)` over `α ≥ 0` (capped at [`MAX_RAY_STEP`]); the bracket
/// doubles until the slope turns nonnegative, then bisects to relative `tol`.
pub fn line_search_ray(
    loss: &LossModel,
    preds: &[f64],
    direction: &[f64],
    targets: &[f64],
    tol: f64,
) -> Result<f64> {
    check_inputs(preds, direction, targets, tol)?;
    let kind = loss.kind;
    if direction.iter().all(|&d| d == 0.0) || slope(kind, preds, direction, targets, 0.0) >= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while slope(kind, preds, direction, targets, hi) < 0.0 {
        if hi >= MAX_RAY_STEP {
            return Ok(MAX_RAY_STEP);
        }
        hi *= 2.0;
    }
    let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    while hi - lo > tol * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(kind, preds, direction, targets, mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

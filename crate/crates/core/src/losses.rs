//! Convex losses, their functional gradients, and the constants that
//! enter the generalization and convergence bounds.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::check_binary;
use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LossKind {
    /// `(a − y)² / 2`.
    Squared,
    /// `|a − y|^p / p`, `p ≥ 2`.
    Lp { p: f64 },
    /// `e^{−y a}`.
    Exponential,
    /// `log(1 + e^{−y a})`.
    Logistic,
}

impl LossKind {
    pub fn needs_binary_targets(self) -> bool {
        matches!(self, LossKind::Exponential | LossKind::Logistic)
    }

    fn validate(self) -> Result<()> {
        match self {
            LossKind::Lp { p } if !(p >= 2.0) || !p.is_finite() => Err(Error::InvalidParameter(
                format!("lp loss requires p >= 2, got {p}"),
            )),
            _ => Ok(()),
        }
    }

    /// Pointwise loss `l(a, y)`.
    #[inline]
    pub fn value(self, a: f64, y: f64) -> f64 {
        match self {
            LossKind::Squared => 0.5 * (a - y) * (a - y),
            LossKind::Lp { p } => (a - y).abs().powf(p) / p,
            LossKind::Exponential => (-y * a).exp(),
            LossKind::Logistic => softplus(-y * a),
        }
    }

    /// Pointwise derivative `∂l/∂a`.
    #[inline]
    pub fn derivative(self, a: f64, y: f64) -> f64 {
        match self {
            LossKind::Squared => a - y,
            LossKind::Lp { p } => {
                let u = a - y;
                u.signum() * u.abs().powf(p - 1.0)
            }
            LossKind::Exponential => -y * (-y * a).exp(),
            LossKind::Logistic => -y * sigmoid(-y * a),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossKind::Squared => write!(f, "squared"),
            LossKind::Lp { p } => write!(f, "lp:{p}"),
            LossKind::Exponential => write!(f, "exponential"),
            LossKind::Logistic => write!(f, "logistic"),
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    /// Parses `squared`, `lp:<p>`, `exponential` or `logistic`.
    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "squared" => LossKind::Squared,
            "exponential" | "exp" => LossKind::Exponential,
            "logistic" => LossKind::Logistic,
            other => match other.strip_prefix("lp:") {
                Some(p) => LossKind::Lp {
                    p: p.parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad lp exponent {p:?}")))?,
                },
                None => return Err(Error::InvalidParameter(format!("unknown loss {other:?}"))),
            },
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// `log(1 + e^x)` without overflow.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `1 / (1 + e^{−x})` without overflow.
#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A loss together with the capacity `C` of the feasible predictor class.
///
/// Squared and lp constants additionally need a bound `B ≥ |y|` on the targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub kind: LossKind,
    pub capacity: f64,
    pub target_bound: Option<f64>,
}

impl LossModel {
    pub fn new(kind: LossKind, capacity: f64) -> Result<Self> {
        kind.validate()?;
        if !(capacity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        Ok(LossModel {
            kind,
            capacity,
            target_bound: None,
        })
    }

    pub fn squared(capacity: f64) -> Result<Self> {
        Self::new(LossKind::Squared, capacity)
    }

    pub fn exponential(capacity: f64) -> Result<Self> {
        Self::new(LossKind::Exponential, capacity)
    }

    pub fn logistic(capacity: f64) -> Result<Self> {
        Self::new(LossKind::Logistic, capacity)
    }

    pub fn lp(p: f64, capacity: f64) -> Result<Self> {
        Self::new(LossKind::Lp { p }, capacity)
    }

    pub fn with_target_bound(mut self, bound: f64) -> Self {
        self.target_bound = Some(bound);
        self
    }

    /// Same loss with a different capacity.
    pub fn with_capacity(mut self, capacity: f64) -> Self {
        self.capacity = capacity;
        self
    }

    fn check(&self, preds: &[f64], targets: &[f64]) -> Result<()> {
        check_len(targets.len(), preds.len())?;
        if targets.is_empty() {
            return Err(Error::InvalidParameter("empty prediction vector".into()));
        }
        if self.kind.needs_binary_targets() {
            check_binary(targets)?;
        }
        Ok(())
    }

    /// `L(F, y) = (1/m) Σ l(F(x_i), y_i)`.
    pub fn empirical_risk(&self, preds: &[f64], targets: &[f64]) -> Result<f64> {
        self.check(preds, targets)?;
        Ok(risk_unchecked(self.kind, preds, targets))
    }

    /// `r_i = −∂L/∂F(x_i)`, including the `1/m` factor.
    pub fn negative_gradient(&self, preds: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
        self.check(preds, targets)?;
        let mut r = vec![0.0; preds.len()];
        negative_gradient_into(self.kind, preds, targets, &mut r);
        Ok(r)
    }

    /// Curvature constant `C_{l,F^C}` of the smoothness condition over the
    /// capacity-`C` class.
    pub fn smoothness_constant(&self) -> Result<f64> {
        let c = self.capacity;
        match self.kind {
            LossKind::Squared => Ok((2.0 * c).powi(2)),
            LossKind::Lp { p } => Ok((p - 1.0) * (2.0 * c).powf(p)),
            LossKind::Exponential => Ok(4.0 * c * c * c.exp()),
            LossKind::Logistic => Ok(c * c),
        }
    }

    /// `(L_l, M)`: Lipschitz constant in the first argument and a bound on
    /// the loss, over predictions in `[−C, C]` and the task's target range.
    pub fn lipschitz_and_bound(&self) -> Result<(f64, f64)> {
        let c = self.capacity;
        match self.kind {
            LossKind::Squared | LossKind::Lp { .. } => {
                let b = self.target_bound.ok_or(Error::MissingTargetBound)?;
                if !(b >= 0.0) || !b.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "target bound must be finite and >= 0, got {b}"
                    )));
                }
                let reach = c + b;
                let p = match self.kind {
                    LossKind::Lp { p } => p,
                    _ => 2.0,
                };
                Ok((reach.powf(p - 1.0), reach.powf(p) / p))
            }
            LossKind::Exponential => Ok((c.exp(), c.exp())),
            // The sigmoid is bounded by one; that bound is what is reported.
            LossKind::Logistic => Ok((1.0, softplus(c))),
        }
    }
}

pub(crate) fn risk_unchecked(kind: LossKind, preds: &[f64], targets: &[f64]) -> f64 {
    let sum: f64 = preds
        .iter()
        .zip(targets)
        .map(|(&a, &y)| kind.value(a, y))
        .sum();
    sum / preds.len() as f64
}

pub(crate) fn negative_gradient_into(
    kind: LossKind,
    preds: &[f64],
    targets: &[f64],
    out: &mut [f64],
) {
    let m = preds.len() as f64;
    for ((o, &a), &y) in out.iter_mut().zip(preds).zip(targets) {
        *o = -kind.derivative(a, y) / m;
    }
}

/// Free-function form of [`LossModel::empirical_risk`].
pub fn empirical_risk(loss: &LossModel, preds: &[f64], targets: &[f64]) -> Result<f64> {
    loss.empirical_risk(preds, targets)
}

/// Free-function form of [`LossModel::negative_gradient`].
pub fn negative_gradient(loss: &LossModel, preds: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    loss.negative_gradient(preds, targets)
}

pub fn smoothness_constant(loss: &LossModel) -> Result<f64> {
    loss.smoothness_constant()
}

pub fn lipschitz_and_bound(loss: &LossModel) -> Result<(f64, f64)> {
    loss.lipschitz_and_bound()
}

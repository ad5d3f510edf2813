//! Base hypotheses: decision stumps and constants.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// A base hypothesis. Stumps send `x[feature] <= threshold` to the low
/// (left) side.
///
/// Classification stumps output `polarity` on the low side and its
/// negation on the high side. Regression stumps (also used for atoms read
/// from an atoms file) output `left` / `right`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Hypothesis {
    Constant {
        value: f64,
    },
    ClassificationStump {
        feature: usize,
        threshold: f64,
        polarity: Polarity,
    },
    RegressionStump {
        feature: usize,
        threshold: f64,
        left: f64,
        right: f64,
    },
}

impl Hypothesis {
    pub fn constant(value: f64) -> Self {
        Hypothesis::Constant { value }
    }

    pub fn classifier(feature: usize, threshold: f64, polarity: Polarity) -> Self {
        Hypothesis::ClassificationStump {
            feature,
            threshold,
            polarity,
        }
    }

    pub fn regression(feature: usize, threshold: f64, left: f64, right: f64) -> Self {
        Hypothesis::RegressionStump {
            feature,
            threshold,
            left,
            right,
        }
    }

    pub fn feature(&self) -> Option<usize> {
        match *self {
            Hypothesis::Constant { .. } => None,
            Hypothesis::ClassificationStump { feature, .. }
            | Hypothesis::RegressionStump { feature, .. } => Some(feature),
        }
    }

    /// Evaluates on one feature row. The caller guarantees the row is wide enough.
    #[inline]
    pub fn eval(&self, row: &[f64]) -> f64 {
        match *self {
            Hypothesis::Constant { value } => value,
            Hypothesis::ClassificationStump {
                feature,
                threshold,
                polarity,
            } => {
                if row[feature] <= threshold {
                    polarity.sign()
                } else {
                    -polarity.sign()
                }
            }
            Hypothesis::RegressionStump {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[feature] <= threshold {
                    left
                } else {
                    right
                }
            }
        }
    }

    pub fn check_dim(&self, n_features: usize) -> Result<()> {
        match self.feature() {
            Some(feature) if feature >= n_features => Err(Error::DimensionMismatch {
                feature,
                dim: n_features,
            }),
            _ => Ok(()),
        }
    }

    /// Values on every row of `data`.
    pub fn evaluate(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.check_dim(data.n_features())?;
        Ok(data.rows().map(|row| self.eval(row)).collect())
    }

    /// Largest absolute output over the rows of `data`.
    pub fn linf_norm(&self, data: &Dataset) -> Result<f64> {
        Ok(self
            .evaluate(data)?
            .iter()
            .fold(0.0, |acc, v| acc.max(v.abs())))
    }

    /// The hypothesis `factor · h`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            Hypothesis::Constant { value } => Hypothesis::Constant {
                value: value * factor,
            },
            Hypothesis::ClassificationStump {
                feature,
                threshold,
                polarity,
            } => {
                if factor == 1.0 {
                    self.clone()
                } else if factor == -1.0 {
                    Hypothesis::ClassificationStump {
                        feature,
                        threshold,
                        polarity: polarity.flip(),
                    }
                } else {
                    let s = polarity.sign() * factor;
                    Hypothesis::RegressionStump {
                        feature,
                        threshold,
                        left: s,
                        right: -s,
                    }
                }
            }
            Hypothesis::RegressionStump {
                feature,
                threshold,
                left,
                right,
            } => Hypothesis::RegressionStump {
                feature,
                threshold,
                left: left * factor,
                right: right * factor,
            },
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Bound on `|h(x)|` over all inputs, not just a sample.
    pub fn sup_norm(&self) -> f64 {
        match *self {
            Hypothesis::Constant { value } => value.abs(),
            Hypothesis::ClassificationStump { .. } => 1.0,
            Hypothesis::RegressionStump { left, right, .. } => left.abs().max(right.abs()),
        }
    }
}

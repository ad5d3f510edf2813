//! Weak learners for the linearized subproblem.
//!
//! Both stump learners scan, per feature, the midpoints between consecutive
//! distinct sorted values (plus a constant hypothesis, the `−∞` threshold)
//! using prefix sums, so one fit costs `O(d·m)` after an `O(d·m log m)` sort
//! that [`StumpLearner`] caches across boosting rounds.
//!
//! Candidates are visited in the tie-break order: constants first, then by
//! feature index, threshold, and polarity `+1` before `−1`. A candidate
//! replaces the incumbent only if it is better by more than a rounding-level
//! margin, so equal-quality stumps resolve to the first one in that order.

use crate::dataset::Dataset;
use crate::error::{check_len, Error, Result};
use crate::hypothesis::{Hypothesis, Polarity};

/// Absolute improvement (in weighted error, weights summing to one) needed
/// to displace an earlier candidate.
const CLASSIFIER_TIE_TOL: f64 = 1e-12;
/// Relative improvement (scaled by `Σ r²`) for the least-squares scan.
const REGRESSION_TIE_TOL: f64 = 1e-12;

/// Per-feature sort orders and the split points between distinct values.
#[derive(Debug, Clone)]
pub struct StumpSearchSpace {
    /// `orders[j]` lists row indices sorted by feature `j` (stable).
    orders: Vec<Vec<usize>>,
    /// `splits[j]` holds `(k, threshold)`: rows `orders[j][..=k]` lie on the low side.
    splits: Vec<Vec<(usize, f64)>>,
    m: usize,
}

impl StumpSearchSpace {
    pub fn new(data: &Dataset) -> Self {
        let m = data.len();
        let mut orders = Vec::with_capacity(data.n_features());
        let mut splits = Vec::with_capacity(data.n_features());
        for j in 0..data.n_features() {
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| data.value(a, j).total_cmp(&data.value(b, j)));
            let feature_splits = order
                .windows(2)
                .enumerate()
                .filter_map(|(k, w)| {
                    let (lo, hi) = (data.value(w[0], j), data.value(w[1], j));
                    (lo < hi).then(|| (k, midpoint(lo, hi)))
                })
                .collect();
            orders.push(order);
            splits.push(feature_splits);
        }
        StumpSearchSpace { orders, splits, m }
    }

    pub fn n_samples(&self) -> usize {
        self.m
    }

    /// Every distinct classification stump behavior, in tie-break order.
    /// The class is closed under negation.
    pub fn classifiers(&self) -> Vec<Hypothesis> {
        let mut out = vec![Hypothesis::constant(1.0), Hypothesis::constant(-1.0)];
        for (j, splits) in self.splits.iter().enumerate() {
            for &(_, threshold) in splits {
                out.push(Hypothesis::classifier(j, threshold, Polarity::Positive));
                out.push(Hypothesis::classifier(j, threshold, Polarity::Negative));
            }
        }
        out
    }

    /// `(feature, threshold)` pairs of every non-constant split.
    pub fn thresholds(&self) -> Vec<(usize, f64)> {
        self.splits
            .iter()
            .enumerate()
            .flat_map(|(j, s)| s.iter().map(move |&(_, t)| (j, t)))
            .collect()
    }
}

/// A point strictly between `lo < hi` that keeps `lo` on the low side.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + 0.5 * (hi - lo);
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Cached stump learner for one training sample.
#[derive(Debug, Clone)]
pub struct StumpLearner {
    space: StumpSearchSpace,
    n_features: usize,
}

impl StumpLearner {
    pub fn new(data: &Dataset) -> Self {
        StumpLearner {
            space: StumpSearchSpace::new(data),
            n_features: data.n_features(),
        }
    }

    pub fn space(&self) -> &StumpSearchSpace {
        &self.space
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Minimizes `Σ_{h(x_i) ≠ label_i} w_i` over `±1` stumps.
    pub fn fit_classifier(&self, weights: &[f64], labels: &[f64]) -> Result<Hypothesis> {
        let m = self.space.m;
        check_len(m, weights.len())?;
        check_len(m, labels.len())?;
        crate::dataset::check_binary(labels)?;
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            return Err(Error::ZeroWeights);
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::UnnormalizedWeights(total));
        }

        let (mut total_pos, mut total_neg) = (0.0, 0.0);
        for (&w, &y) in weights.iter().zip(labels) {
            if y > 0.0 {
                total_pos += w;
            } else {
                total_neg += w;
            }
        }

        let mut best = Hypothesis::constant(1.0);
        let mut best_err = total_neg;
        if total_pos < best_err - CLASSIFIER_TIE_TOL {
            best = Hypothesis::constant(-1.0);
            best_err = total_pos;
        }

        for (j, (order, splits)) in self.space.orders.iter().zip(&self.space.splits).enumerate() {
            let (mut low_pos, mut low_neg) = (0.0, 0.0);
            let mut consumed = 0;
            for &(k, threshold) in splits {
                while consumed <= k {
                    let i = order[consumed];
                    if labels[i] > 0.0 {
                        low_pos += weights[i];
                    } else {
                        low_neg += weights[i];
                    }
                    consumed += 1;
                }
                // +1 on the low side: mistakes are low negatives and high positives.
                let err_pos = low_neg + (total_pos - low_pos);
                if err_pos < best_err - CLASSIFIER_TIE_TOL {
                    best_err = err_pos;
                    best = Hypothesis::classifier(j, threshold, Polarity::Positive);
                }
                let err_neg = low_pos + (total_neg - low_neg);
                if err_neg < best_err - CLASSIFIER_TIE_TOL {
                    best_err = err_neg;
                    best = Hypothesis::classifier(j, threshold, Polarity::Negative);
                }
            }
        }
        Ok(best)
    }

    /// Least-squares stump fit to `residuals`; leaves are side means.
    pub fn fit_regression(&self, residuals: &[f64]) -> Result<Hypothesis> {
        let m = self.space.m;
        check_len(m, residuals.len())?;
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(Error::NonFinite("residuals"));
        }
        let total: f64 = residuals.iter().sum();
        let sum_sq: f64 = residuals.iter().map(|r| r * r).sum();
        let tol = REGRESSION_TIE_TOL * sum_sq;
        let mf = m as f64;

        // Maximizing S_L²/n_L + S_R²/n_R minimizes the squared error.
        let mut best = Hypothesis::constant(total / mf);
        let mut best_score = total * total / mf;

        for (j, (order, splits)) in self.space.orders.iter().zip(&self.space.splits).enumerate() {
            let mut low_sum = 0.0;
            let mut consumed = 0;
            for &(k, threshold) in splits {
                while consumed <= k {
                    low_sum += residuals[order[consumed]];
                    consumed += 1;
                }
                let n_low = consumed as f64;
                let n_high = mf - n_low;
                let high_sum = total - low_sum;
                let score = low_sum * low_sum / n_low + high_sum * high_sum / n_high;
                if score > best_score + tol {
                    best_score = score;
                    best = Hypothesis::regression(j, threshold, low_sum / n_low, high_sum / n_high);
                }
            }
        }
        Ok(best)
    }
}

/// One-shot form of [`StumpLearner::fit_classifier`].
pub fn train_stump_classifier(
    data: &Dataset,
    weights: &[f64],
    labels: &[f64],
) -> Result<Hypothesis> {
    StumpLearner::new(data).fit_classifier(weights, labels)
}

/// One-shot form of [`StumpLearner::fit_regression`].
pub fn train_regression_stump(data: &Dataset, residuals: &[f64]) -> Result<Hypothesis> {
    StumpLearner::new(data).fit_regression(residuals)
}

/// An explicit finite hypothesis list with its values on a training sample.
#[derive(Debug, Clone)]
pub struct AtomTable {
    atoms: Vec<Hypothesis>,
    values: Vec<Vec<f64>>,
}

impl AtomTable {
    pub fn new(atoms: Vec<Hypothesis>, data: &Dataset) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyAtoms);
        }
        let values = atoms
            .iter()
            .map(|h| h.evaluate(data))
            .collect::<Result<Vec<_>>>()?;
        Ok(AtomTable { atoms, values })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, k: usize) -> &Hypothesis {
        &self.atoms[k]
    }

    pub fn atoms(&self) -> &[Hypothesis] {
        &self.atoms
    }

    pub fn values(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    /// Largest `|h(x_i)|` over all atoms and training rows.
    pub fn linf_norm(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn inner(&self, k: usize, r: &[f64]) -> f64 {
        dot(&self.values[k], r)
    }

    /// Index of the first atom maximizing `⟨h, r⟩`.
    pub fn argmax(&self, r: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = self.inner(0, r);
        for k in 1..self.atoms.len() {
            let v = self.inner(k, r);
            if v > best_val {
                best = k;
                best_val = v;
            }
        }
        best
    }
}

/// `argmax_h ⟨h, r⟩` over `atoms` evaluated on `data`; ties go to the earlier atom.
pub fn best_inner_product_oracle(
    atoms: &[Hypothesis],
    data: &Dataset,
    r: &[f64],
) -> Result<Hypothesis> {
    check_len(data.len(), r.len())?;
    let table = AtomTable::new(atoms.to_vec(), data)?;
    Ok(table.atom(table.argmax(r)).clone())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

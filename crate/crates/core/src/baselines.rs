//! Unconstrained gradient boosting and its usual regularizers: shrinkage,
//! stochastic subsampling and early stopping.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::dataset::{check_binary, Dataset};
use crate::ensemble::{Ensemble, Update};
use crate::error::{Error, Result};
use crate::fwboost::reduce_to_classification;
use crate::hypothesis::Hypothesis;
use crate::learners::StumpLearner;
use crate::losses::{negative_gradient_into, risk_unchecked, LossKind, LossModel};
use crate::report::{
    error_metric, FitReport, Holdout, IterationRecord, StepKind, TerminationReason,
};
use crate::rng::stream;
use crate::step::{line_search_ray, DEFAULT_LINE_SEARCH_TOL};

pub const DEFAULT_VAL_FRACTION: f64 = 0.2;
pub const DEFAULT_SUBSAMPLE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Multiplier `ν ∈ (0, 1]` applied after the line search.
    pub shrinkage: f64,
    /// Fraction of the fitting rows drawn (without replacement) each round.
    pub subsample: f64,
    /// Rounds without validation improvement before stopping.
    pub patience: Option<usize>,
    /// Share of the training rows held out for early stopping.
    pub val_fraction: f64,
    pub seed: u64,
    pub line_search_tol: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            shrinkage: 1.0,
            subsample: 1.0,
            patience: None,
            val_fraction: DEFAULT_VAL_FRACTION,
            seed: 0,
            line_search_tol: DEFAULT_LINE_SEARCH_TOL,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v <= 1.0;
        if !in_unit(self.shrinkage) {
            return Err(Error::InvalidParameter(format!(
                "shrinkage must lie in (0, 1], got {}",
                self.shrinkage
            )));
        }
        if !in_unit(self.subsample) {
            return Err(Error::InvalidParameter(format!(
                "subsample must lie in (0, 1], got {}",
                self.subsample
            )));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "validation fraction must lie in (0, 1), got {}",
                self.val_fraction
            )));
        }
        if self.patience == Some(0) {
            return Err(Error::InvalidParameter(
                "patience must be at least 1".into(),
            ));
        }
        if !(self.line_search_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "line search tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Splits `data` into fitting and validation parts, `floor(m·fraction)`
/// rows (at least one) going to validation.
fn carve_validation(data: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let m = data.len();
    let n_val = ((m as f64 * fraction).floor() as usize).max(1);
    if n_val >= m {
        return Err(Error::InvalidDataset(format!(
            "{m} rows leave nothing to fit after the validation split"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream(seed, "validation"));
    let (val, fit) = order.split_at(n_val);
    let (mut fit, mut val) = (fit.to_vec(), val.to_vec());
    fit.sort_unstable();
    val.sort_unstable();
    Ok((data.select(&fit)?, data.select(&val)?))
}

fn fit_stump(kind: LossKind, sample: &Dataset, residual: &[f64]) -> Result<Option<Hypothesis>> {
    let learner = StumpLearner::new(sample);
    match kind {
        LossKind::Exponential => match reduce_to_classification(residual) {
            Ok((labels, weights)) => learner.fit_classifier(&weights, &labels).map(Some),
            Err(Error::ZeroResidual) => Ok(None),
            Err(e) => Err(e),
        },
        _ => {
            let h = learner.fit_regression(residual)?;
            Ok((h.sup_norm() > 0.0).then_some(h))
        }
    }
}

/// Gradient boosting with stumps fitted to the pointwise negative gradient
/// (weighted-error classifier stumps for exponential loss, least squares
/// otherwise) and an exact line search along the stump, scaled by `ν`.
///
/// With early stopping the run ends after `patience` rounds in which the
/// validation risk did not improve on its best value; the ensemble keeps
/// every round fitted so far.
pub fn run_gradient_boosting(
    data: &Dataset,
    loss: &LossModel,
    config: &BaselineConfig,
    iterations: usize,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    config.validate()?;
    if iterations < 1 {
        return Err(Error::InvalidParameter(
            "need at least one iteration".into(),
        ));
    }
    if loss.kind.needs_binary_targets() {
        check_binary(data.targets())?;
    }
    let kind = loss.kind;
    let (fit_owned, val) = match config.patience {
        Some(_) => {
            let (f, v) = carve_validation(data, config.val_fraction, config.seed)?;
            (Some(f), Some(v))
        }
        None => (None, None),
    };
    let fit = fit_owned.as_ref().unwrap_or(data);
    let m = fit.len();
    let n_sub = (m as f64 * config.subsample).floor() as usize;
    if config.subsample < 1.0 && n_sub < 2 {
        return Err(Error::SubsampleTooSmall(n_sub));
    }
    let mut sub_rng = stream(config.seed, "subsample");

    let y = fit.targets();
    let mut ensemble = Ensemble::unconstrained();
    let mut preds = vec![0.0; m];
    let mut residual = vec![0.0; m];
    let mut val_holdout = val.as_ref().map(Holdout::new);
    let mut test_holdout = holdout.map(Holdout::new);
    let mut best_val = f64::INFINITY;
    let mut stale = 0usize;
    let mut records = Vec::with_capacity(iterations);
    let mut termination = TerminationReason::MaxIters;

    for t in 1..=iterations {
        negative_gradient_into(kind, &preds, y, &mut residual);
        if residual.iter().all(|&r| r == 0.0) {
            termination = TerminationReason::ZeroDirection;
            break;
        }
        let pointwise: Vec<f64> = residual.iter().map(|r| r * m as f64).collect();
        let h = if config.subsample < 1.0 {
            let mut rows = index::sample(&mut sub_rng, m, n_sub).into_vec();
            rows.sort_unstable();
            let r_sub: Vec<f64> = rows.iter().map(|&i| pointwise[i]).collect();
            fit_stump(kind, &fit.select(&rows)?, &r_sub)?
        } else {
            fit_stump(kind, fit, &pointwise)?
        };
        let Some(h) = h else {
            termination = TerminationReason::ZeroDirection;
            break;
        };
        let direction = h.evaluate(fit)?;
        let step = line_search_ray(loss, &preds, &direction, y, config.line_search_tol)?;
        if step == 0.0 {
            termination = TerminationReason::ZeroDirection;
            break;
        }
        let coef = config.shrinkage * step;
        ensemble.push(coef, h.clone());
        let update = Update::Additive {
            coef,
            hypothesis: h,
        };
        update.apply(&mut preds, fit);
        if let Some(v) = test_holdout.as_mut() {
            v.apply(&update);
        }
        records.push(IterationRecord {
            t,
            train_risk: risk_unchecked(kind, &preds, y),
            train_error: error_metric(fit.task(), &preds, y),
            test_error: test_holdout.as_ref().map(Holdout::error),
            fw_gap: None,
            l1_norm: ensemble.l1_norm(),
            active_set_size: ensemble.active_len(),
            gamma: coef,
            step_kind: StepKind::Additive,
        });
        if let (Some(v), Some(patience)) = (val_holdout.as_mut(), config.patience) {
            v.apply(&update);
            let risk = risk_unchecked(kind, v.preds(), v.data().targets());
            if risk < best_val {
                best_val = risk;
                stale = 0;
            } else {
                stale += 1;
                if stale >= patience {
                    termination = TerminationReason::EarlyStopped;
                    break;
                }
            }
        }
    }
    Ok(FitReport {
        ensemble,
        records,
        termination,
        final_gap: None,
    })
}

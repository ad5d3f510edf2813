//! AdaBoost.FW: the reweighting form of FWBoost with exponential loss.
//!
//! Instead of recomputing `e^{−y F}` each round, the sample distribution is
//! carried forward as `D_{t+1}(i) ∝ D_t(i)^{1−γ} e^{−γ C y_i h(x_i)}`. All
//! weights live in the log domain.

use crate::dataset::{check_binary, Dataset};
use crate::ensemble::{Ensemble, Update};
use crate::error::{check_len, Error, Result};
use crate::fwboost::{FwConfig, StepOutcome};
use crate::learners::StumpLearner;
use crate::report::{
    error_metric, sign, FitReport, Holdout, IterationRecord, StepKind, TerminationReason,
};
use crate::step::{step_schedule, StepPolicy};

/// Tolerance on `Σ D(i) = 1` before the distribution is handed to a learner.
pub const DISTRIBUTION_TOL: f64 = 1e-9;

/// A probability distribution over the training sample, stored as log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionWeights {
    log: Vec<f64>,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

impl DistributionWeights {
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::ZeroWeights);
        }
        Ok(DistributionWeights {
            log: vec![-(m as f64).ln(); m],
        })
    }

    /// Normalizes arbitrary log-weights.
    pub fn from_log_weights(mut log: Vec<f64>) -> Result<Self> {
        if log.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::NonFinite("log-weights"));
        }
        let z = log_sum_exp(&log);
        if z == f64::NEG_INFINITY {
            return Err(Error::ZeroWeights);
        }
        log.iter_mut().for_each(|v| *v -= z);
        Ok(DistributionWeights { log })
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log.iter().map(|v| v.exp()).collect()
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }
}

/// `log D'(i) = (1−γ) log D(i) − γ C y_i h_i − log Z`. Returns the new
/// distribution and `log Z`.
pub fn update_distribution(
    d: &DistributionWeights,
    gamma: f64,
    capacity: f64,
    h_preds: &[f64],
    labels: &[f64],
) -> Result<(DistributionWeights, f64)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidStep(gamma));
    }
    if !(capacity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    check_len(d.len(), h_preds.len())?;
    check_len(d.len(), labels.len())?;
    let mut log = exponents(d, gamma, capacity, h_preds, labels);
    let log_z = log_sum_exp(&log);
    if log_z == f64::NEG_INFINITY {
        return Err(Error::ZeroWeights);
    }
    log.iter_mut().for_each(|v| *v -= log_z);
    Ok((DistributionWeights { log }, log_z))
}

fn exponents(d: &DistributionWeights, gamma: f64, capacity: f64, h: &[f64], y: &[f64]) -> Vec<f64> {
    d.log
        .iter()
        .zip(h)
        .zip(y)
        .map(|((&ld, &h), &y)| {
            // 0^0 = 1: at γ = 1 the previous weights drop out entirely.
            let carried = if gamma == 1.0 {
                0.0
            } else {
                (1.0 - gamma) * ld
            };
            carried - gamma * capacity * y * h
        })
        .collect()
}

/// `d/dγ [(1−γ) log S + log Z(γ)]`.
fn log_risk_slope(
    d: &DistributionWeights,
    log_s: f64,
    gamma: f64,
    capacity: f64,
    h: &[f64],
    y: &[f64],
) -> f64 {
    let a = exponents(d, gamma, capacity, h, y);
    let z = log_sum_exp(&a);
    let mut acc = -log_s;
    for (((&a, &ld), &h), &y) in a.iter().zip(&d.log).zip(h).zip(y) {
        let p = (a - z).exp();
        if p > 0.0 {
            acc += p * (-ld - capacity * y * h);
        }
    }
    acc
}

/// Bisection for the exact step on the log-risk `log S_t(γ)` over `[0, 1]`.
fn line_search_log_risk(
    d: &DistributionWeights,
    log_s: f64,
    capacity: f64,
    h: &[f64],
    y: &[f64],
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "line search tolerance must be positive, got {tol}"
        )));
    }
    let slope = |g: f64| log_risk_slope(d, log_s, g, capacity, h, y);
    if slope(0.0) >= 0.0 {
        return Ok(0.0);
    }
    if slope(1.0) <= 0.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// AdaBoost.FW driven one iteration at a time.
#[derive(Debug)]
pub struct AdaBoostFw<'a> {
    data: &'a Dataset,
    config: FwConfig,
    learner: StumpLearner,
    ensemble: Ensemble,
    distribution: DistributionWeights,
    /// `log Σ_i e^{−y_i F_t(x_i)}`.
    log_s: f64,
    log_z: Option<f64>,
    preds: Vec<f64>,
    t: usize,
    stopped: Option<TerminationReason>,
    last_gap: Option<f64>,
    holdout: Option<Holdout<'a>>,
}

impl<'a> AdaBoostFw<'a> {
    pub fn new(data: &'a Dataset, config: FwConfig) -> Result<Self> {
        check_binary(data.targets())?;
        let m = data.len();
        Ok(AdaBoostFw {
            data,
            config,
            learner: StumpLearner::new(data),
            ensemble: Ensemble::new(config.capacity)?,
            distribution: DistributionWeights::uniform(m)?,
            log_s: (m as f64).ln(),
            log_z: None,
            preds: vec![0.0; m],
            t: 0,
            stopped: None,
            last_gap: None,
            holdout: None,
        })
    }

    pub fn with_holdout(mut self, holdout: &'a Dataset) -> Self {
        self.holdout = Some(Holdout::new(holdout));
        self
    }

    /// `D_{t+1}`, the distribution the next stump is trained on.
    pub fn distribution(&self) -> &DistributionWeights {
        &self.distribution
    }

    /// `log Z_t` of the most recent update.
    pub fn log_normalizer(&self) -> Option<f64> {
        self.log_z
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn preds(&self) -> &[f64] {
        &self.preds
    }

    /// Exponential empirical risk `S_t / m`.
    pub fn train_risk(&self) -> f64 {
        (self.log_s - (self.data.len() as f64).ln()).exp()
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some(reason) = self.stopped {
            return Ok(StepOutcome::Stopped(reason));
        }
        if self.t >= self.config.iterations {
            return Ok(self.stop(TerminationReason::MaxIters));
        }
        let t = self.t + 1;
        let c = self.config.capacity;
        let y = self.data.targets();
        let weights = self.distribution.weights();
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::UnnormalizedWeights(total));
        }
        let h = self.learner.fit_classifier(&weights, y)?;
        let hv = h.evaluate(self.data)?;

        let m = self.data.len() as f64;
        let scale = (self.log_s - m.ln()).exp();
        let gap = scale
            * weights
                .iter()
                .zip(y)
                .zip(&hv)
                .zip(&self.preds)
                .map(|(((d, y), h), f)| d * y * (c * h - f))
                .sum::<f64>();
        self.last_gap = Some(gap);
        if gap <= self.config.gap_tol {
            return Ok(self.stop(TerminationReason::GapBelowTol));
        }

        let gamma = match self.config.policy {
            StepPolicy::Schedule => step_schedule(t)?,
            StepPolicy::LineSearch { tol } => {
                line_search_log_risk(&self.distribution, self.log_s, c, &hv, y, tol)?
            }
        };
        let (next, log_z) = update_distribution(&self.distribution, gamma, c, &hv, y)?;
        self.log_s = if gamma == 1.0 {
            log_z
        } else {
            (1.0 - gamma) * self.log_s + log_z
        };
        self.distribution = next;
        self.log_z = Some(log_z);

        self.ensemble.fw_update(h.clone(), gamma)?;
        let update = Update::FrankWolfe {
            gamma,
            capacity: c,
            hypothesis: h,
        };
        update.apply(&mut self.preds, self.data);
        if let Some(ho) = self.holdout.as_mut() {
            ho.apply(&update);
        }
        self.t = t;
        Ok(StepOutcome::Stepped(IterationRecord {
            t,
            train_risk: self.train_risk(),
            train_error: error_metric(self.data.task(), &self.preds, y),
            test_error: self.holdout.as_ref().map(Holdout::error),
            fw_gap: Some(gap),
            l1_norm: self.ensemble.l1_norm(),
            active_set_size: self.ensemble.active_len(),
            gamma,
            step_kind: StepKind::FrankWolfe,
        }))
    }

    fn stop(&mut self, reason: TerminationReason) -> StepOutcome {
        self.stopped = Some(reason);
        StepOutcome::Stopped(reason)
    }

    pub fn run(mut self) -> Result<FitReport> {
        let mut records = Vec::new();
        while let StepOutcome::Stepped(r) = self.step()? {
            records.push(r);
        }
        let termination = self.stopped.unwrap_or(TerminationReason::MaxIters);
        let final_gap = (termination == TerminationReason::GapBelowTol)
            .then_some(self.last_gap)
            .flatten();
        Ok(FitReport {
            ensemble: self.ensemble,
            records,
            termination,
            final_gap,
        })
    }
}

/// Runs AdaBoost.FW for `iterations` rounds on `±1` targets.
pub fn run_adaboost_fw(
    data: &Dataset,
    policy: StepPolicy,
    capacity: f64,
    iterations: usize,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    let config = FwConfig::new(capacity, iterations).policy(policy);
    let mut solver = AdaBoostFw::new(data, config)?;
    if let Some(h) = holdout {
        solver = solver.with_holdout(h);
    }
    solver.run()
}

/// `sign(Σ α_k h_k(x))` with `sign(0) = +1`.
pub fn classify(ensemble: &Ensemble, data: &Dataset) -> Result<Vec<f64>> {
    Ok(ensemble.predict(data)?.iter().map(|&v| sign(v)).collect())
}

/// Classifies a single row.
pub fn classify_row(ensemble: &Ensemble, row: &[f64]) -> f64 {
    sign(
        ensemble
            .atoms()
            .iter()
            .map(|a| a.coef * a.hypothesis.eval(row))
            .sum(),
    )
}

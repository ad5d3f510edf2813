//! Per-iteration metrics and fit results shared by every solver.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Task};
use crate::ensemble::{Ensemble, Update};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    FrankWolfe,
    Away,
    /// Away step that removed its atom.
    Drop,
    /// Unconstrained additive step of the gradient boosting baselines.
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerminationReason {
    MaxIters,
    GapBelowTol,
    ZeroDirection,
    EarlyStopped,
}

/// Metrics after iteration `t` (1-based).
///
/// `train_risk` is the empirical risk under the training loss. The error
/// metrics are plain mean squared error for regression and 0-1 error for
/// classification. `fw_gap` certifies the iterate the step started from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    pub train_risk: f64,
    pub train_error: f64,
    pub test_error: Option<f64>,
    pub fw_gap: Option<f64>,
    pub l1_norm: f64,
    pub active_set_size: usize,
    pub gamma: f64,
    pub step_kind: StepKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub ensemble: Ensemble,
    pub records: Vec<IterationRecord>,
    pub termination: TerminationReason,
    /// Gap observed when the run stopped on the gap tolerance.
    pub final_gap: Option<f64>,
}

impl FitReport {
    pub fn final_train_risk(&self) -> Option<f64> {
        self.records.last().map(|r| r.train_risk)
    }
}

/// Mean squared error (regression) or 0-1 error with `sign(0) = +1`.
pub fn error_metric(task: Task, preds: &[f64], targets: &[f64]) -> f64 {
    let n = preds.len() as f64;
    match task {
        Task::Regression => {
            preds
                .iter()
                .zip(targets)
                .map(|(p, y)| (p - y) * (p - y))
                .sum::<f64>()
                / n
        }
        Task::BinaryClassification => {
            preds
                .iter()
                .zip(targets)
                .filter(|(p, y)| sign(**p) != **y)
                .count() as f64
                / n
        }
    }
}

/// `sign` with `sign(0) = +1`.
pub fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Predictions on a held-out sample, kept in step with the ensemble by
/// replaying each update.
#[derive(Debug, Clone)]
pub struct Holdout<'a> {
    data: &'a Dataset,
    preds: Vec<f64>,
}

impl<'a> Holdout<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        Holdout {
            data,
            preds: vec![0.0; data.len()],
        }
    }

    pub fn apply(&mut self, update: &Update) {
        update.apply(&mut self.preds, self.data);
    }

    pub fn preds(&self) -> &[f64] {
        &self.preds
    }

    pub fn error(&self) -> f64 {
        error_metric(self.data.task(), &self.preds, self.data.targets())
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }
}

//! Algorithms, hyperparameter grids, single fits and cross-validation.

use std::fmt;
use std::str::FromStr;

use fwboost_core::adaboost_fw::AdaBoostFw;
use fwboost_core::baselines::{
    run_gradient_boosting, BaselineConfig, DEFAULT_SUBSAMPLE, DEFAULT_VAL_FRACTION,
};
use fwboost_core::fwboost::{
    run_awaystep, run_fwboost, run_fwboost_c, run_fwboost_r, FiniteAtomOracle, FwConfig,
    DEFAULT_GAP_TOL,
};
use fwboost_core::learners::StumpSearchSpace;
use fwboost_core::rng::derive_seed;
use fwboost_core::{Dataset, FitReport, Hypothesis, LossKind, LossModel, StepPolicy, Task};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{fold_split, kfold};
use crate::error::{HarnessError, Result};

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// FWBoost with the weighted-classification reduction.
    FwboostC,
    /// FWBoost with least-squares stumps.
    FwboostR,
    /// FWBoost with away steps over a finite atom list.
    Awaystep,
    AdaboostFw,
    /// Plain gradient boosting (AdaBoost under exponential loss).
    Gb,
    /// Gradient boosting with shrinkage.
    #[serde(rename = "gb-shrink")]
    #[value(name = "gb-shrink")]
    GbShrinkage,
    /// Stochastic gradient boosting.
    #[serde(rename = "gb-sub")]
    #[value(name = "gb-sub")]
    GbSubsample,
    /// Gradient boosting with validation early stopping.
    #[serde(rename = "gb-early")]
    #[value(name = "gb-early")]
    GbEarlyStop,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::FwboostC,
        Algorithm::FwboostR,
        Algorithm::Awaystep,
        Algorithm::AdaboostFw,
        Algorithm::Gb,
        Algorithm::GbShrinkage,
        Algorithm::GbSubsample,
        Algorithm::GbEarlyStop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FwboostC => "fwboost-c",
            Algorithm::FwboostR => "fwboost-r",
            Algorithm::Awaystep => "awaystep",
            Algorithm::AdaboostFw => "adaboost-fw",
            Algorithm::Gb => "gb",
            Algorithm::GbShrinkage => "gb-shrink",
            Algorithm::GbSubsample => "gb-sub",
            Algorithm::GbEarlyStop => "gb-early",
        }
    }

    pub fn is_constrained(self) -> bool {
        matches!(
            self,
            Algorithm::FwboostC | Algorithm::FwboostR | Algorithm::Awaystep | Algorithm::AdaboostFw
        )
    }

    /// Tuning grid used when the configuration names none.
    pub fn default_grid(self) -> GridSpec {
        let mut grid = GridSpec::default();
        match self {
            Algorithm::FwboostC
            | Algorithm::FwboostR
            | Algorithm::Awaystep
            | Algorithm::AdaboostFw => {
                grid.capacity = DEFAULT_C_GRID.to_vec();
            }
            Algorithm::GbShrinkage => grid.shrinkage = DEFAULT_SHRINKAGE_GRID.to_vec(),
            Algorithm::GbEarlyStop => grid.patience = DEFAULT_PATIENCE_GRID.to_vec(),
            Algorithm::Gb | Algorithm::GbSubsample => {}
        }
        grid
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HarnessError::Invalid(format!("unknown algorithm {s:?}")))
    }
}

pub const DEFAULT_C_GRID: [f64; 8] = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
pub const DEFAULT_SHRINKAGE_GRID: [f64; 4] = [0.01, 0.1, 0.3, 1.0];
pub const DEFAULT_PATIENCE_GRID: [usize; 2] = [10, 50];

/// One point of a hyperparameter grid. Unset fields take the algorithm's
/// default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrinkage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
}

/// Axes of a grid; the grid is their Cartesian product in listed order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub capacity: Vec<f64>,
    pub shrinkage: Vec<f64>,
    pub subsample: Vec<f64>,
    pub patience: Vec<usize>,
}

impl GridSpec {
    pub fn points(&self) -> Vec<Params> {
        fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().map(|&x| Some(x)).collect()
            }
        }
        let mut out = Vec::new();
        for &capacity in &axis(&self.capacity) {
            for &shrinkage in &axis(&self.shrinkage) {
                for &subsample in &axis(&self.subsample) {
                    for &patience in &axis(&self.patience) {
                        out.push(Params {
                            capacity,
                            shrinkage,
                            subsample,
                            patience,
                        });
                    }
                }
            }
        }
        out
    }
}

/// Weak learner family.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Learner {
    /// Decision stumps fitted to each residual.
    #[default]
    Stump,
    /// An explicit atom list searched exhaustively.
    Oracle(Vec<Hypothesis>),
}

/// Everything a single fit needs besides the data and grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub loss: LossKind,
    pub iterations: usize,
    pub learner: Learner,
    /// Step rule for FWBoost; `None` uses the schedule for fwboost-c/r and
    /// line search for adaboost-fw. Away steps always line-search.
    pub step: Option<StepPolicy>,
    /// FW-gap threshold below which FW solvers stop.
    pub gap_tol: f64,
    pub val_fraction: f64,
    pub seed: u64,
}

impl FitSettings {
    pub fn new(task: Task, iterations: usize) -> Self {
        FitSettings {
            loss: default_loss(task),
            iterations,
            learner: Learner::Stump,
            step: None,
            gap_tol: DEFAULT_GAP_TOL,
            val_fraction: DEFAULT_VAL_FRACTION,
            seed: 0,
        }
    }
}

pub fn default_loss(task: Task) -> LossKind {
    match task {
        Task::Regression => LossKind::Squared,
        Task::BinaryClassification => LossKind::Exponential,
    }
}

const DEFAULT_CAPACITY: f64 = 1.0;

fn atoms_for(learner: &Learner, data: &Dataset) -> Vec<Hypothesis> {
    match learner {
        Learner::Oracle(atoms) => atoms.clone(),
        Learner::Stump => StumpSearchSpace::new(data).classifiers(),
    }
}

/// Fits `algorithm` at grid point `params` on `train`, tracking the error
/// metric on `holdout` when given.
pub fn fit(
    algorithm: Algorithm,
    params: &Params,
    settings: &FitSettings,
    train: &Dataset,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    let t = settings.iterations;
    let capacity = params.capacity.unwrap_or(DEFAULT_CAPACITY);
    let loss = LossModel::new(settings.loss, capacity)?;
    let fw = FwConfig::new(capacity, t)
        .policy(settings.step.unwrap_or(StepPolicy::Schedule))
        .gap_tol(settings.gap_tol);
    let report = match algorithm {
        Algorithm::FwboostC | Algorithm::FwboostR => match &settings.learner {
            Learner::Oracle(atoms) => run_fwboost(
                train,
                &loss,
                FiniteAtomOracle::new(atoms.clone(), train)?,
                fw,
                holdout,
            )?,
            Learner::Stump if algorithm == Algorithm::FwboostC => {
                run_fwboost_c(train, &loss, fw, holdout)?
            }
            Learner::Stump => run_fwboost_r(train, &loss, fw, holdout)?,
        },
        Algorithm::Awaystep => {
            let policy = match settings.step {
                Some(p @ StepPolicy::LineSearch { .. }) => p,
                _ => StepPolicy::line_search(),
            };
            run_awaystep(
                train,
                &loss,
                atoms_for(&settings.learner, train),
                fw.policy(policy),
                holdout,
            )?
        }
        Algorithm::AdaboostFw => {
            if settings.loss != LossKind::Exponential {
                return Err(HarnessError::Invalid(
                    "adaboost-fw is defined for the exponential loss only".into(),
                ));
            }
            if let Learner::Oracle(_) = settings.learner {
                return Err(HarnessError::Invalid(
                    "adaboost-fw trains stumps; use fwboost-c for atom lists".into(),
                ));
            }
            let mut solver = AdaBoostFw::new(
                train,
                fw.policy(settings.step.unwrap_or_else(StepPolicy::line_search)),
            )?;
            if let Some(h) = holdout {
                solver = solver.with_holdout(h);
            }
            solver.run()?
        }
        Algorithm::Gb
        | Algorithm::GbShrinkage
        | Algorithm::GbSubsample
        | Algorithm::GbEarlyStop => {
            let config = BaselineConfig {
                shrinkage: params.shrinkage.unwrap_or(1.0),
                subsample: params
                    .subsample
                    .unwrap_or(if algorithm == Algorithm::GbSubsample {
                        DEFAULT_SUBSAMPLE
                    } else {
                        1.0
                    }),
                patience: match algorithm {
                    Algorithm::GbEarlyStop => {
                        Some(params.patience.unwrap_or(DEFAULT_PATIENCE_GRID[0]))
                    }
                    _ => params.patience,
                },
                val_fraction: settings.val_fraction,
                seed: settings.seed,
                ..BaselineConfig::default()
            };
            run_gradient_boosting(train, &loss, &config, t, holdout)?
        }
    };
    Ok(report)
}

/// Per-iteration holdout errors padded to `len` with the last value. A run
/// stopped before its first step is padded with the error of `F = 0`.
pub fn padded_errors(report: &FitReport, holdout: &Dataset, len: usize) -> Vec<f64> {
    let mut curve: Vec<f64> = report.records.iter().filter_map(|r| r.test_error).collect();
    let last = curve.last().copied().unwrap_or_else(|| zero_error(holdout));
    curve.resize(len, last);
    curve
}

pub(crate) fn zero_error(data: &Dataset) -> f64 {
    fwboost_core::report::error_metric(data.task(), &vec![0.0; data.len()], data.targets())
}

/// How a grid point is scored from its validation curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Mean validation error after the final iteration `T`.
    #[default]
    Final,
    /// Minimum over `t ≤ T` of the fold-averaged validation error.
    Best,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub best: Params,
    /// Score of each grid point, in grid order.
    pub scores: Vec<f64>,
}

/// K-fold cross-validation over `grid` on `train` alone. Ties go to the
/// smaller capacity, then to the earlier grid point.
pub fn cross_validate(
    train: &Dataset,
    algorithm: Algorithm,
    grid: &[Params],
    folds: usize,
    settings: &FitSettings,
    selection: Selection,
    seed: u64,
) -> Result<CvOutcome> {
    if grid.is_empty() {
        return Err(HarnessError::Invalid("empty tuning grid".into()));
    }
    let parts = kfold(train, folds, seed)?;
    let splits: Vec<(Dataset, Dataset)> = (0..folds)
        .map(|k| fold_split(train, &parts, k))
        .collect::<Result<_>>()?;
    let t = settings.iterations;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..folds).map(move |k| (g, k)))
        .collect();
    let curves: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let (fit_part, val_part) = &splits[k];
            let mut s = settings.clone();
            s.seed = derive_seed(seed, &format!("fold-{k}"));
            let report = fit(algorithm, &grid[g], &s, fit_part, Some(val_part))?;
            Ok(padded_errors(&report, val_part, t))
        })
        .collect::<Result<_>>()?;

    let scores: Vec<f64> = (0..grid.len())
        .map(|g| {
            let mean: Vec<f64> = (0..t)
                .map(|i| (0..folds).map(|k| curves[g * folds + k][i]).sum::<f64>() / folds as f64)
                .collect();
            match selection {
                Selection::Final => mean[t - 1],
                Selection::Best => mean.iter().copied().fold(f64::INFINITY, f64::min),
            }
        })
        .collect();
    let best = (0..grid.len())
        .min_by(|&a, &b| {
            let cap = |g: usize| grid[g].capacity.unwrap_or(f64::INFINITY);
            scores[a]
                .total_cmp(&scores[b])
                .then(cap(a).total_cmp(&cap(b)))
                .then(a.cmp(&b))
        })
        .expect("grid is nonempty");
    Ok(CvOutcome {
        best: grid[best],
        scores,
    })
}

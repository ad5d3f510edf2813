//! Repeated split / tune / fit experiments and their persisted metrics.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use fwboost_core::rng::derive_seed;
use fwboost_core::{Dataset, IterationRecord, LossKind, StepPolicy};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{generate_synthetic, load_atoms, load_csv, split, SyntheticSpec};
use crate::error::{HarnessError, Result};
use crate::protocol::{
    cross_validate, default_loss, fit, zero_error, Algorithm, FitSettings, GridSpec, Learner,
    Params, Selection,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Csv(PathBuf),
    Synthetic(SyntheticSpec),
}

impl DataSource {
    /// Loads the file, or generates the synthetic set from `seed`.
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Csv(path) => load_csv(path),
            DataSource::Synthetic(spec) => generate_synthetic(spec, derive_seed(seed, "generator")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmEntry {
    pub algorithm: Algorithm,
    /// Overrides the algorithm's default grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

fn default_repeats() -> usize {
    20
}
fn default_train_fraction() -> f64 {
    0.5
}
fn default_folds() -> usize {
    5
}
fn default_learner() -> String {
    "stump".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    /// Loss for every algorithm; defaults by task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossKind>,
    /// `stump` or `oracle:<atoms-file>`.
    #[serde(default = "default_learner")]
    pub learner: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepPolicy>,
    #[serde(default)]
    pub selection: Selection,
}

impl ExperimentConfig {
    pub fn new(data: DataSource, algorithms: &[Algorithm], iterations: usize) -> Self {
        ExperimentConfig {
            data,
            algorithms: algorithms
                .iter()
                .map(|&algorithm| AlgorithmEntry {
                    algorithm,
                    grid: None,
                })
                .collect(),
            repeats: default_repeats(),
            train_fraction: default_train_fraction(),
            folds: default_folds(),
            iterations,
            seed: 0,
            loss: None,
            learner: default_learner(),
            step: None,
            selection: Selection::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(HarnessError::Invalid(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.repeats < 1 {
            return Err(HarnessError::Invalid("need at least one repeat".into()));
        }
        if self.folds < 2 {
            return Err(HarnessError::Invalid("need at least two folds".into()));
        }
        if self.iterations < 1 {
            return Err(HarnessError::Invalid("need at least one iteration".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::Invalid("no algorithms listed".into()));
        }
        Ok(())
    }
}

/// Parses `stump` or `oracle:<atoms-file>`.
pub fn parse_learner(spec: &str) -> Result<Learner> {
    match spec.split_once(':') {
        None if spec == "stump" => Ok(Learner::Stump),
        Some(("oracle", path)) => Ok(Learner::Oracle(load_atoms(path)?)),
        _ => Err(HarnessError::Invalid(format!(
            "unknown learner {spec:?}; use stump or oracle:<atoms-file>"
        ))),
    }
}

/// One line of `records.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub algorithm: Algorithm,
    pub repeat: usize,
    pub params: Params,
    #[serde(flatten)]
    pub record: IterationRecord,
}

/// One row of `curves.csv`: means and standard deviations across repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub algorithm: Algorithm,
    pub t: usize,
    pub runs: usize,
    pub train_risk_mean: f64,
    pub train_risk_std: f64,
    pub train_error_mean: f64,
    pub train_error_std: f64,
    pub test_error_mean: f64,
    pub test_error_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub failed_runs: usize,
    pub final_test_error_mean: f64,
    pub final_test_error_std: f64,
    pub best_test_error_mean: f64,
    pub best_iteration: usize,
    pub final_train_risk_mean: f64,
    pub selected: Vec<Params>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub algorithms: Vec<AlgorithmSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub records: Vec<RunRecord>,
    pub curves: Vec<CurveRow>,
    pub summary: Summary,
}

impl ExperimentResult {
    /// Mean test-error curve of `algorithm`.
    pub fn test_curve(&self, algorithm: Algorithm) -> Vec<f64> {
        self.curves
            .iter()
            .filter(|c| c.algorithm == algorithm)
            .map(|c| c.test_error_mean)
            .collect()
    }
}

struct Run {
    params: Params,
    records: Vec<IterationRecord>,
    /// Train risk, train error and test error after each `t ≤ T`, padded.
    padded: Vec<[f64; 3]>,
}

fn run_once(
    config: &ExperimentConfig,
    data: &Dataset,
    learner: &Learner,
    entry: &AlgorithmEntry,
    repeat: usize,
) -> Result<Run> {
    let seed = derive_seed(config.seed, &format!("repeat-{repeat}"));
    let (train, test) = split(data, config.train_fraction, derive_seed(seed, "split"))?;
    let mut settings = FitSettings::new(data.task(), config.iterations);
    settings.loss = config.loss.unwrap_or_else(|| default_loss(data.task()));
    settings.learner = learner.clone();
    settings.step = config.step;
    settings.seed = derive_seed(seed, &format!("fit/{}", entry.algorithm));
    let grid = entry
        .grid
        .clone()
        .unwrap_or_else(|| entry.algorithm.default_grid())
        .points();
    let cv_seed = derive_seed(seed, &format!("cv/{}", entry.algorithm));
    let tuned = cross_validate(
        &train,
        entry.algorithm,
        &grid,
        config.folds,
        &settings,
        config.selection,
        cv_seed,
    )?;
    // The test half is touched only from here on.
    let report = fit(entry.algorithm, &tuned.best, &settings, &train, Some(&test))?;
    let initial = {
        let loss = fwboost_core::LossModel::new(settings.loss, 1.0)?;
        let zeros = vec![0.0; train.len()];
        [
            loss.empirical_risk(&zeros, train.targets())?,
            zero_error(&train),
            zero_error(&test),
        ]
    };
    let mut padded: Vec<[f64; 3]> = report
        .records
        .iter()
        .map(|r| {
            [
                r.train_risk,
                r.train_error,
                r.test_error.unwrap_or(f64::NAN),
            ]
        })
        .collect();
    let last = padded.last().copied().unwrap_or(initial);
    padded.resize(config.iterations, last);
    Ok(Run {
        params: tuned.best,
        records: report.records,
        padded,
    })
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Runs every repeat of every algorithm and aggregates the results. A repeat
/// whose fit fails is logged and left out of the aggregates.
pub fn execute_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let data = config.data.load(config.seed)?;
    let learner = parse_learner(&config.learner)?;
    let jobs: Vec<(usize, usize)> = (0..config.algorithms.len())
        .flat_map(|a| (0..config.repeats).map(move |r| (a, r)))
        .collect();
    let outcomes: Vec<Result<Run>> = jobs
        .par_iter()
        .map(|&(a, r)| run_once(config, &data, &learner, &config.algorithms[a], r))
        .collect();

    let mut records = Vec::new();
    let mut curves = Vec::new();
    let mut summaries = Vec::new();
    let t_max = config.iterations;
    for (a, entry) in config.algorithms.iter().enumerate() {
        let mut runs = Vec::new();
        let mut failed = 0;
        for (r, outcome) in outcomes[a * config.repeats..(a + 1) * config.repeats]
            .iter()
            .enumerate()
        {
            match outcome {
                Ok(run) => runs.push((r, run)),
                Err(e) => {
                    log::warn!("{} repeat {r} failed: {e}", entry.algorithm);
                    failed += 1;
                }
            }
        }
        for &(r, run) in &runs {
            records.extend(run.records.iter().map(|rec| RunRecord {
                run_id: format!("{}-{r}", entry.algorithm),
                algorithm: entry.algorithm,
                repeat: r,
                params: run.params,
                record: rec.clone(),
            }));
        }
        let mut test_means = Vec::with_capacity(t_max);
        for t in 0..t_max {
            let column = |k: usize| {
                runs.iter()
                    .map(|(_, run)| run.padded[t][k])
                    .collect::<Vec<_>>()
            };
            let (train_risk_mean, train_risk_std) = mean_std(&column(0));
            let (train_error_mean, train_error_std) = mean_std(&column(1));
            let (test_error_mean, test_error_std) = mean_std(&column(2));
            test_means.push(test_error_mean);
            curves.push(CurveRow {
                algorithm: entry.algorithm,
                t: t + 1,
                runs: runs.len(),
                train_risk_mean,
                train_risk_std,
                train_error_mean,
                train_error_std,
                test_error_mean,
                test_error_std,
            });
        }
        let finals: Vec<f64> = runs
            .iter()
            .map(|(_, run)| run.padded[t_max - 1][2])
            .collect();
        let (final_test_error_mean, final_test_error_std) = mean_std(&finals);
        let (best_idx, best) =
            test_means
                .iter()
                .copied()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                );
        summaries.push(AlgorithmSummary {
            algorithm: entry.algorithm,
            runs: runs.len(),
            failed_runs: failed,
            final_test_error_mean,
            final_test_error_std,
            best_test_error_mean: best,
            best_iteration: best_idx + 1,
            final_train_risk_mean: mean_std(
                &runs
                    .iter()
                    .map(|(_, run)| run.padded[t_max - 1][0])
                    .collect::<Vec<_>>(),
            )
            .0,
            selected: runs.iter().map(|(_, run)| run.params).collect(),
        });
    }
    Ok(ExperimentResult {
        records,
        curves,
        summary: Summary {
            config: config.clone(),
            algorithms: summaries,
        },
    })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `records.jsonl`, `curves.csv` and `summary.json` under `dir`.
pub fn write_outputs(result: &ExperimentResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let path = dir.join("records.jsonl");
    let mut out = std::io::BufWriter::new(fs::File::create(&path).map_err(io_err(&path))?);
    for rec in &result.records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n").map_err(io_err(&path))?;
    }
    out.flush().map_err(io_err(&path))?;

    let path = dir.join("curves.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|source| HarnessError::Csv {
        path: path.clone(),
        source,
    })?;
    for row in &result.curves {
        w.serialize(row).map_err(|source| HarnessError::Csv {
            path: path.clone(),
            source,
        })?;
    }
    w.flush().map_err(io_err(&path))?;

    let path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&result.summary)?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(())
}

/// Runs the experiment and writes its three output files.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<ExperimentResult> {
    let result = execute_experiment(config)?;
    write_outputs(&result, out)?;
    Ok(result)
}

/// Converts `curves.csv` to long format: `algorithm,t,metric,mean,std`.
pub fn curves_to_long(curves: &Path, out: &Path) -> Result<()> {
    let mut rdr = csv::Reader::from_path(curves).map_err(|source| HarnessError::Csv {
        path: curves.into(),
        source,
    })?;
    let mut w = csv::Writer::from_path(out).map_err(|source| HarnessError::Csv {
        path: out.into(),
        source,
    })?;
    let csv_out = |source| HarnessError::Csv {
        path: out.into(),
        source,
    };
    w.write_record(["algorithm", "t", "metric", "mean", "std"])
        .map_err(csv_out)?;
    for row in rdr.deserialize() {
        let row: CurveRow = row.map_err(|source| HarnessError::Csv {
            path: curves.into(),
            source,
        })?;
        let t = row.t.to_string();
        let metrics = [
            ("train_risk", row.train_risk_mean, row.train_risk_std),
            ("train_error", row.train_error_mean, row.train_error_std),
            ("test_error", row.test_error_mean, row.test_error_std),
        ];
        for (name, mean, std) in metrics {
            w.write_record([
                row.algorithm.name(),
                &t,
                name,
                &mean.to_string(),
                &std.to_string(),
            ])
            .map_err(csv_out)?;
        }
    }
    w.flush().map_err(io_err(out))
}

/// Groups per-repeat selections for display.
pub fn selection_counts(summary: &AlgorithmSummary) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for p in &summary.selected {
        *counts
            .entry(serde_json::to_string(p).unwrap_or_default())
            .or_insert(0) += 1;
    }
    counts
}

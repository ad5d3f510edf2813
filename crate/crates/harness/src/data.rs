//! CSV ingestion, train/test splitting, fold assignment, synthetic
//! generators and atom files.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use fwboost_core::rng::stream;
use fwboost_core::{Dataset, Hypothesis, Task};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Reads a headed, comma-separated file whose last column is the target.
///
/// Targets drawn from `{−1, +1}` make a classification task; `{0, 1}` is
/// remapped to `{−1, +1}`. Anything else is regression.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, path)
}

/// [`load_csv`] on any reader; `origin` only labels errors.
pub fn read_csv(reader: impl std::io::Read, origin: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let csv_err = |source| HarnessError::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() < 2 {
        return Err(HarnessError::Invalid(format!(
            "{}: need at least one feature column and a target column",
            origin.display()
        )));
    }
    let n_features = headers.len() - 1;
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = i + 1;
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| HarnessError::Parse {
                row,
                column: headers.get(j).unwrap_or("?").to_string(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(HarnessError::Parse {
                    row,
                    column: headers[j].to_string(),
                    value: cell.to_string(),
                });
            }
            if j < n_features {
                features.push(value);
            } else {
                targets.push(value);
            }
        }
    }
    if targets.is_empty() {
        return Err(HarnessError::Empty(origin.to_path_buf()));
    }
    let task = infer_task(&mut targets);
    Ok(Dataset::new(features, n_features, targets, task)?)
}

fn infer_task(targets: &mut [f64]) -> Task {
    if targets.iter().all(|&y| y == 1.0 || y == -1.0) {
        Task::BinaryClassification
    } else if targets.iter().all(|&y| y == 0.0 || y == 1.0) {
        targets.iter_mut().for_each(|y| *y = 2.0 * *y - 1.0);
        Task::BinaryClassification
    } else {
        Task::Regression
    }
}

/// Writes `data` with columns `x0..x{d−1},y`.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    })?;
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut header: Vec<String> = (0..data.n_features()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header).map_err(csv_err)?;
    for (row, y) in data.rows().zip(data.targets()) {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(y.to_string());
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Random train/test partition with `floor(m·fraction)` training rows.
/// Both parts keep the original row order.
pub fn split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(HarnessError::Invalid(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let m = data.len();
    let n_train = (m as f64 * train_fraction).floor() as usize;
    if n_train == 0 || n_train == m {
        return Err(HarnessError::Invalid(format!(
            "splitting {m} rows at {train_fraction} leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream(seed, "split"));
    let (train, test) = order.split_at(n_train);
    let (mut train, mut test) = (train.to_vec(), test.to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((data.select(&train)?, data.select(&test)?))
}

/// Validation row indices of each of `folds` folds (sizes differ by at most
/// one). Classification folds whose training or validation part holds a
/// single class are reshuffled once; a second failure is an error.
pub fn kfold(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let m = data.len();
    if folds < 2 || folds > m {
        return Err(HarnessError::Invalid(format!(
            "cannot cut {m} rows into {folds} folds"
        )));
    }
    for attempt in ["folds", "folds-retry"] {
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(&mut stream(seed, attempt));
        let parts: Vec<Vec<usize>> = (0..folds)
            .map(|k| {
                let mut part = order[k * m / folds..(k + 1) * m / folds].to_vec();
                part.sort_unstable();
                part
            })
            .collect();
        if data.task() == Task::Regression || parts.iter().all(|p| fold_has_both_classes(data, p)) {
            return Ok(parts);
        }
    }
    Err(HarnessError::Invalid(
        "a cross-validation fold holds a single class".into(),
    ))
}

fn fold_has_both_classes(data: &Dataset, val: &[usize]) -> bool {
    let y = data.targets();
    let classes = |rows: &mut dyn Iterator<Item = usize>| {
        let (mut pos, mut neg) = (false, false);
        for i in rows {
            pos |= y[i] > 0.0;
            neg |= y[i] < 0.0;
        }
        pos && neg
    };
    let mut in_val = val.iter().copied();
    let mut in_train = (0..data.len()).filter(|i| val.binary_search(i).is_err());
    classes(&mut in_val) && classes(&mut in_train)
}

/// Training and validation parts of fold `k`.
pub fn fold_split(data: &Dataset, folds: &[Vec<usize>], k: usize) -> Result<(Dataset, Dataset)> {
    let val = &folds[k];
    let train: Vec<usize> = (0..data.len())
        .filter(|i| val.binary_search(i).is_err())
        .collect();
    Ok((data.select(&train)?, data.select(val)?))
}

/// A named generator and its numeric parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

pub const GENERATORS: [&str; 3] = ["step-regression", "two-gaussian", "separable-stump"];

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn size(params: &BTreeMap<String, f64>, key: &str, default: usize) -> Result<usize> {
    let v = param(params, key, default as f64);
    if v < 1.0 || v.fract() != 0.0 {
        return Err(HarnessError::Invalid(format!(
            "parameter {key} must be a positive integer, got {v}"
        )));
    }
    Ok(v as usize)
}

/// Synthetic datasets, deterministic per seed.
///
/// * `step-regression` (`m` = 200, `sigma` = 0.3): `x ~ U(0, 1)`,
///   `y = 1{x > 0.5} + N(0, σ²)`.
/// * `two-gaussian` (`m` = 200, `separation` = 2, `eta` = 0.2, `dim` = 2):
///   balanced classes `c = ±1` with `x ~ N(c·separation/2·1, I)` and each
///   label flipped with probability `eta`.
/// * `separable-stump` (`m` = 100, `dim` = 2): `x ~ U(0, 1)^dim`,
///   `y = +1` if `x₀ ≤ 0.5` else `−1`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    let p = &spec.params;
    let mut rng = stream(seed, &format!("synthetic/{}", spec.name));
    match spec.name.as_str() {
        "step-regression" => {
            let m = size(p, "m", 200)?;
            let sigma = param(p, "sigma", 0.3);
            let noise = Normal::new(0.0, sigma)
                .map_err(|e| HarnessError::Invalid(format!("sigma: {e}")))?;
            let x: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            let y = x
                .iter()
                .map(|&x| f64::from(u8::from(x > 0.5)) + noise.sample(&mut rng))
                .collect();
            Ok(Dataset::new(x, 1, y, Task::Regression)?)
        }
        "two-gaussian" => {
            let m = size(p, "m", 200)?;
            let dim = size(p, "dim", 2)?;
            let half = param(p, "separation", 2.0) / 2.0;
            let eta = param(p, "eta", 0.2);
            if !(0.0..=1.0).contains(&eta) {
                return Err(HarnessError::Invalid(format!(
                    "eta must lie in [0, 1], got {eta}"
                )));
            }
            let unit = Normal::new(0.0, 1.0).expect("unit normal");
            let mut x = Vec::with_capacity(m * dim);
            let mut y = Vec::with_capacity(m);
            for _ in 0..m {
                let c = if rng.random::<bool>() { 1.0 } else { -1.0 };
                x.extend((0..dim).map(|_| c * half + unit.sample(&mut rng)));
                y.push(if rng.random::<f64>() < eta { -c } else { c });
            }
            Ok(Dataset::new(x, dim, y, Task::BinaryClassification)?)
        }
        "separable-stump" => {
            let m = size(p, "m", 100)?;
            let dim = size(p, "dim", 2)?;
            let x: Vec<f64> = (0..m * dim).map(|_| rng.random::<f64>()).collect();
            let y = (0..m)
                .map(|i| if x[i * dim] <= 0.5 { 1.0 } else { -1.0 })
                .collect();
            Ok(Dataset::new(x, dim, y, Task::BinaryClassification)?)
        }
        other => Err(HarnessError::Invalid(format!(
            "unknown generator {other:?}; known: {}",
            GENERATORS.join(", ")
        ))),
    }
}

/// Parses an atoms file: one `feature,threshold,left,right` stump per line.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_atoms(path: impl AsRef<Path>) -> Result<Vec<Hypothesis>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_atoms(&text)
}

pub fn parse_atoms(text: &str) -> Result<Vec<Hypothesis>> {
    let mut atoms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || {
            HarnessError::Invalid(format!(
                "atoms line {}: expected feature,threshold,left,right",
                i + 1
            ))
        };
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 4 {
            return Err(bad());
        }
        let feature: usize = cells[0].parse().map_err(|_| bad())?;
        let nums: Vec<f64> = cells[1..]
            .iter()
            .map(|c| c.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        atoms.push(Hypothesis::regression(feature, nums[0], nums[1], nums[2]));
    }
    if atoms.is_empty() {
        return Err(HarnessError::Invalid("atoms file lists no stumps".into()));
    }
    Ok(atoms)
}

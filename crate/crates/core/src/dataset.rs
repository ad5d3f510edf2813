//! Training samples: a dense feature matrix with one target per row.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Regression,
    BinaryClassification,
}

/// Row-major feature matrix (`m × d`) with targets.
///
/// Classification targets are exactly `±1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    targets: Vec<f64>,
    n_features: usize,
    task: Task,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        targets: Vec<f64>,
        task: Task,
    ) -> Result<Self> {
        let m = targets.len();
        if m == 0 || n_features == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one row and one column (got {m} x {n_features})"
            )));
        }
        if features.len() != m * n_features {
            return Err(Error::LengthMismatch {
                expected: m * n_features,
                actual: features.len(),
            });
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {}, column {}",
                i / n_features,
                i % n_features
            )));
        }
        if let Some(i) = targets.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite target at row {i}"
            )));
        }
        if task == Task::BinaryClassification {
            check_binary(&targets)?;
        }
        Ok(Dataset {
            features,
            targets,
            n_features,
            task,
        })
    }

    /// Builds a dataset from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>, task: Task) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: bad.len(),
            });
        }
        check_len(rows.len(), targets.len())?;
        Self::new(rows.concat(), d, targets, task)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.features[i * self.n_features + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.features
            .iter()
            .skip(j)
            .step_by(self.n_features)
            .copied()
    }

    /// Copies the listed rows, in the given order, into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut targets = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidParameter(format!(
                    "row index {i} out of range"
                )));
            }
            features.extend_from_slice(self.row(i));
            targets.push(self.targets[i]);
        }
        Self::new(features, self.n_features, targets, self.task)
    }

    /// Returns the number of distinct target classes (classification only is meaningful).
    pub fn class_count(&self) -> usize {
        let pos = self.targets.iter().any(|&y| y > 0.0);
        let neg = self.targets.iter().any(|&y| y < 0.0);
        usize::from(pos) + usize::from(neg)
    }
}

pub(crate) fn check_binary(targets: &[f64]) -> Result<()> {
    match targets.iter().position(|&y| y != 1.0 && y != -1.0) {
        Some(index) => Err(Error::NonBinaryTarget {
            index,
            value: targets[index],
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_binary_classification_targets() {
        let err = Dataset::from_rows(
            &[vec![0.0], vec![1.0]],
            vec![1.0, 0.5],
            Task::BinaryClassification,
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::NonBinaryTarget {
                index: 1,
                value: 0.5
            }
        );
    }

    #[test]
    fn rejects_empty() {
        assert!(Dataset::new(vec![], 1, vec![], Task::Regression).is_err());
    }

    #[test]
    fn column_and_select() {
        let d = Dataset::from_rows(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec![0.1, 0.2, 0.3],
            Task::Regression,
        )
        .unwrap();
        assert_eq!(d.column(1).collect::<Vec<_>>(), vec![2.0, 4.0, 6.0]);
        let s = d.select(&[2, 0]).unwrap();
        assert_eq!(s.row(0), &[5.0, 6.0]);
        assert_eq!(s.targets(), &[0.3, 0.1]);
    }
}

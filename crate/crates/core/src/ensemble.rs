//! Weighted ensembles `F = Σ α_j h_j` with l1-ball bookkeeping.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;

/// Slack allowed on `‖α‖₁ ≤ C`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Lowest coefficient value tolerated before it counts as negative.
const NEGATIVE_COEF_TOL: f64 = 1e-12;

/// Ensemble values `[F(x_1), …, F(x_m)]` on a fixed sample.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PredictionVector(pub Vec<f64>);

impl PredictionVector {
    pub fn zeros(m: usize) -> Self {
        PredictionVector(vec![0.0; m])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for PredictionVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for PredictionVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for PredictionVector {
    fn from(v: Vec<f64>) -> Self {
        PredictionVector(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub coef: f64,
    pub hypothesis: Hypothesis,
}

/// Outcome of an away step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AwayOutcome {
    /// The away atom kept a positive coefficient.
    Shrunk,
    /// The away atom reached zero and was removed.
    Dropped,
}

/// Append-only list of atoms; the only removal is an away-step drop.
///
/// Frank-Wolfe ensembles keep every coefficient nonnegative with
/// `Σ α_j ≤ C`. An unconstrained ensemble (capacity `∞`) is used by the
/// gradient boosting baselines, which add atoms with arbitrary coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    #[serde(with = "capacity_serde")]
    capacity: f64,
    atoms: Vec<Atom>,
}

/// An infinite capacity is stored as `null`.
mod capacity_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &f64, s: S) -> Result<S::Ok, S::Error> {
        c.is_finite().then_some(*c).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl Ensemble {
    pub fn new(capacity: f64) -> Result<Self> {
        if !(capacity > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        Ok(Ensemble {
            capacity,
            atoms: Vec::new(),
        })
    }

    pub fn unconstrained() -> Self {
        Ensemble {
            capacity: f64::INFINITY,
            atoms: Vec::new(),
        }
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.coef).collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn l1_norm(&self) -> f64 {
        self.atoms.iter().map(|a| a.coef.abs()).sum()
    }

    /// Indices of atoms with a nonzero coefficient.
    pub fn active_set(&self) -> Vec<usize> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.coef != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn active_len(&self) -> usize {
        self.atoms.iter().filter(|a| a.coef != 0.0).count()
    }

    pub fn is_feasible(&self) -> bool {
        self.l1_norm() <= self.capacity + FEASIBILITY_TOL
    }

    fn require_capacity(&self) -> Result<f64> {
        if self.capacity.is_finite() {
            Ok(self.capacity)
        } else {
            Err(Error::InvalidParameter(
                "Frank-Wolfe updates need a finite capacity".into(),
            ))
        }
    }

    /// `F ← (1−γ) F + γ C h`: scales every coefficient by `1−γ` and appends
    /// `h` with coefficient `γ C`.
    pub fn fw_update(&mut self, hypothesis: Hypothesis, gamma: f64) -> Result<()> {
        let capacity = self.require_capacity()?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidStep(gamma));
        }
        for atom in &mut self.atoms {
            atom.coef *= 1.0 - gamma;
        }
        self.atoms.push(Atom {
            coef: gamma * capacity,
            hypothesis,
        });
        self.debug_check();
        Ok(())
    }

    /// Frank-Wolfe step towards an atom already in the list: scales every
    /// coefficient by `1−γ` and adds `γ C` to atom `index`.
    pub fn fw_update_at(&mut self, index: usize, gamma: f64) -> Result<()> {
        let capacity = self.require_capacity()?;
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidStep(gamma));
        }
        if index >= self.atoms.len() {
            return Err(Error::NotActive(index));
        }
        for atom in &mut self.atoms {
            atom.coef *= 1.0 - gamma;
        }
        self.atoms[index].coef += gamma * capacity;
        self.debug_check();
        Ok(())
    }

    /// Multiplies every coefficient by `factor ≥ 0`, staying within the
    /// capacity up to [`FEASIBILITY_TOL`].
    pub fn scale(&mut self, factor: f64) -> Result<()> {
        let capacity = self.require_capacity()?;
        if !(factor >= 0.0) || self.l1_norm() * factor > capacity + FEASIBILITY_TOL {
            return Err(Error::InvalidStep(factor));
        }
        for atom in &mut self.atoms {
            atom.coef *= factor;
        }
        Ok(())
    }

    /// Largest admissible away step on atom `index`: `α/(C−α)`.
    pub fn away_cap(&self, index: usize) -> Result<f64> {
        let capacity = self.require_capacity()?;
        let alpha = match self.atoms.get(index) {
            Some(a) if a.coef > 0.0 => a.coef,
            _ => return Err(Error::NotActive(index)),
        };
        if alpha >= capacity {
            return Err(Error::SaturatedAwayAtom);
        }
        Ok(alpha / (capacity - alpha))
    }

    /// `F ← (1+γ) F − γ C h_index`. At `γ = away_cap(index)` the atom is
    /// removed (drop step).
    pub fn away_update(&mut self, index: usize, gamma: f64) -> Result<AwayOutcome> {
        let capacity = self.require_capacity()?;
        let cap = self.away_cap(index)?;
        if !(gamma >= 0.0) {
            return Err(Error::InvalidStep(gamma));
        }
        if gamma > cap {
            return Err(Error::AwayStepTooLarge { gamma, cap });
        }
        if gamma == 0.0 {
            return Ok(AwayOutcome::Shrunk);
        }
        for atom in &mut self.atoms {
            atom.coef *= 1.0 + gamma;
        }
        let outcome = if gamma == cap {
            self.atoms.remove(index);
            AwayOutcome::Dropped
        } else {
            let away = &mut self.atoms[index];
            away.coef = (away.coef - gamma * capacity).max(0.0);
            AwayOutcome::Shrunk
        };
        self.debug_check();
        Ok(outcome)
    }

    /// Appends an atom with an arbitrary coefficient (unconstrained ensembles).
    pub fn push(&mut self, coef: f64, hypothesis: Hypothesis) {
        self.atoms.push(Atom { coef, hypothesis });
    }

    pub fn truncate(&mut self, len: usize) {
        self.atoms.truncate(len);
    }

    pub fn predict(&self, data: &Dataset) -> Result<PredictionVector> {
        let mut out = vec![0.0; data.len()];
        for atom in &self.atoms {
            atom.hypothesis.check_dim(data.n_features())?;
            for (o, row) in out.iter_mut().zip(data.rows()) {
                *o += atom.coef * atom.hypothesis.eval(row);
            }
        }
        Ok(PredictionVector(out))
    }

    fn debug_check(&self) {
        debug_assert!(
            self.atoms.iter().all(|a| a.coef >= -NEGATIVE_COEF_TOL),
            "negative coefficient"
        );
        debug_assert!(
            self.is_feasible(),
            "l1 norm {} exceeds capacity {}",
            self.l1_norm(),
            self.capacity
        );
    }
}

/// Evaluates `F` on every row of `data`; the empty ensemble gives zeros.
pub fn predict_ensemble(ensemble: &Ensemble, data: &Dataset) -> Result<PredictionVector> {
    ensemble.predict(data)
}

pub fn ensemble_fw_update(
    ensemble: &Ensemble,
    hypothesis: Hypothesis,
    gamma: f64,
) -> Result<Ensemble> {
    let mut next = ensemble.clone();
    next.fw_update(hypothesis, gamma)?;
    Ok(next)
}

pub fn ensemble_away_update(
    ensemble: &Ensemble,
    away_index: usize,
    gamma: f64,
) -> Result<Ensemble> {
    let mut next = ensemble.clone();
    next.away_update(away_index, gamma)?;
    Ok(next)
}

/// An ensemble mutation, replayable on predictions for another sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Update {
    FrankWolfe {
        gamma: f64,
        capacity: f64,
        hypothesis: Hypothesis,
    },
    Away {
        gamma: f64,
        capacity: f64,
        hypothesis: Hypothesis,
    },
    Additive {
        coef: f64,
        hypothesis: Hypothesis,
    },
}

impl Update {
    /// Applies the same affine map to held-out predictions `preds` on `data`.
    pub fn apply(&self, preds: &mut [f64], data: &Dataset) {
        match self {
            Update::FrankWolfe {
                gamma,
                capacity,
                hypothesis,
            } => {
                for (p, row) in preds.iter_mut().zip(data.rows()) {
                    *p = (1.0 - gamma) * *p + gamma * capacity * hypothesis.eval(row);
                }
            }
            Update::Away {
                gamma,
                capacity,
                hypothesis,
            } => {
                for (p, row) in preds.iter_mut().zip(data.rows()) {
                    *p = (1.0 + gamma) * *p - gamma * capacity * hypothesis.eval(row);
                }
            }
            Update::Additive { coef, hypothesis } => {
                for (p, row) in preds.iter_mut().zip(data.rows()) {
                    *p += coef * hypothesis.eval(row);
                }
            }
        }
    }
}

//! Computable forms of the capacity and convergence theory: empirical
//! Rademacher complexity, the generalization bound and the `O(1/t)` rate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::hypothesis::Hypothesis;
use crate::losses::LossModel;
use crate::rng::stream;
use crate::step::step_schedule;

pub const DEFAULT_DRAWS: usize = 20_000;

/// Largest sample for which all `2^m` sign vectors are enumerated.
pub const MAX_EXACT_SAMPLES: usize = 12;

pub const MAX_GRID_BASE: usize = 6;
pub const MAX_GRID_TERMS: usize = 3;

/// How the expectation over Rademacher signs is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SigmaMode {
    Exact,
    MonteCarlo { draws: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RademacherEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub draws: usize,
}

/// Evaluates `f` on every sign vector (exact) or on sampled ones, and
/// averages each of its `K` outputs. Exact mode visits `σ` and `−σ`
/// together and sums each pair before accumulating, so odd functionals
/// average to exactly zero.
fn sigma_average<const K: usize>(
    m: usize,
    mode: SigmaMode,
    mut f: impl FnMut(&[f64]) -> [f64; K],
) -> Result<[RademacherEstimate; K]> {
    let mut sum = [0.0; K];
    let mut sum_sq = [0.0; K];
    let mut sigma = vec![0.0; m];
    let n = match mode {
        SigmaMode::Exact => {
            if m > MAX_EXACT_SAMPLES {
                return Err(Error::InvalidParameter(format!(
                    "exact enumeration supports at most {MAX_EXACT_SAMPLES} samples, got {m}"
                )));
            }
            let count = 1usize << m;
            for bits in 0..count / 2 {
                for (i, s) in sigma.iter_mut().enumerate() {
                    *s = if bits >> i & 1 == 1 { 1.0 } else { -1.0 };
                }
                let a = f(&sigma);
                sigma.iter_mut().for_each(|s| *s = -*s);
                let b = f(&sigma);
                for k in 0..K {
                    sum[k] += a[k] + b[k];
                }
            }
            count
        }
        SigmaMode::MonteCarlo { draws, seed } => {
            if draws < 1 {
                return Err(Error::InvalidParameter("need at least one draw".into()));
            }
            let mut rng = stream(seed, "rademacher");
            for _ in 0..draws {
                for s in sigma.iter_mut() {
                    *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
                let a = f(&sigma);
                for k in 0..K {
                    sum[k] += a[k];
                    sum_sq[k] += a[k] * a[k];
                }
            }
            draws
        }
    };
    let nf = n as f64;
    Ok(std::array::from_fn(|k| {
        let mean = sum[k] / nf;
        let std_error = match mode {
            SigmaMode::MonteCarlo { .. } if n > 1 => {
                (((sum_sq[k] - nf * mean * mean) / (nf - 1.0)).max(0.0) / nf).sqrt()
            }
            _ => 0.0,
        };
        RademacherEstimate {
            estimate: mean,
            std_error,
            draws: n,
        }
    }))
}

fn sup_correlation(values: &[Vec<f64>], sigma: &[f64]) -> f64 {
    let m = sigma.len() as f64;
    values
        .iter()
        .map(|v| v.iter().zip(sigma).map(|(a, s)| a * s).sum::<f64>() / m)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `E_σ sup_g (1/m) Σ σ_i g_i` for a class given by its value vectors.
pub fn estimate_rademacher_values(
    values: &[Vec<f64>],
    mode: SigmaMode,
) -> Result<RademacherEstimate> {
    let m = check_values(values)?;
    let [est] = sigma_average(m, mode, |sigma| [sup_correlation(values, sigma)])?;
    Ok(est)
}

fn check_values(values: &[Vec<f64>]) -> Result<usize> {
    let first = values.first().ok_or(Error::EmptyAtoms)?;
    let m = first.len();
    if m == 0 {
        return Err(Error::InvalidDataset("empty sample".into()));
    }
    for v in values {
        crate::error::check_len(m, v.len())?;
    }
    Ok(m)
}

fn evaluate_all(hypotheses: &[Hypothesis], data: &Dataset) -> Result<Vec<Vec<f64>>> {
    hypotheses.iter().map(|h| h.evaluate(data)).collect()
}

/// Empirical Rademacher complexity of a finite hypothesis list on `data`.
pub fn estimate_rademacher(
    hypotheses: &[Hypothesis],
    data: &Dataset,
    mode: SigmaMode,
) -> Result<RademacherEstimate> {
    if hypotheses.is_empty() {
        return Err(Error::EmptyAtoms);
    }
    estimate_rademacher_values(&evaluate_all(hypotheses, data)?, mode)
}

/// Both sides of the combined-class inequality, estimated on shared signs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedClassCheck {
    /// Complexity of the coefficient grid over `{Σ α_j h_j : ‖α‖₁ ≤ C, ≤ T terms}`.
    pub lhs: RademacherEstimate,
    /// `C` times the complexity of the base list.
    pub rhs: RademacherEstimate,
    /// Number of grid functions.
    pub grid_size: usize,
}

impl CombinedClassCheck {
    /// `lhs ≤ rhs + 3·(se_lhs + se_rhs) + slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs.estimate
            <= self.rhs.estimate + 3.0 * (self.lhs.std_error + self.rhs.std_error) + slack
    }
}

/// Integer vectors `k` with `Σ|k_j| ≤ budget` and at most `terms` nonzeros.
fn grid_points(
    n: usize,
    budget: i64,
    terms: usize,
    prefix: &mut Vec<i64>,
    out: &mut Vec<Vec<i64>>,
) {
    if prefix.len() == n {
        out.push(prefix.clone());
        return;
    }
    let used: i64 = prefix.iter().map(|k| k.abs()).sum();
    let nonzero = prefix.iter().filter(|&&k| k != 0).count();
    let room = if nonzero < terms { budget - used } else { 0 };
    for k in -room..=room {
        prefix.push(k);
        grid_points(n, budget, terms, prefix, out);
        prefix.pop();
    }
}

fn is_sign_symmetric(values: &[Vec<f64>]) -> bool {
    values.iter().all(|v| {
        values
            .iter()
            .any(|w| v.iter().zip(w).all(|(a, b)| (a + b).abs() <= 1e-12))
    })
}

/// Estimates `R̂` of the `T`-term combined class through a coefficient grid
/// `α = C·k/resolution` and compares it with `C·R̂(base)` on the same signs.
pub fn check_combined_class_bound(
    base: &[Hypothesis],
    capacity: f64,
    terms: usize,
    data: &Dataset,
    mode: SigmaMode,
    resolution: usize,
) -> Result<CombinedClassCheck> {
    if base.is_empty() {
        return Err(Error::EmptyAtoms);
    }
    if base.len() > MAX_GRID_BASE || terms > MAX_GRID_TERMS || terms == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid needs 1..={MAX_GRID_TERMS} terms over at most {MAX_GRID_BASE} atoms"
        )));
    }
    if resolution < 1 {
        return Err(Error::InvalidParameter(
            "grid resolution must be at least 1".into(),
        ));
    }
    if !(capacity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    let base_values = evaluate_all(base, data)?;
    if !is_sign_symmetric(&base_values) {
        return Err(Error::InvalidParameter(
            "base list must be closed under negation".into(),
        ));
    }
    let m = data.len();
    let mut ks = Vec::new();
    grid_points(
        base.len(),
        resolution as i64,
        terms,
        &mut Vec::new(),
        &mut ks,
    );
    let grid: Vec<Vec<f64>> = ks
        .iter()
        .map(|k| {
            let mut f = vec![0.0; m];
            for (&kj, v) in k.iter().zip(&base_values) {
                if kj != 0 {
                    let a = capacity * kj as f64 / resolution as f64;
                    f.iter_mut().zip(v).for_each(|(f, v)| *f += a * v);
                }
            }
            f
        })
        .collect();

    let [lhs, rhs] = sigma_average(m, mode, |sigma| {
        [
            sup_correlation(&grid, sigma),
            capacity * sup_correlation(&base_values, sigma),
        ]
    })?;
    Ok(CombinedClassCheck {
        lhs,
        rhs,
        grid_size: grid.len(),
    })
}

/// `Ê + 2 L_l R̂ + 3 M sqrt(ln(2/δ) / (2m))`.
pub fn generalization_bound(
    empirical_risk: f64,
    lipschitz: f64,
    loss_bound: f64,
    rademacher: f64,
    delta: f64,
    m: usize,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "confidence level must lie in (0, 1), got {delta}"
        )));
    }
    if m < 1 {
        return Err(Error::InvalidParameter(
            "sample size must be positive".into(),
        ));
    }
    Ok(empirical_risk
        + 2.0 * lipschitz * rademacher
        + 3.0 * loss_bound * ((2.0 / delta).ln() / (2.0 * m as f64)).sqrt())
}

/// `C* = max(C_l / 2, 3 L(0, y) / 4)`.
pub fn convergence_constant(loss: &LossModel, initial_risk: f64) -> Result<f64> {
    Ok((loss.smoothness_constant()? / 2.0).max(0.75 * initial_risk))
}

/// Entry `t−1` holds `(C* / (2 + t))·(1 + 2δ)` for `t = 1..=T`.
pub fn convergence_bound_curve(
    loss: &LossModel,
    initial_risk: f64,
    iterations: usize,
    delta: f64,
) -> Result<Vec<f64>> {
    if iterations < 1 {
        return Err(Error::InvalidParameter(
            "need at least one iteration".into(),
        ));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance factor must be >= 0, got {delta}"
        )));
    }
    let c_star = convergence_constant(loss, initial_risk)?;
    Ok((1..=iterations)
        .map(|t| c_star / (2.0 + t as f64) * (1.0 + 2.0 * delta))
        .collect())
}

/// Additive subproblem tolerance `δ·γ_t·C_l` allowed at iteration `t`.
pub fn subproblem_tolerance(loss: &LossModel, delta: f64, t: usize) -> Result<f64> {
    Ok(delta * step_schedule(t)? * loss.smoothness_constant()?)
}

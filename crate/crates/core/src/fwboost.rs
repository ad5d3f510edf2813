//! Functional Frank-Wolfe boosting over the l1 ball of radius `C`.
//!
//! Each round computes the negative functional gradient `r_t`, asks a
//! [`LinearOracle`] for a unit hypothesis `h` maximizing `⟨h, r_t⟩`, and
//! moves toward the vertex `C·h`:
//! `F_t = F_{t−1} + γ_t (C·h − F_{t−1})`. The classification reduction
//! ([`ClassifierOracle`]) and the least-squares reduction
//! ([`RegressionOracle`]) give the two practical variants; finite atom lists
//! ([`FiniteAtomOracle`]) solve the subproblem exactly and also drive the
//! away-step variant in [`AwayStep`].

use crate::dataset::Dataset;
use crate::ensemble::{Ensemble, Update};
use crate::error::{check_len, Error, Result};
use crate::hypothesis::Hypothesis;
use crate::learners::{dot, AtomTable, StumpLearner};
use crate::losses::{negative_gradient_into, risk_unchecked, LossModel};
use crate::report::{
    error_metric, FitReport, Holdout, IterationRecord, StepKind, TerminationReason,
};
use crate::step::{line_search, line_search_bounded, step_schedule, StepPolicy};

pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Tolerance used when checking that atoms lie in the unit l∞ ball.
const UNIT_BALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwConfig {
    pub capacity: f64,
    pub iterations: usize,
    pub policy: StepPolicy,
    /// Stop once the Frank-Wolfe gap falls to this value.
    pub gap_tol: f64,
}

impl FwConfig {
    pub fn new(capacity: f64, iterations: usize) -> Self {
        FwConfig {
            capacity,
            iterations,
            policy: StepPolicy::Schedule,
            gap_tol: DEFAULT_GAP_TOL,
        }
    }

    pub fn policy(mut self, policy: StepPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn gap_tol(mut self, gap_tol: f64) -> Self {
        self.gap_tol = gap_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.capacity > 0.0) || !self.capacity.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "capacity must be positive, got {}",
                self.capacity
            )));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParameter(
                "need at least one iteration".into(),
            ));
        }
        Ok(())
    }
}

/// `sign(r_i)` with `sign(0) = +1`, and weights `|r_i| / ‖r‖₁`.
pub fn reduce_to_classification(r: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("residuals"));
    }
    let norm: f64 = r.iter().map(|v| v.abs()).sum();
    if norm == 0.0 {
        return Err(Error::ZeroResidual);
    }
    let labels = r
        .iter()
        .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    let weights = r.iter().map(|v| v.abs() / norm).collect();
    Ok((labels, weights))
}

/// Rescales `h*` to unit l∞ norm on the training rows. Returns the unit
/// hypothesis and the factor `C / ‖h*‖_∞` that maps `h*` onto the vertex.
pub fn scale_to_linf_ball(
    h_star: &Hypothesis,
    data: &Dataset,
    capacity: f64,
) -> Result<(Hypothesis, f64)> {
    if !(capacity > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "capacity must be positive, got {capacity}"
        )));
    }
    let norm = h_star.linf_norm(data)?;
    if norm == 0.0 {
        return Err(Error::ZeroHypothesis);
    }
    Ok((h_star.scaled(1.0 / norm), capacity / norm))
}

/// `⟨vertex − current, r⟩`.
pub fn fw_gap(r: &[f64], vertex_preds: &[f64], current_preds: &[f64]) -> Result<f64> {
    check_len(r.len(), vertex_preds.len())?;
    check_len(r.len(), current_preds.len())?;
    Ok(r.iter()
        .zip(vertex_preds)
        .zip(current_preds)
        .map(|((r, v), f)| r * (v - f))
        .sum())
}

/// Input to one subproblem solve.
#[derive(Debug, Clone, Copy)]
pub struct OracleQuery<'r> {
    /// 1-based iteration index.
    pub t: usize,
    /// Negative functional gradient at the current iterate.
    pub residual: &'r [f64],
}

/// A unit hypothesis and its training-set values; the vertex is `C·values`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub hypothesis: Hypothesis,
    pub values: Vec<f64>,
}

/// Solver for `argmax_{h ∈ H¹} ⟨h, r⟩`. `None` signals that no
/// descent direction exists.
pub trait LinearOracle {
    fn solve(&mut self, query: &OracleQuery<'_>) -> Result<Option<Vertex>>;
}

impl<O: LinearOracle + ?Sized> LinearOracle for Box<O> {
    fn solve(&mut self, query: &OracleQuery<'_>) -> Result<Option<Vertex>> {
        (**self).solve(query)
    }
}

/// Weighted-error stump classifier on `(sign(r), |r|/‖r‖₁)`.
#[derive(Debug, Clone)]
pub struct ClassifierOracle<'a> {
    data: &'a Dataset,
    learner: StumpLearner,
}

impl<'a> ClassifierOracle<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        ClassifierOracle {
            data,
            learner: StumpLearner::new(data),
        }
    }
}

impl LinearOracle for ClassifierOracle<'_> {
    fn solve(&mut self, query: &OracleQuery<'_>) -> Result<Option<Vertex>> {
        let (labels, weights) = match reduce_to_classification(query.residual) {
            Ok(lw) => lw,
            Err(Error::ZeroResidual) => return Ok(None),
            Err(e) => return Err(e),
        };
        let h = self.learner.fit_classifier(&weights, &labels)?;
        let values = h.evaluate(self.data)?;
        Ok(Some(Vertex {
            hypothesis: h,
            values,
        }))
    }
}

/// Least-squares regression stump on `r`, rescaled to unit l∞ norm.
#[derive(Debug, Clone)]
pub struct RegressionOracle<'a> {
    data: &'a Dataset,
    learner: StumpLearner,
}

impl<'a> RegressionOracle<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        RegressionOracle {
            data,
            learner: StumpLearner::new(data),
        }
    }
}

impl LinearOracle for RegressionOracle<'_> {
    fn solve(&mut self, query: &OracleQuery<'_>) -> Result<Option<Vertex>> {
        let h_star = self.learner.fit_regression(query.residual)?;
        let unit = match scale_to_linf_ball(&h_star, self.data, 1.0) {
            Ok((unit, _)) => unit,
            Err(Error::ZeroHypothesis) => return Ok(None),
            Err(e) => return Err(e),
        };
        let values = unit.evaluate(self.data)?;
        Ok(Some(Vertex {
            hypothesis: unit,
            values,
        }))
    }
}

fn unit_table(atoms: Vec<Hypothesis>, data: &Dataset) -> Result<AtomTable> {
    let table = AtomTable::new(atoms, data)?;
    let norm = table.linf_norm();
    if norm > 1.0 + UNIT_BALL_TOL {
        return Err(Error::InvalidParameter(format!(
            "atom values reach {norm}, outside the unit l-inf ball"
        )));
    }
    Ok(table)
}

/// Exact subproblem solver over an explicit atom list.
#[derive(Debug, Clone)]
pub struct FiniteAtomOracle {
    table: AtomTable,
}

impl FiniteAtomOracle {
    pub fn new(atoms: Vec<Hypothesis>, data: &Dataset) -> Result<Self> {
        Ok(FiniteAtomOracle {
            table: unit_table(atoms, data)?,
        })
    }

    pub fn table(&self) -> &AtomTable {
        &self.table
    }
}

impl LinearOracle for FiniteAtomOracle {
    fn solve(&mut self, query: &OracleQuery<'_>) -> Result<Option<Vertex>> {
        let k = self.table.argmax(query.residual);
        Ok(Some(Vertex {
            hypothesis: self.table.atom(k).clone(),
            values: self.table.values(k).to_vec(),
        }))
    }
}

/// Deliberately inexact solver: returns the *worst* atom whose vertex value
/// `⟨C·h, r⟩` is within `δ·γ_t·C_l` of the best, with `γ_t = 2/(t+2)`.
#[derive(Debug, Clone)]
pub struct ToleranceOracle {
    table: AtomTable,
    capacity: f64,
    delta: f64,
    smoothness: f64,
}

impl ToleranceOracle {
    pub fn new(
        atoms: Vec<Hypothesis>,
        data: &Dataset,
        loss: &LossModel,
        delta: f64,
    ) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance factor must be >= 0, got {delta}"
            )));
        }
        Ok(ToleranceOracle {
            table: unit_table(atoms, data)?,
            capacity: loss.capacity,
            delta,
            smoothness: loss.smoothness_constant()?,
        })
    }
}

impl LinearOracle for ToleranceOracle {
    fn solve(&mut self, query: &OracleQuery<'_>) -> Result<Option<Vertex>> {
        let r = query.residual;
        let best = self.table.inner(self.table.argmax(r), r);
        let slack = self.delta * step_schedule(query.t)? * self.smoothness / self.capacity;
        let floor = best - slack;
        let mut pick = None;
        for k in 0..self.table.len() {
            let v = self.table.inner(k, r);
            if v >= floor && pick.is_none_or(|(_, pv)| v < pv) {
                pick = Some((k, v));
            }
        }
        let (k, _) = pick.expect("the maximizer always qualifies");
        Ok(Some(Vertex {
            hypothesis: self.table.atom(k).clone(),
            values: self.table.values(k).to_vec(),
        }))
    }
}

/// Result of one call to a stepper.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Stepped(IterationRecord),
    Stopped(TerminationReason),
}

/// Shared iterate state: ensemble, training predictions and bookkeeping.
#[derive(Debug, Clone)]
struct Iterate<'a> {
    data: &'a Dataset,
    loss: LossModel,
    config: FwConfig,
    ensemble: Ensemble,
    preds: Vec<f64>,
    residual: Vec<f64>,
    direction: Vec<f64>,
    t: usize,
    stopped: Option<TerminationReason>,
    last_gap: Option<f64>,
    holdout: Option<Holdout<'a>>,
}

impl<'a> Iterate<'a> {
    fn new(data: &'a Dataset, loss: &LossModel, config: FwConfig) -> Result<Self> {
        config.validate()?;
        if loss.kind.needs_binary_targets() {
            crate::dataset::check_binary(data.targets())?;
        }
        let m = data.len();
        Ok(Iterate {
            data,
            loss: *loss,
            config,
            ensemble: Ensemble::new(config.capacity)?,
            preds: vec![0.0; m],
            residual: vec![0.0; m],
            direction: vec![0.0; m],
            t: 0,
            stopped: None,
            last_gap: None,
            holdout: None,
        })
    }

    /// Refreshes `residual`; returns a stop reason if the run is over.
    fn begin(&mut self) -> Option<TerminationReason> {
        if let Some(reason) = self.stopped {
            return Some(reason);
        }
        if self.t >= self.config.iterations {
            return self.stop(TerminationReason::MaxIters);
        }
        negative_gradient_into(
            self.loss.kind,
            &self.preds,
            self.data.targets(),
            &mut self.residual,
        );
        if self.residual.iter().all(|&v| v == 0.0) {
            return self.stop(TerminationReason::ZeroDirection);
        }
        None
    }

    fn stop(&mut self, reason: TerminationReason) -> Option<TerminationReason> {
        self.stopped = Some(reason);
        Some(reason)
    }

    fn record(&mut self, update: &Update, gamma: f64, kind: StepKind, gap: f64) -> IterationRecord {
        update.apply(&mut self.preds, self.data);
        if let Some(h) = self.holdout.as_mut() {
            h.apply(update);
        }
        self.t += 1;
        let targets = self.data.targets();
        IterationRecord {
            t: self.t,
            train_risk: risk_unchecked(self.loss.kind, &self.preds, targets),
            train_error: error_metric(self.data.task(), &self.preds, targets),
            test_error: self.holdout.as_ref().map(Holdout::error),
            fw_gap: Some(gap),
            l1_norm: self.ensemble.l1_norm(),
            active_set_size: self.ensemble.active_len(),
            gamma,
            step_kind: kind,
        }
    }

    fn step_size(&self, t: usize) -> Result<f64> {
        match self.config.policy {
            StepPolicy::Schedule => step_schedule(t),
            StepPolicy::LineSearch { tol } => line_search(
                &self.loss,
                &self.preds,
                &self.direction,
                self.data.targets(),
                tol,
            ),
        }
    }
}

/// Generic FWBoost driven one iteration at a time.
#[derive(Debug)]
pub struct FrankWolfe<'a, O> {
    state: Iterate<'a>,
    oracle: O,
}

impl<'a, O: LinearOracle> FrankWolfe<'a, O> {
    pub fn new(data: &'a Dataset, loss: &LossModel, oracle: O, config: FwConfig) -> Result<Self> {
        Ok(FrankWolfe {
            state: Iterate::new(data, loss, config)?,
            oracle,
        })
    }

    /// Also track the error metric on a held-out sample.
    pub fn with_holdout(mut self, holdout: &'a Dataset) -> Self {
        self.state.holdout = Some(Holdout::new(holdout));
        self
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.state.ensemble
    }

    /// Training-set values of the current iterate.
    pub fn preds(&self) -> &[f64] {
        &self.state.preds
    }

    pub fn iteration(&self) -> usize {
        self.state.t
    }

    pub fn last_gap(&self) -> Option<f64> {
        self.state.last_gap
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some(reason) = self.state.begin() {
            return Ok(StepOutcome::Stopped(reason));
        }
        let s = &mut self.state;
        let t = s.t + 1;
        let vertex = match self.oracle.solve(&OracleQuery {
            t,
            residual: &s.residual,
        })? {
            Some(v) => v,
            None => {
                return Ok(StepOutcome::Stopped(
                    s.stop(TerminationReason::ZeroDirection).unwrap(),
                ))
            }
        };
        check_len(s.preds.len(), vertex.values.len())?;
        let c = s.config.capacity;
        for ((d, &v), &f) in s.direction.iter_mut().zip(&vertex.values).zip(&s.preds) {
            *d = c * v - f;
        }
        let gap = dot(&s.direction, &s.residual);
        s.last_gap = Some(gap);
        if gap <= s.config.gap_tol {
            return Ok(StepOutcome::Stopped(
                s.stop(TerminationReason::GapBelowTol).unwrap(),
            ));
        }
        let gamma = s.step_size(t)?;
        s.ensemble.fw_update(vertex.hypothesis.clone(), gamma)?;
        let update = Update::FrankWolfe {
            gamma,
            capacity: c,
            hypothesis: vertex.hypothesis,
        };
        Ok(StepOutcome::Stepped(s.record(
            &update,
            gamma,
            StepKind::FrankWolfe,
            gap,
        )))
    }

    pub fn run(mut self) -> Result<FitReport> {
        let records = drive(|| self.step())?;
        Ok(finish(self.state, records))
    }
}

fn drive(mut step: impl FnMut() -> Result<StepOutcome>) -> Result<Vec<IterationRecord>> {
    let mut records = Vec::new();
    loop {
        match step()? {
            StepOutcome::Stepped(r) => records.push(r),
            StepOutcome::Stopped(_) => return Ok(records),
        }
    }
}

fn finish(state: Iterate<'_>, records: Vec<IterationRecord>) -> FitReport {
    let termination = state.stopped.unwrap_or(TerminationReason::MaxIters);
    let final_gap = match termination {
        TerminationReason::GapBelowTol => state.last_gap,
        _ => None,
    };
    FitReport {
        ensemble: state.ensemble,
        records,
        termination,
        final_gap,
    }
}

/// Generic FWBoost with a caller-supplied subproblem solver.
pub fn run_fwboost<O: LinearOracle>(
    data: &Dataset,
    loss: &LossModel,
    oracle: O,
    config: FwConfig,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    let mut fw = FrankWolfe::new(data, loss, oracle, config)?;
    if let Some(h) = holdout {
        fw = fw.with_holdout(h);
    }
    fw.run()
}

/// FWBoost with the weighted-classification reduction (vertex `C·h*`).
pub fn run_fwboost_c(
    data: &Dataset,
    loss: &LossModel,
    config: FwConfig,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    run_fwboost(data, loss, ClassifierOracle::new(data), config, holdout)
}

/// FWBoost with least-squares stumps (vertex `C·h*/‖h*‖_∞`).
pub fn run_fwboost_r(
    data: &Dataset,
    loss: &LossModel,
    config: FwConfig,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    run_fwboost(data, loss, RegressionOracle::new(data), config, holdout)
}

#[derive(Debug, Clone, Copy)]
enum Away {
    Atom(usize),
    Origin,
}

/// Frank-Wolfe with away steps over an explicit atom list.
///
/// Both branches use line search (tolerance from the config's policy). Each
/// atom holds a single coefficient. Away steps are capped at
/// `α_min/(C − α_min)`; hitting the cap removes the atom. Unused budget
/// `C − ‖α‖₁` sits on the origin, which is an away candidate of value 0.
/// Ties between the branches go to the Frank-Wolfe step.
#[derive(Debug)]
pub struct AwayStep<'a> {
    state: Iterate<'a>,
    table: AtomTable,
    /// Atom-table index of each ensemble entry.
    ids: Vec<usize>,
}

impl<'a> AwayStep<'a> {
    pub fn new(
        data: &'a Dataset,
        loss: &LossModel,
        atoms: Vec<Hypothesis>,
        config: FwConfig,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyAtoms);
        }
        Ok(AwayStep {
            state: Iterate::new(data, loss, config)?,
            table: unit_table(atoms, data)?,
            ids: Vec::new(),
        })
    }

    pub fn with_holdout(mut self, holdout: &'a Dataset) -> Self {
        self.state.holdout = Some(Holdout::new(holdout));
        self
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.state.ensemble
    }

    pub fn preds(&self) -> &[f64] {
        &self.state.preds
    }

    /// Atom-table index of each ensemble entry.
    pub fn atom_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn step(&mut self) -> Result<StepOutcome> {
        if let Some(reason) = self.state.begin() {
            return Ok(StepOutcome::Stopped(reason));
        }
        let s = &mut self.state;
        let t = s.t + 1;
        let c = s.config.capacity;
        let tol = s.config.policy.tol();
        let r = &s.residual;

        let k_fw = self.table.argmax(r);
        let current = dot(&s.preds, r);
        let gap = c * self.table.inner(k_fw, r) - current;
        s.last_gap = Some(gap);
        if gap <= s.config.gap_tol {
            return Ok(StepOutcome::Stopped(
                s.stop(TerminationReason::GapBelowTol).unwrap(),
            ));
        }

        // Worst-aligned active atom; the origin counts while budget is unused.
        let mut away: Option<(Away, f64)> = None;
        for (pos, atom) in s.ensemble.atoms().iter().enumerate() {
            if atom.coef > 0.0 {
                let v = self.table.inner(self.ids[pos], r);
                if away.is_none_or(|(_, best)| v < best) {
                    away = Some((Away::Atom(pos), v));
                }
            }
        }
        let norm = s.ensemble.l1_norm();
        let slack = c - norm;
        if slack > 0.0 && norm > 0.0 && away.is_none_or(|(_, best)| 0.0 < best) {
            away = Some((Away::Origin, 0.0));
        }
        let away = away.and_then(|(target, v)| {
            let away_gain = current - c * v;
            let cap = match target {
                Away::Atom(pos) => s.ensemble.away_cap(pos).ok()?,
                Away::Origin => slack / norm,
            };
            (t > 1 && away_gain > gap).then_some((target, cap))
        });

        match away {
            None => {
                let values = self.table.values(k_fw);
                for ((d, &v), &f) in s.direction.iter_mut().zip(values).zip(&s.preds) {
                    *d = c * v - f;
                }
                let gamma = line_search(&s.loss, &s.preds, &s.direction, s.data.targets(), tol)?;
                let hypothesis = self.table.atom(k_fw).clone();
                match self.ids.iter().position(|&k| k == k_fw) {
                    Some(pos) => s.ensemble.fw_update_at(pos, gamma)?,
                    None => {
                        s.ensemble.fw_update(hypothesis.clone(), gamma)?;
                        self.ids.push(k_fw);
                    }
                }
                let update = Update::FrankWolfe {
                    gamma,
                    capacity: c,
                    hypothesis,
                };
                Ok(StepOutcome::Stepped(s.record(
                    &update,
                    gamma,
                    StepKind::FrankWolfe,
                    gap,
                )))
            }
            Some((Away::Origin, cap)) => {
                s.direction.copy_from_slice(&s.preds);
                let gamma = line_search_bounded(
                    &s.loss,
                    &s.preds,
                    &s.direction,
                    s.data.targets(),
                    cap,
                    tol,
                )?;
                s.ensemble.scale(1.0 + gamma)?;
                let update = Update::Away {
                    gamma,
                    capacity: c,
                    hypothesis: Hypothesis::constant(0.0),
                };
                Ok(StepOutcome::Stepped(s.record(
                    &update,
                    gamma,
                    StepKind::Away,
                    gap,
                )))
            }
            Some((Away::Atom(pos), cap)) => {
                let k = self.ids[pos];
                let values = self.table.values(k);
                for ((d, &v), &f) in s.direction.iter_mut().zip(values).zip(&s.preds) {
                    *d = f - c * v;
                }
                let upper = cap.min(1.0);
                let gamma = line_search_bounded(
                    &s.loss,
                    &s.preds,
                    &s.direction,
                    s.data.targets(),
                    upper,
                    tol,
                )?;
                let gamma = if gamma == upper && upper == cap {
                    cap
                } else {
                    gamma
                };
                let outcome = s.ensemble.away_update(pos, gamma)?;
                let kind = match outcome {
                    crate::ensemble::AwayOutcome::Dropped => {
                        self.ids.remove(pos);
                        StepKind::Drop
                    }
                    crate::ensemble::AwayOutcome::Shrunk => StepKind::Away,
                };
                let update = Update::Away {
                    gamma,
                    capacity: c,
                    hypothesis: self.table.atom(k).clone(),
                };
                Ok(StepOutcome::Stepped(s.record(&update, gamma, kind, gap)))
            }
        }
    }

    pub fn run(mut self) -> Result<FitReport> {
        let records = drive(|| self.step())?;
        Ok(finish(self.state, records))
    }
}

/// Away-step Frank-Wolfe boosting over `atoms` (each within the unit l∞ ball).
pub fn run_awaystep(
    data: &Dataset,
    loss: &LossModel,
    atoms: Vec<Hypothesis>,
    config: FwConfig,
    holdout: Option<&Dataset>,
) -> Result<FitReport> {
    let mut solver = AwayStep::new(data, loss, atoms, config)?;
    if let Some(h) = holdout {
        solver = solver.with_holdout(h);
    }
    solver.run()
}

/// Long-run solution over a finite atom list, used as the reference optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub risk: f64,
    /// Frank-Wolfe gap at the returned point; `risk − gap ≤ L* ≤ risk`.
    pub gap: f64,
    pub iterations: usize,
    /// Coefficient of each atom (duplicates merged).
    pub weights: Vec<f64>,
    pub preds: Vec<f64>,
}

/// Away-step Frank-Wolfe with exact line search over `atoms`, keeping one
/// coefficient per atom and starting from the best vertex. Stops once the
/// gap reaches `gap_tol` or after `max_iters` rounds.
pub fn reference_optimum(
    data: &Dataset,
    loss: &LossModel,
    atoms: &[Hypothesis],
    max_iters: usize,
    gap_tol: f64,
    tol: f64,
) -> Result<ReferenceSolution> {
    let table = unit_table(atoms.to_vec(), data)?;
    let c = loss.capacity;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "capacity must be positive, got {c}"
        )));
    }
    let kind = loss.kind;
    let y = data.targets();
    let m = data.len();
    let mut r = vec![0.0; m];
    // Start at the best vertex so that all mass sits on atoms.
    negative_gradient_into(kind, &vec![0.0; m], y, &mut r);
    let first = table.argmax(&r);
    let mut weights = vec![0.0; table.len()];
    weights[first] = c;
    let mut preds: Vec<f64> = table.values(first).iter().map(|h| c * h).collect();
    let mut d = vec![0.0; m];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iters {
        negative_gradient_into(kind, &preds, y, &mut r);
        let current = dot(&preds, &r);
        let k = table.argmax(&r);
        gap = c * table.inner(k, &r) - current;
        if gap <= gap_tol {
            break;
        }
        let away = (0..table.len())
            .filter(|&j| weights[j] > 0.0 && weights[j] < c)
            .map(|j| (j, table.inner(j, &r)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        iterations += 1;
        match away {
            Some((j, v)) if current - c * v > gap => {
                let cap = weights[j] / (c - weights[j]);
                let hv = table.values(j);
                d.iter_mut()
                    .zip(&preds)
                    .zip(hv)
                    .for_each(|((d, f), h)| *d = f - c * h);
                let gamma = line_search_bounded(loss, &preds, &d, y, cap, tol)?;
                weights.iter_mut().for_each(|w| *w *= 1.0 + gamma);
                weights[j] = if gamma == cap {
                    0.0
                } else {
                    (weights[j] - gamma * c).max(0.0)
                };
                preds
                    .iter_mut()
                    .zip(hv)
                    .for_each(|(f, h)| *f = (1.0 + gamma) * *f - gamma * c * h);
            }
            _ => {
                let hv = table.values(k);
                d.iter_mut()
                    .zip(&preds)
                    .zip(hv)
                    .for_each(|((d, f), h)| *d = c * h - f);
                let gamma = line_search(loss, &preds, &d, y, tol)?;
                weights.iter_mut().for_each(|w| *w *= 1.0 - gamma);
                weights[k] += gamma * c;
                preds
                    .iter_mut()
                    .zip(hv)
                    .for_each(|(f, h)| *f = (1.0 - gamma) * *f + gamma * c * h);
            }
        }
    }
    Ok(ReferenceSolution {
        risk: risk_unchecked(kind, &preds, y),
        gap,
        iterations,
        weights,
        preds,
    })
}

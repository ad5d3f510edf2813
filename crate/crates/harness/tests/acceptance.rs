//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release -p fwboost-harness --test acceptance`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fwboost_core::adaboost_fw::AdaBoostFw;
use fwboost_core::analysis::{
    check_combined_class_bound, convergence_bound_curve, estimate_rademacher, SigmaMode,
};
use fwboost_core::fwboost::{
    reduce_to_classification, reference_optimum, run_awaystep, run_fwboost, run_fwboost_c,
    run_fwboost_r, ClassifierOracle, FiniteAtomOracle, FrankWolfe, FwConfig, StepOutcome,
    ToleranceOracle,
};
use fwboost_core::learners::{best_inner_product_oracle, train_stump_classifier, StumpSearchSpace};
use fwboost_core::{
    run_adaboost_fw, Dataset, FitReport, Hypothesis, LossKind, LossModel, Polarity, StepKind,
    StepPolicy, Task, TerminationReason,
};
use fwboost_harness::data::SyntheticSpec;
use fwboost_harness::experiment::{
    execute_experiment, run_experiment, DataSource, ExperimentConfig,
};
use fwboost_harness::protocol::Algorithm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn random_rows(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn random_signs(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

fn random_stump(rng: &mut ChaCha8Rng, d: usize) -> Hypothesis {
    let polarity = if rng.random::<bool>() {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    Hypothesis::classifier(rng.random_range(0..d), rng.random_range(0.1..0.9), polarity)
}

fn with_negations(atoms: Vec<Hypothesis>) -> Vec<Hypothesis> {
    let neg: Vec<Hypothesis> = atoms.iter().map(Hypothesis::negated).collect();
    atoms.into_iter().chain(neg).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// A small finite-atom problem: 1-D inputs, three random stumps and their
/// negations.
struct Instance {
    name: String,
    data: Dataset,
    atoms: Vec<Hypothesis>,
    loss: LossModel,
}

fn finite_instance(seed: u64, kind: LossKind, capacity: f64) -> Instance {
    let mut rng = rng(seed);
    let m = rng.random_range(6..=10);
    let rows = random_rows(&mut rng, m, 1);
    let atoms = with_negations((0..3).map(|_| random_stump(&mut rng, 1)).collect());
    let (data, loss) = match kind {
        LossKind::Logistic => (
            Dataset::from_rows(&rows, random_signs(&mut rng, m), Task::BinaryClassification)
                .unwrap(),
            LossModel::logistic(capacity).unwrap(),
        ),
        _ => {
            let y = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
            (
                Dataset::from_rows(&rows, y, Task::Regression).unwrap(),
                LossModel::squared(capacity).unwrap().with_target_bound(1.0),
            )
        }
    };
    Instance {
        name: format!("{kind}/C={capacity}/seed={seed}"),
        data,
        atoms,
        loss,
    }
}

fn rate_instances() -> Vec<Instance> {
    vec![
        finite_instance(0, LossKind::Squared, 1.0),
        finite_instance(6, LossKind::Squared, 1.0),
        finite_instance(1, LossKind::Squared, 4.0),
        finite_instance(24, LossKind::Logistic, 1.0),
        finite_instance(11, LossKind::Logistic, 2.0),
    ]
}

/// Certified optimum value: returns a lower bound `risk − gap` on `L*`.
fn optimum(inst: &Instance) -> Result<f64, String> {
    let sol = reference_optimum(&inst.data, &inst.loss, &inst.atoms, 1_000_000, 1e-13, 1e-14)
        .map_err(e)?;
    ensure(sol.gap <= 1e-12, || {
        format!("{}: reference gap {:.2e} not certified", inst.name, sol.gap)
    })?;
    Ok(sol.risk - sol.gap)
}

fn initial_risk(inst: &Instance) -> f64 {
    inst.loss
        .empirical_risk(&vec![0.0; inst.data.len()], inst.data.targets())
        .unwrap()
}

fn feasible(report: &FitReport, capacity: f64) -> Result<(), String> {
    for r in &report.records {
        ensure(r.l1_norm <= capacity + 1e-9, || {
            format!("t={} has ||a||_1 = {} > C = {capacity}", r.t, r.l1_norm)
        })?;
    }
    ensure(report.ensemble.l1_norm() <= capacity + 1e-9, || {
        "final ensemble infeasible".into()
    })
}

fn criterion_1() -> Check {
    let mut runs = 0;
    for seed in 0..200u64 {
        let mut rng = rng(1000 + seed);
        let capacity = [0.5, 1.0, 4.0][(seed % 3) as usize];
        let policy = if seed % 2 == 0 {
            StepPolicy::Schedule
        } else {
            StepPolicy::line_search()
        };
        let config = FwConfig::new(capacity, 300).policy(policy);
        let m = rng.random_range(10..=40);
        let d = rng.random_range(1..=3);
        let rows = random_rows(&mut rng, m, d);
        let y_reg: Vec<f64> = (0..m).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y_cls = random_signs(&mut rng, m);
        let reg = Dataset::from_rows(&rows, y_reg, Task::Regression).unwrap();
        let cls = Dataset::from_rows(&rows, y_cls, Task::BinaryClassification).unwrap();
        let atoms = with_negations((0..3).map(|_| random_stump(&mut rng, d)).collect());
        let sq = LossModel::squared(capacity).unwrap();
        let classification_loss = if seed % 4 < 2 {
            LossModel::exponential(capacity).unwrap()
        } else {
            LossModel::logistic(capacity).unwrap()
        };

        let reports = [
            (
                "fwboost",
                run_fwboost(
                    &reg,
                    &sq,
                    FiniteAtomOracle::new(atoms.clone(), &reg).unwrap(),
                    config,
                    None,
                ),
            ),
            ("fwboost-r", run_fwboost_r(&reg, &sq, config, None)),
            (
                "fwboost-c",
                run_fwboost_c(&cls, &classification_loss, config, None),
            ),
            (
                "awaystep",
                run_awaystep(&reg, &sq, atoms.clone(), config, None),
            ),
            (
                "adaboost-fw",
                run_adaboost_fw(&cls, policy, capacity, 300, None),
            ),
            (
                "tolerance",
                run_fwboost(
                    &reg,
                    &sq,
                    ToleranceOracle::new(atoms.clone(), &reg, &sq, 0.5).unwrap(),
                    config,
                    None,
                ),
            ),
        ];
        for (name, report) in reports {
            let report = report.map_err(|err| format!("{name} seed {seed}: {err}"))?;
            ensure(report.records.len() <= 300, || {
                format!("{name}: too many records")
            })?;
            feasible(&report, capacity).map_err(|msg| format!("{name} seed {seed}: {msg}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} runs"))
}

fn criterion_2() -> Check {
    let kinds = [
        LossKind::Squared,
        LossKind::Lp { p: 3.0 },
        LossKind::Exponential,
        LossKind::Logistic,
    ];
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for kind in kinds {
        for seed in 0..100u64 {
            let mut rng = rng(2000 + seed);
            let capacity = rng.random_range(0.5..3.0);
            let loss = LossModel::new(kind, capacity).map_err(e)?;
            let m = rng.random_range(2..=10);
            let f: Vec<f64> = (0..m)
                .map(|_| rng.random_range(-capacity..capacity))
                .collect();
            let y: Vec<f64> = if kind.needs_binary_targets() {
                random_signs(&mut rng, m)
            } else {
                (0..m)
                    .map(|_| rng.random_range(-capacity..capacity))
                    .collect()
            };
            let r = loss.negative_gradient(&f, &y).map_err(e)?;
            for i in 0..m {
                let mut plus = f.clone();
                let mut minus = f.clone();
                plus[i] += eps;
                minus[i] -= eps;
                let fd = -(loss.empirical_risk(&plus, &y).map_err(e)?
                    - loss.empirical_risk(&minus, &y).map_err(e)?)
                    / (2.0 * eps);
                let rel = (fd - r[i]).abs() / fd.abs().max(r[i].abs()).max(1e-6);
                worst = worst.max(rel);
                ensure(rel <= 1e-5, || {
                    format!("{kind} seed {seed} coordinate {i}: relative error {rel:.2e}")
                })?;
            }
        }
    }
    Ok(format!("400 instances, worst relative error {worst:.1e}"))
}

fn inner(h: &Hypothesis, data: &Dataset, r: &[f64]) -> f64 {
    h.evaluate(data)
        .unwrap()
        .iter()
        .zip(r)
        .map(|(a, b)| a * b)
        .sum()
}

fn criterion_3() -> Check {
    for seed in 0..100u64 {
        let mut rng = rng(3000 + seed);
        let m = rng.random_range(2..=12);
        let d = rng.random_range(1..=3);
        // Coarse grids produce tied feature values and tied inner products.
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                (0..d)
                    .map(|_| f64::from(rng.random_range(0..5u8)) / 4.0)
                    .collect()
            })
            .collect();
        let data = Dataset::from_rows(&rows, vec![0.0; m], Task::Regression).map_err(e)?;
        let r: Vec<f64> = if seed % 2 == 0 {
            (0..m)
                .map(|_| f64::from(rng.random_range(-4..=4i8)) / 8.0)
                .collect()
        } else {
            (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        if r.iter().all(|&v| v == 0.0) {
            continue;
        }
        let (labels, weights) = reduce_to_classification(&r).map_err(e)?;
        let via_reduction = train_stump_classifier(&data, &weights, &labels).map_err(e)?;
        let atoms = StumpSearchSpace::new(&data).classifiers();
        let via_oracle = best_inner_product_oracle(&atoms, &data, &r).map_err(e)?;
        let (a, b) = (
            inner(&via_reduction, &data, &r),
            inner(&via_oracle, &data, &r),
        );
        ensure(a == b, || {
            format!("seed {seed}: reduction attains {a}, oracle {b}")
        })?;
    }
    Ok("100 instances, exact agreement".into())
}

/// Schedule-policy FW over the instance's atoms, optionally through the
/// tolerance oracle. The gap of an inexact vertex is no certificate, so those
/// runs never stop on it.
fn schedule_run(
    inst: &Instance,
    iterations: usize,
    delta: Option<f64>,
) -> Result<FitReport, String> {
    let gap_tol = if delta.is_some() {
        f64::NEG_INFINITY
    } else {
        0.0
    };
    let config = FwConfig::new(inst.loss.capacity, iterations).gap_tol(gap_tol);
    match delta {
        None => run_fwboost(
            &inst.data,
            &inst.loss,
            FiniteAtomOracle::new(inst.atoms.clone(), &inst.data).map_err(e)?,
            config,
            None,
        ),
        Some(delta) => run_fwboost(
            &inst.data,
            &inst.loss,
            ToleranceOracle::new(inst.atoms.clone(), &inst.data, &inst.loss, delta).map_err(e)?,
            config,
            None,
        ),
    }
    .map_err(e)
}

fn rate_check(delta: Option<f64>) -> Check {
    let mut worst: f64 = 0.0;
    for inst in rate_instances() {
        let l_star = optimum(&inst)?;
        let bound =
            convergence_bound_curve(&inst.loss, initial_risk(&inst), 500, delta.unwrap_or(0.0))
                .map_err(e)?;
        let report = schedule_run(&inst, 500, delta)?;
        ensure(report.records.len() == 500, || {
            format!(
                "{}: stopped after {} steps",
                inst.name,
                report.records.len()
            )
        })?;
        for rec in &report.records {
            let sub = rec.train_risk - l_star;
            let b = bound[rec.t - 1];
            worst = worst.max(sub / b);
            ensure(sub <= b, || {
                format!(
                    "{} t={}: suboptimality {sub:.3e} > bound {b:.3e}",
                    inst.name, rec.t
                )
            })?;
        }
    }
    Ok(format!(
        "5 instances x 500 steps, worst ratio to bound {worst:.3}"
    ))
}

fn criterion_4() -> Check {
    rate_check(None)
}

fn criterion_5() -> Check {
    let a = rate_check(Some(0.1))?;
    let b = rate_check(Some(0.5))?;
    Ok(format!("delta 0.1: {a}; delta 0.5: {b}"))
}

fn criterion_6() -> Check {
    let tol = 1e-9;
    for seed in 0..10u64 {
        let mut rng = rng(6000 + seed);
        let m = 40;
        let mut rows = Vec::with_capacity(m);
        let mut y = Vec::with_capacity(m);
        for _ in 0..m {
            let c: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
            rows.push(vec![
                c + rng.random_range(-1.5..1.5),
                c + rng.random_range(-1.5..1.5),
            ]);
            y.push(if rng.random::<f64>() < 0.15 { -c } else { c });
        }
        let data = Dataset::from_rows(&rows, y, Task::BinaryClassification).map_err(e)?;
        let capacity = [1.0, 2.0, 4.0, 8.0, 16.0][(seed % 5) as usize];
        let config = FwConfig::new(capacity, 50)
            .policy(StepPolicy::LineSearch { tol: 1e-14 })
            .gap_tol(0.0);
        let loss = LossModel::exponential(capacity).map_err(e)?;
        let mut fw =
            FrankWolfe::new(&data, &loss, ClassifierOracle::new(&data), config).map_err(e)?;
        let mut ada = AdaBoostFw::new(&data, config).map_err(e)?;
        for t in 1..=50 {
            let r = loss
                .negative_gradient(fw.preds(), data.targets())
                .map_err(e)?;
            let (_, d_fw) = reduce_to_classification(&r).map_err(e)?;
            let d_ada = ada.distribution().weights();
            for (i, (a, b)) in d_fw.iter().zip(&d_ada).enumerate() {
                ensure(close(*a, *b, tol), || {
                    format!("seed {seed} t={t}: D({i}) {a} vs {b}")
                })?;
            }
            let (StepOutcome::Stepped(rf), StepOutcome::Stepped(ra)) =
                (fw.step().map_err(e)?, ada.step().map_err(e)?)
            else {
                return Err(format!(
                    "seed {seed} t={t}: a run stopped early (fw gap {:?})",
                    fw.last_gap()
                ));
            };
            ensure(close(rf.gamma, ra.gamma, tol), || {
                format!("seed {seed} t={t}: gamma {} vs {}", rf.gamma, ra.gamma)
            })?;
            let (af, aa) = (fw.ensemble().atoms(), ada.ensemble().atoms());
            ensure(af.len() == aa.len(), || {
                format!("seed {seed} t={t}: ensemble sizes differ")
            })?;
            for (k, (a, b)) in af.iter().zip(aa).enumerate() {
                ensure(a.hypothesis == b.hypothesis, || {
                    format!("seed {seed} t={t}: atom {k} differs")
                })?;
                ensure(close(a.coef, b.coef, tol), || {
                    format!("seed {seed} t={t}: alpha {k} {} vs {}", a.coef, b.coef)
                })?;
            }
        }
    }
    Ok("10 datasets x 50 iterations".into())
}

fn criterion_7() -> Check {
    let mut max_iters = 0;
    for inst in rate_instances() {
        let l_star = optimum(&inst)?;
        let report = schedule_run(&inst, 500, None)?;
        let mut prev = initial_risk(&inst);
        for rec in &report.records {
            let gap = rec
                .fw_gap
                .ok_or_else(|| format!("{}: missing gap", inst.name))?;
            ensure(gap >= prev - l_star, || {
                format!(
                    "{} t={}: gap {gap:.3e} < suboptimality {:.3e}",
                    inst.name,
                    rec.t,
                    prev - l_star
                )
            })?;
            prev = rec.train_risk;
        }
        let config = FwConfig::new(inst.loss.capacity, 100_000)
            .policy(StepPolicy::line_search())
            .gap_tol(1e-6);
        let oracle = FiniteAtomOracle::new(inst.atoms.clone(), &inst.data).map_err(e)?;
        let ls = run_fwboost(&inst.data, &inst.loss, oracle, config, None).map_err(e)?;
        ensure(ls.termination == TerminationReason::GapBelowTol, || {
            format!(
                "{}: line search ended with {:?} after {} steps",
                inst.name,
                ls.termination,
                ls.records.len()
            )
        })?;
        let gap = ls.final_gap.unwrap_or(f64::INFINITY);
        ensure(gap <= 1e-6, || {
            format!("{}: final gap {gap:.3e}", inst.name)
        })?;
        max_iters = max_iters.max(ls.records.len());
    }
    Ok(format!(
        "gap bounds suboptimality; line search reaches gap <= 1e-6 within {max_iters} steps"
    ))
}

fn criterion_8() -> Check {
    let mut worst: f64 = f64::NEG_INFINITY;
    for seed in 0..10u64 {
        let mut rng = rng(8000 + seed);
        let m = rng.random_range(4..=10);
        let rows = random_rows(&mut rng, m, 2);
        let data = Dataset::from_rows(&rows, vec![0.0; m], Task::Regression).map_err(e)?;
        let base = with_negations((0..2).map(|_| random_stump(&mut rng, 2)).collect());
        let capacity = if seed % 2 == 0 { 1.0 } else { 2.0 };
        let terms = 1 + (seed as usize / 2) % 2;
        let check = check_combined_class_bound(&base, capacity, terms, &data, SigmaMode::Exact, 4)
            .map_err(e)?;
        worst = worst.max(check.lhs.estimate - check.rhs.estimate);
        ensure(check.holds(1e-12), || {
            format!(
                "seed {seed}: grid complexity {} > C x base {}",
                check.lhs.estimate, check.rhs.estimate
            )
        })?;
        let unit = estimate_rademacher(&base, &data, SigmaMode::Exact)
            .map_err(e)?
            .estimate;
        let scaled_class: Vec<Hypothesis> = base.iter().map(|h| h.scaled(capacity)).collect();
        let scaled = estimate_rademacher(&scaled_class, &data, SigmaMode::Exact)
            .map_err(e)?
            .estimate;
        ensure(scaled == capacity * unit, || {
            format!(
                "seed {seed}: R(C G) = {scaled} but C R(G) = {}",
                capacity * unit
            )
        })?;
    }
    Ok(format!("10 configurations, max lhs - rhs {worst:.2e}"))
}

fn experiment_config(generator: &str, algorithms: &[Algorithm]) -> ExperimentConfig {
    let spec = SyntheticSpec {
        name: generator.into(),
        params: BTreeMap::new(),
    };
    let mut config = ExperimentConfig::new(DataSource::Synthetic(spec), algorithms, 1000);
    config.seed = 1;
    config
}

fn overfit_ratio(curve: &[f64]) -> f64 {
    let min = curve.iter().copied().fold(f64::INFINITY, f64::min);
    curve[curve.len() - 1] / min
}

fn criterion_9() -> Check {
    let reg = execute_experiment(&experiment_config(
        "step-regression",
        &[Algorithm::Gb, Algorithm::FwboostR],
    ))
    .map_err(e)?;
    let cls = execute_experiment(&experiment_config(
        "two-gaussian",
        &[Algorithm::Gb, Algorithm::AdaboostFw],
    ))
    .map_err(e)?;
    for result in [&reg, &cls] {
        for s in &result.summary.algorithms {
            ensure(s.runs == 20 && s.failed_runs == 0, || {
                format!("{}: {} runs completed", s.algorithm, s.runs)
            })?;
        }
    }
    let gb_r = overfit_ratio(&reg.test_curve(Algorithm::Gb));
    let fw_r = overfit_ratio(&reg.test_curve(Algorithm::FwboostR));
    let gb_c = overfit_ratio(&cls.test_curve(Algorithm::Gb));
    let fw_c = overfit_ratio(&cls.test_curve(Algorithm::AdaboostFw));
    let detail = format!(
        "final/min test error: regression gb {gb_r:.3}, fwboost-r {fw_r:.3}; classification gb {gb_c:.3}, adaboost-fw {fw_c:.3}"
    );
    ensure(
        gb_r >= 1.10 && fw_r <= 1.05 && gb_c >= 1.10 && fw_c <= 1.05,
        || detail.clone(),
    )?;
    Ok(detail)
}

fn criterion_10() -> Check {
    let mut drops = 0;
    let mut instances = rate_instances();
    for seed in 0..20u64 {
        let kind = if seed % 2 == 0 {
            LossKind::Squared
        } else {
            LossKind::Logistic
        };
        instances.push(finite_instance(
            10_000 + seed,
            kind,
            [0.5, 1.0, 4.0][(seed % 3) as usize],
        ));
    }
    for inst in &instances {
        let capacity = inst.loss.capacity;
        let config = FwConfig::new(capacity, 500)
            .policy(StepPolicy::line_search())
            .gap_tol(0.0);
        let away =
            run_awaystep(&inst.data, &inst.loss, inst.atoms.clone(), config, None).map_err(e)?;
        feasible(&away, capacity).map_err(|msg| format!("{}: {msg}", inst.name))?;
        let mut active = 0;
        for rec in &away.records {
            if rec.step_kind == StepKind::Drop {
                drops += 1;
                ensure(rec.active_set_size + 1 == active, || {
                    format!(
                        "{} t={}: drop took active set {active} -> {}",
                        inst.name, rec.t, rec.active_set_size
                    )
                })?;
            }
            if rec.step_kind == StepKind::Away {
                ensure(rec.active_set_size == active, || {
                    format!("{} t={}: away step changed active set", inst.name, rec.t)
                })?;
            }
            active = rec.active_set_size;
        }
        let plain = schedule_run(inst, 500, None)?;
        let (a, p) = (
            away.final_train_risk().unwrap_or(f64::NAN),
            plain.final_train_risk().unwrap_or(f64::NAN),
        );
        ensure(a <= p, || {
            format!("{}: away-step risk {a} > schedule risk {p}", inst.name)
        })?;
    }
    ensure(drops > 0, || "no drop step occurred".into())?;
    Ok(format!("{} instances, {drops} drop steps", instances.len()))
}

fn criterion_11() -> Check {
    let dir = tempfile::tempdir().map_err(e)?;
    let config = experiment_config("step-regression", &[Algorithm::Gb, Algorithm::FwboostR]);
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        run_experiment(&config, &out).map_err(e)?;
        outputs.push(std::fs::read(out.join("curves.csv")).map_err(e)?);
    }
    ensure(outputs[0] == outputs[1], || {
        "curves.csv differs between runs".into()
    })?;
    Ok(format!("curves.csv identical ({} bytes)", outputs[0].len()))
}

type Criterion = (&'static str, fn() -> Check, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("feasibility", criterion_1, Duration::from_secs(120)),
        ("gradient correctness", criterion_2, Duration::from_secs(10)),
        ("subproblem reduction", criterion_3, Duration::from_secs(10)),
        ("convergence rate", criterion_4, Duration::from_secs(120)),
        ("inexact subproblems", criterion_5, Duration::from_secs(120)),
        (
            "adaboost.fw equivalence",
            criterion_6,
            Duration::from_secs(30),
        ),
        ("gap certificate", criterion_7, Duration::from_secs(120)),
        (
            "combined-class complexity",
            criterion_8,
            Duration::from_secs(60),
        ),
        (
            "overfitting resistance",
            criterion_9,
            Duration::from_secs(600),
        ),
        ("away-step mechanics", criterion_10, Duration::from_secs(60)),
        ("determinism", criterion_11, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let timing = format!("{:.1}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
        match outcome {
            Ok(detail) if elapsed <= budget => {
                println!("PASS {:>2} {name}: {detail} [{timing}]", i + 1)
            }
            Ok(detail) => {
                failed += 1;
                println!(
                    "FAIL {:>2} {name}: over time budget; {detail} [{timing}]",
                    i + 1
                );
            }
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{timing}]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

mod common;

use common::{classification, regression};
use fwboost_core::ensemble::{ensemble_away_update, ensemble_fw_update, predict_ensemble};
use fwboost_core::{AwayOutcome, Dataset, Ensemble, Error, Hypothesis, Polarity, Task};
use proptest::prelude::*;

fn stump(t: f64) -> Hypothesis {
    Hypothesis::classifier(0, t, Polarity::Positive)
}

#[test]
fn empty_ensemble_predicts_zero() {
    let data = regression(&[0.1, 0.5, 0.9], &[1.0, 2.0, 3.0]);
    let e = Ensemble::new(1.0).unwrap();
    assert_eq!(predict_ensemble(&e, &data).unwrap().0, vec![0.0; 3]);
}

#[test]
fn constant_atom_prediction() {
    let data = regression(&[0.1, 0.5, 0.9], &[0.0; 3]);
    let mut e = Ensemble::new(1.0).unwrap();
    e.fw_update(Hypothesis::constant(1.0), 0.5).unwrap();
    assert_eq!(e.predict(&data).unwrap().0, vec![0.5; 3]);
}

#[test]
fn two_atoms_match_naive_double_loop() {
    let rows = vec![
        vec![0.1, 0.7],
        vec![0.3, 0.2],
        vec![0.5, 0.9],
        vec![0.8, 0.4],
        vec![0.95, 0.05],
    ];
    let data = Dataset::from_rows(&rows, vec![0.0; 5], Task::Regression).unwrap();
    let atoms = [
        (0.3, Hypothesis::classifier(0, 0.4, Polarity::Negative)),
        (0.45, Hypothesis::regression(1, 0.5, -0.25, 0.75)),
    ];
    let mut e = Ensemble::unconstrained();
    for (c, h) in &atoms {
        e.push(*c, h.clone());
    }
    let got = e.predict(&data).unwrap().0;
    for (i, row) in rows.iter().enumerate() {
        let mut want = 0.0;
        for (c, h) in &atoms {
            let value = match *h {
                Hypothesis::ClassificationStump {
                    feature,
                    threshold,
                    polarity,
                } => {
                    if row[feature] <= threshold {
                        polarity.sign()
                    } else {
                        -polarity.sign()
                    }
                }
                Hypothesis::RegressionStump {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if row[feature] <= threshold {
                        left
                    } else {
                        right
                    }
                }
                Hypothesis::Constant { value } => value,
            };
            want += c * value;
        }
        assert!(
            (got[i] - want).abs() < 1e-15,
            "row {i}: {} vs {want}",
            got[i]
        );
    }
}

#[test]
fn predict_rejects_out_of_range_feature() {
    let data = regression(&[0.1, 0.2], &[0.0, 0.0]);
    let mut e = Ensemble::new(1.0).unwrap();
    e.fw_update(Hypothesis::classifier(3, 0.5, Polarity::Positive), 0.5)
        .unwrap();
    assert!(e.predict(&data).is_err());
}

#[test]
fn first_fw_update_has_two_thirds() {
    let e = ensemble_fw_update(&Ensemble::new(1.0).unwrap(), stump(0.5), 2.0 / 3.0).unwrap();
    assert_eq!(e.coefficients(), vec![2.0 / 3.0]);
}

#[test]
fn zero_fw_step_appends_zero_atom() {
    let e = ensemble_fw_update(&Ensemble::new(1.0).unwrap(), stump(0.5), 0.5).unwrap();
    let e2 = ensemble_fw_update(&e, stump(0.2), 0.0).unwrap();
    assert_eq!(e2.coefficients(), vec![0.5, 0.0]);
    assert_eq!(e2.active_len(), 1);
}

#[test]
fn full_fw_step_keeps_only_new_atom() {
    let e = ensemble_fw_update(&Ensemble::new(2.0).unwrap(), stump(0.5), 0.5).unwrap();
    let e2 = ensemble_fw_update(&e, stump(0.2), 1.0).unwrap();
    assert_eq!(e2.coefficients(), vec![0.0, 2.0]);
}

#[test]
fn fw_step_outside_unit_interval_fails() {
    let e = Ensemble::new(1.0).unwrap();
    assert!(matches!(
        ensemble_fw_update(&e, stump(0.5), 1.5),
        Err(Error::InvalidStep(_))
    ));
    assert!(matches!(
        ensemble_fw_update(&e, stump(0.5), -0.1),
        Err(Error::InvalidStep(_))
    ));
}

#[test]
fn away_step_at_cap_empties_single_atom() {
    let mut e = Ensemble::new(1.0).unwrap();
    e.fw_update(stump(0.5), 0.25).unwrap();
    let cap = e.away_cap(0).unwrap();
    assert!((cap - 1.0 / 3.0).abs() < 1e-15);
    let mut dropped = e.clone();
    assert_eq!(dropped.away_update(0, cap).unwrap(), AwayOutcome::Dropped);
    assert!(dropped.is_empty());
}

#[test]
fn zero_away_step_is_identity() {
    let mut e = Ensemble::new(1.0).unwrap();
    e.fw_update(stump(0.5), 0.25).unwrap();
    assert_eq!(ensemble_away_update(&e, 0, 0.0).unwrap(), e);
}

#[test]
fn away_step_rescales_others() {
    let mut e = Ensemble::new(1.0).unwrap();
    e.push(0.5, stump(0.3));
    e.push(0.25, stump(0.6));
    let e2 = ensemble_away_update(&e, 1, 0.2).unwrap();
    let c = e2.coefficients();
    assert!(
        (c[0] - 0.6).abs() < 1e-15 && (c[1] - 0.1).abs() < 1e-15,
        "{c:?}"
    );
    let norm: f64 = c.iter().map(|a| a.abs()).sum();
    assert!((norm - 0.7).abs() < 1e-15 && norm <= 1.0);
}

#[test]
fn away_step_errors() {
    let mut e = Ensemble::new(1.0).unwrap();
    e.push(0.25, stump(0.3));
    e.push(0.0, stump(0.6));
    assert!(matches!(
        e.away_update(0, 0.5),
        Err(Error::AwayStepTooLarge { .. })
    ));
    assert!(matches!(e.away_update(1, 0.1), Err(Error::NotActive(1))));
    let mut full = Ensemble::new(1.0).unwrap();
    full.fw_update(stump(0.3), 1.0).unwrap();
    assert!(matches!(full.away_cap(0), Err(Error::SaturatedAwayAtom)));
}

#[test]
fn serde_round_trip_keeps_capacity() {
    let mut bounded = Ensemble::new(2.0).unwrap();
    bounded.fw_update(stump(0.4), 0.5).unwrap();
    let mut free = Ensemble::unconstrained();
    free.push(-1.5, stump(0.4));
    for e in [bounded, free] {
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<Ensemble>(&text).unwrap(), e);
    }
}

#[derive(Debug, Clone)]
enum Op {
    Fw(f64, f64),
    Away(usize, f64),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0.0..=1.0f64, 0.05..0.95f64).prop_map(|(g, t)| Op::Fw(g, t)),
        (0usize..16, 0.0..=1.0f64).prop_map(|(i, f)| Op::Away(i, f)),
    ]
}

proptest! {
    #[test]
    fn updates_stay_feasible(capacity in common::capacity(), ops in prop::collection::vec(op(), 1..40)) {
        let data = classification(&[0.1, 0.3, 0.5, 0.7, 0.9], &[1.0, -1.0, 1.0, -1.0, 1.0]);
        let mut e = Ensemble::new(capacity).unwrap();
        for op in ops {
            let before = e.predict(&data).unwrap().0;
            match op {
                Op::Fw(gamma, t) => {
                    let h = stump(t);
                    let hv = h.evaluate(&data).unwrap();
                    e.fw_update(h, gamma).unwrap();
                    let after = e.predict(&data).unwrap().0;
                    for i in 0..after.len() {
                        let want = (1.0 - gamma) * before[i] + gamma * capacity * hv[i];
                        prop_assert!((after[i] - want).abs() <= 1e-12 * want.abs().max(1.0));
                    }
                }
                Op::Away(i, frac) => {
                    let active = e.active_set();
                    if active.is_empty() {
                        continue;
                    }
                    let index = active[i % active.len()];
                    let Ok(cap) = e.away_cap(index) else { continue };
                    let slots = e.active_len();
                    let gamma = if frac > 0.8 { cap } else { cap * frac };
                    let outcome = e.away_update(index, gamma).unwrap();
                    if gamma == cap && gamma > 0.0 {
                        prop_assert_eq!(outcome, AwayOutcome::Dropped);
                        prop_assert_eq!(e.active_len(), slots - 1);
                    }
                }
            }
            prop_assert!(e.l1_norm() <= capacity + 1e-9);
            prop_assert!(e.coefficients().iter().all(|&a| a >= -1e-12));
            let active = e.active_set();
            prop_assert!(active.iter().all(|&k| e.coefficients()[k] != 0.0));
            prop_assert_eq!(active.len(), e.coefficients().iter().filter(|&&a| a != 0.0).count());
        }
    }
}

#![allow(dead_code)]

use fwboost_core::{Dataset, Hypothesis, Polarity, Task};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rows_1d(xs: &[f64]) -> Vec<Vec<f64>> {
    xs.iter().map(|&x| vec![x]).collect()
}

pub fn regression(xs: &[f64], y: &[f64]) -> Dataset {
    Dataset::from_rows(&rows_1d(xs), y.to_vec(), Task::Regression).unwrap()
}

pub fn classification(xs: &[f64], y: &[f64]) -> Dataset {
    Dataset::from_rows(&rows_1d(xs), y.to_vec(), Task::BinaryClassification).unwrap()
}

pub fn random_rows(rng: &mut ChaCha8Rng, m: usize, d: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect()
}

pub fn random_signs(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

pub fn random_stump(rng: &mut ChaCha8Rng, d: usize) -> Hypothesis {
    let polarity = if rng.random::<bool>() {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    Hypothesis::classifier(rng.random_range(0..d), rng.random_range(0.1..0.9), polarity)
}

/// `atoms` followed by their negations.
pub fn symmetric(atoms: Vec<Hypothesis>) -> Vec<Hypothesis> {
    let neg: Vec<Hypothesis> = atoms.iter().map(Hypothesis::negated).collect();
    atoms.into_iter().chain(neg).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A random regression dataset and a sign-symmetric list of stumps on it.
pub fn atom_problem(seed: u64) -> (Dataset, Vec<Hypothesis>) {
    let mut rng = rng(seed);
    let m = rng.random_range(6..=12);
    let d = rng.random_range(1..=2);
    let rows = random_rows(&mut rng, m, d);
    let atoms = symmetric((0..3).map(|_| random_stump(&mut rng, d)).collect());
    let y = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    (
        Dataset::from_rows(&rows, y, Task::Regression).unwrap(),
        atoms,
    )
}

/// Same inputs as [`atom_problem`] with random ±1 labels.
pub fn atom_problem_binary(seed: u64) -> (Dataset, Vec<Hypothesis>) {
    let (data, atoms) = atom_problem(seed);
    let mut rng = rng(seed ^ 0x5eed);
    let rows: Vec<Vec<f64>> = data.rows().map(<[f64]>::to_vec).collect();
    let y = random_signs(&mut rng, data.len());
    (
        Dataset::from_rows(&rows, y, Task::BinaryClassification).unwrap(),
        atoms,
    )
}

pub fn capacity() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(4.0)]
}

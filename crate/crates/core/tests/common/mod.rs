#![allow(dead_code)]

pub mod oracles;

use hemascreen_core::dataset::{select_cohort, FeatureVector, Label};
use hemascreen_core::{BloodCountRecord, Cohort, Location, Matrix, FEATURE_COUNT};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Approximately standard normal draw (sum of twelve uniforms).
pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    (0..12).map(|_| rng.gen::<f64>()).sum::<f64>() - 6.0
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| normal(rng)).collect()).unwrap()
}

/// Records whose feature 0 (and 5) shift with the label.
pub fn synthetic_records(n_pos: usize, n_neg: usize, location: Location, seed: u64) -> Vec<BloodCountRecord> {
    let mut r = rng(seed);
    (0..n_pos + n_neg)
        .map(|i| {
            let positive = i < n_pos;
            let mut v = [0.0; FEATURE_COUNT];
            for x in v.iter_mut() {
                *x = normal(&mut r);
            }
            let shift = if positive { 1.2 } else { 0.0 };
            v[0] += shift;
            v[5] -= shift;
            BloodCountRecord {
                patient_id: format!("p{i:04}"),
                age_quantile: Some((i % 20) as i64),
                location,
                label: Label::from_bool(positive),
                features: FeatureVector(v),
                neutrophils: None,
                pathogen_panel: None,
            }
        })
        .collect()
}

pub fn synthetic_cohort(n_pos: usize, n_neg: usize, seed: u64) -> Cohort {
    select_cohort(&synthetic_records(n_pos, n_neg, Location::RegularWard, seed), &[Location::RegularWard]).unwrap()
}

//! Synthetic biased datasets for demos, tests and benchmarks.
//!
//! Two Gaussian class blobs in 2-D plus binary protected features whose
//! values receive very different positive rates. Favored-group positives
//! are concentrated near the class boundary, where pure covering balls come
//! out small and sparse, exactly the geometry undersampling targets.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, FeatureKind, Schema};

fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    // Box-Muller; one draw per call keeps the stream position predictable.
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    mean + sd * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn blob_row(rng: &mut ChaCha8Rng, label: u8, boundary: bool) -> (f64, f64) {
    let x = if boundary {
        normal(rng, 0.0, 0.35)
    } else if label == 1 {
        normal(rng, 1.0, 0.55)
    } else {
        normal(rng, -1.0, 0.55)
    };
    (x, normal(rng, 0.0, 0.8))
}

/// One protected feature `p`, alternating 50/50. Positive rates 0.6 for
/// p=0 and 0.2 for p=1 (label DI = 3); 70% of the favored group's positives
/// sit in a narrow strip on the class boundary, inside the negative blob's
/// right flank. Interleaved enemies keep the strip's covering balls small
/// and sparse, so percentile thresholds single them out.
pub fn biased_blobs(n: usize, seed: u64) -> Dataset {
    let schema = Schema {
        feature_names: vec!["p".into(), "x".into(), "y".into()],
        feature_kinds: vec![
            FeatureKind::Binary,
            FeatureKind::Numeric,
            FeatureKind::Numeric,
        ],
        protected_features: vec!["p".into()],
        class_name: "outcome".into(),
        positive_class_value: "1".into(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let p = (i % 2) as f64;
        let rate = if p == 0.0 { 0.6 } else { 0.2 };
        let label = u8::from(rng.random::<f64>() < rate);
        let boundary = label == 1 && p == 0.0 && rng.random::<f64>() < 0.7;
        let (x, y) = if boundary {
            (normal(&mut rng, -0.15, 0.18), normal(&mut rng, 0.0, 0.55))
        } else if label == 1 {
            (normal(&mut rng, 1.1, 0.45), normal(&mut rng, 0.0, 0.8))
        } else {
            (normal(&mut rng, -0.25, 0.6), normal(&mut rng, 0.0, 0.8))
        };
        rows.push(vec![p, x, y]);
        labels.push(label);
    }
    Dataset::new(schema, rows, labels).expect("generator emits a valid dataset")
}

/// Two protected features `p1`, `p2`, independent and balanced. Positive
/// rates favor value 0 on both, more strongly on `p1`; doubly-favored
/// positives cluster on the boundary.
pub fn biased_blobs_two_features(n: usize, seed: u64) -> Dataset {
    let schema = Schema {
        feature_names: vec!["p1".into(), "p2".into(), "x".into(), "y".into()],
        feature_kinds: vec![
            FeatureKind::Binary,
            FeatureKind::Binary,
            FeatureKind::Numeric,
            FeatureKind::Numeric,
        ],
        protected_features: vec!["p1".into(), "p2".into()],
        class_name: "outcome".into(),
        positive_class_value: "1".into(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let p1 = (i % 2) as f64;
        let p2 = ((i / 2) % 2) as f64;
        let rate = match (p1 == 0.0, p2 == 0.0) {
            (true, true) => 0.7,
            (true, false) => 0.5,
            (false, true) => 0.45,
            (false, false) => 0.15,
        };
        let label = u8::from(rng.random::<f64>() < rate);
        let boundary =
            label == 1 && p1 == 0.0 && p2 == 0.0 && rng.random::<f64>() < 0.6;
        let (x, y) = blob_row(&mut rng, label, boundary);
        rows.push(vec![p1, p2, x, y]);
        labels.push(label);
    }
    Dataset::new(schema, rows, labels).expect("generator emits a valid dataset")
}

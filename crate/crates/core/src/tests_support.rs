//! Seeded generators shared by unit tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform points in the unit cube.
pub(crate) fn random_dataset(seed: u64, n: usize, d: usize) -> Dataset {
    let mut r = rng(seed);
    let pts = (0..n * d).map(|_| r.gen::<f64>()).collect();
    Dataset::new(pts, n, d).unwrap()
}

/// A few Gaussian-ish blobs, so that greedy objectives have structure to find.
pub(crate) fn blobs(seed: u64, per_blob: usize, centres: &[[f64; 2]], spread: f64) -> Dataset {
    let mut r = rng(seed);
    let mut rows = Vec::new();
    for c in centres {
        for _ in 0..per_blob {
            // sum of uniforms: cheap bell shape
            let dx: f64 = (0..4).map(|_| r.gen::<f64>() - 0.5).sum();
            let dy: f64 = (0..4).map(|_| r.gen::<f64>() - 0.5).sum();
            rows.push([c[0] + spread * dx, c[1] + spread * dy]);
        }
    }
    Dataset::from_rows(&rows).unwrap()
}

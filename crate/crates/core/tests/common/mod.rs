#![allow(dead_code)]

use ans_core::{leray_project, Grid, SpectralField, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real field with independent uniform samples.
pub fn random_real(grid: &Grid, rng: &mut ChaCha8Rng) -> SpectralField {
    let samples: Vec<f64> = (0..grid.size()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SpectralField::forward_transform(&samples, *grid).unwrap()
}

pub fn random_vector(grid: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    let [a, b, c] = [0, 1, 2].map(|_| random_real(grid, rng));
    VectorField::new(a, b, c).unwrap()
}

/// Divergence-free, mean-free and supported in the two-thirds cube.
pub fn random_solenoidal(grid: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    let mut v = leray_project(&random_vector(grid, rng).dealias());
    for c in v.comps_mut() {
        c.set_coeff([0, 0, 0], Default::default());
    }
    v.claim_divergence_free(1e-12).unwrap()
}

pub fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_diff_vector(a: &VectorField, b: &VectorField) -> f64 {
    (0..3).map(|i| max_diff(a.comp(i), b.comp(i))).fold(0.0, f64::max)
}

pub fn max_coeff(a: &VectorField) -> f64 {
    a.max_abs_coeff()
}

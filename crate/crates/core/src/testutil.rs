//! Seeded random fixtures shared by the unit tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::{DataMatrix, ProjectionBasis};

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_data(d: usize, n: usize, seed: u64) -> DataMatrix {
    DataMatrix::new(random_matrix(d, n, seed)).unwrap()
}

/// QR of a Gaussian-ish matrix, truncated to k columns.
pub fn random_orthonormal(d: usize, k: usize, seed: u64) -> ProjectionBasis {
    let q = random_matrix(d, d, seed).qr().q();
    ProjectionBasis::new(q.columns(0, k).into_owned()).unwrap()
}

/// Largest principal angle between equal-dimension subspaces, computed
/// through the sine (the residual of projecting A onto span(B)), which
/// stays accurate for tiny angles where acos of a singular value loses
/// half the significant digits.
pub fn max_principal_angle(a: &ProjectionBasis, b: &ProjectionBasis) -> f64 {
    let residual = a.matrix() - b.matrix() * (b.matrix().transpose() * a.matrix());
    let sine = residual
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    sine.clamp(0.0, 1.0).asin()
}

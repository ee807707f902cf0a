//! Reference methods: classical PCA, the unit-weight ℓ2,p pairwise
//! solver, and the shared reconstruction-error metric.

use nalgebra::DVector;

use crate::error::{Result, SpcaError};
use crate::solver::{pca_basis, update_projection};
use crate::types::{DataMatrix, ProjectionBasis, SampleWeights};

/// Classical PCA model: basis plus the training mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub basis: ProjectionBasis,
    pub mean: DVector<f64>,
}

/// Classical PCA: top-k eigenvectors of the centered covariance,
/// eigenvalues descending.
pub fn fit_pca(x: &DataMatrix, k: usize) -> Result<PcaModel> {
    let (d, n) = x.dims();
    if k < 1 || k > d.min(n) {
        return Err(SpcaError::InvalidArgument(format!(
            "k must be in [1, min(d, n) = {}], got {k}",
            d.min(n)
        )));
    }
    let basis = pca_basis(x, k)?;
    let mean = x.matrix().column_mean();
    Ok(PcaModel { basis, mean })
}

/// The unit-weight specialization of the self-paced model: maximizes
/// Σ_ij ‖Uᵀ(x_i−x_j)‖₂^p with every sample weight pinned to 1.
pub fn fit_l2p_rpca(
    x: &DataMatrix,
    k: usize,
    p: f64,
    inner_tol: f64,
    inner_max: usize,
    eps_dist: f64,
) -> Result<ProjectionBasis> {
    let u0 = pca_basis(x, k)?;
    let w = SampleWeights::ones(x.nsamples());
    let (u, _) = update_projection(x, &w, p, &u0, inner_tol, inner_max, eps_dist)?;
    Ok(u)
}

/// Average reconstruction error (1/n)Σ_i ‖x_i − UUᵀx_i‖₂ over the test
/// columns. No mean subtraction: all methods are scored by the same
/// mean-free projector residual.
pub fn reconstruction_error(x_clean_test: &DataMatrix, u: &ProjectionBasis) -> Result<f64> {
    if x_clean_test.nfeatures() != u.nfeatures() {
        return Err(SpcaError::DimensionMismatch(format!(
            "test data has d={} but basis has d={}",
            x_clean_test.nfeatures(),
            u.nfeatures()
        )));
    }
    let m = x_clean_test.matrix();
    let projected = u.matrix() * (u.matrix().transpose() * m);
    let n = m.ncols();
    let mut total = 0.0;
    for i in 0..n {
        total += (m.column(i) - projected.column(i)).norm();
    }
    Ok(total / n as f64)
}

/// Orthogonal projection UUᵀx of a single sample.
pub fn reconstruct(x: &DVector<f64>, u: &ProjectionBasis) -> Result<DVector<f64>> {
    if x.nrows() != u.nfeatures() {
        return Err(SpcaError::DimensionMismatch(format!(
            "vector has length {} but basis has d={}",
            x.nrows(),
            u.nfeatures()
        )));
    }
    Ok(u.matrix() * (u.matrix().transpose() * x))
}

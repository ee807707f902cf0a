//! Weighted pair graph and its Laplacian.
//!
//! The projection subproblem Σ_ij ‖Uᵀ(x_i−x_j)‖₂^p w_i is rewritten as a
//! quadratic form 2·tr(UᵀXLXᵀU) through the reweighting
//! s_ij = ‖Uᵀ(x_i−x_j)‖₂^{p−2}. The per-sample weighting s_ij·w_i is
//! asymmetric, so the edges are symmetrized as s_ij·(w_i+w_j)/2, which
//! leaves the scalar objective unchanged under the i↔j index swap and
//! makes L = D − S̃ symmetric positive semidefinite.

use nalgebra::DMatrix;

use crate::error::{Result, SpcaError};
use crate::types::{DataMatrix, ProjectionBasis, SampleWeights};

/// Symmetrized pair-weight graph: edge matrix S̃, degree matrix D, and
/// Laplacian L = D − S̃.
#[derive(Debug, Clone)]
pub struct PairGraph {
    pub edges: DMatrix<f64>,
    pub degrees: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
}

/// Builds the weighted pair graph at the current projection.
///
/// Squared projected distances are smoothed by `eps_dist` before the
/// (p−2)/2 power so coincident samples stay finite when p < 2.
pub fn pair_weights(
    x: &DataMatrix,
    u: &ProjectionBasis,
    w: &SampleWeights,
    p: f64,
    eps_dist: f64,
) -> Result<PairGraph> {
    if x.nfeatures() != u.nfeatures() {
        return Err(SpcaError::DimensionMismatch(format!(
            "data has d={} but basis has d={}",
            x.nfeatures(),
            u.nfeatures()
        )));
    }
    if w.len() != x.nsamples() {
        return Err(SpcaError::DimensionMismatch(format!(
            "{} weights for {} samples",
            w.len(),
            x.nsamples()
        )));
    }
    if !(p > 0.0 && p <= 2.0) {
        return Err(SpcaError::InvalidArgument(format!(
            "p must be in (0, 2], got {p}"
        )));
    }
    if eps_dist < 0.0 {
        return Err(SpcaError::InvalidArgument(format!(
            "eps_dist must be non-negative, got {eps_dist}"
        )));
    }

    let projected = u.matrix().transpose() * x.matrix();
    let n = projected.ncols();
    let weights = w.values();
    let exponent = (p - 2.0) / 2.0;

    let mut edges = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = (projected.column(i) - projected.column(j)).norm_squared() + eps_dist;
            let s = d2.powf(exponent);
            let edge = s * 0.5 * (weights[i] + weights[j]);
            edges[(i, j)] = edge;
            edges[(j, i)] = edge;
        }
    }

    let mut degrees = DMatrix::zeros(n, n);
    for i in 0..n {
        degrees[(i, i)] = edges.row(i).sum();
    }
    let laplacian = &degrees - &edges;
    Ok(PairGraph {
        edges,
        degrees,
        laplacian,
    })
}

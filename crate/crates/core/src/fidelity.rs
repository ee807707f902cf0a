//! Per-sample fidelity scores and their rescaling.

use crate::error::{Result, SpcaError};
use crate::types::{DataMatrix, FidelityVector, ProjectionBasis};

/// Fidelity of sample i: ℓ_i = Σ_j ‖Uᵀ(x_i − x_j)‖₂^p.
///
/// Large fidelity marks a sample whose projection is spread far from the
/// others, i.e. a "simple" sample under this maximization formulation.
pub fn fidelity(x: &DataMatrix, u: &ProjectionBasis, p: f64) -> Result<FidelityVector> {
    if x.nfeatures() != u.nfeatures() {
        return Err(SpcaError::DimensionMismatch(format!(
            "data has d={} but basis has d={}",
            x.nfeatures(),
            u.nfeatures()
        )));
    }
    if !(p > 0.0 && p <= 2.0) {
        return Err(SpcaError::InvalidArgument(format!(
            "p must be in (0, 2], got {p}"
        )));
    }
    let projected = u.matrix().transpose() * x.matrix(); // k×n
    let n = projected.ncols();
    let mut ell = vec![0.0; n];
    for i in 0..n {
        let yi = projected.column(i);
        let mut acc = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d2 = (yi - projected.column(j)).norm_squared();
            acc += d2.powf(p / 2.0);
        }
        ell[i] = acc;
    }
    FidelityVector::new(ell, false)
}

/// Rescales the fidelities so the largest equals c.
pub fn normalize_fidelity(ell: &FidelityVector, c: f64) -> Result<FidelityVector> {
    if ell.is_normalized() {
        return Err(SpcaError::InvalidArgument(
            "fidelity vector is already normalized".into(),
        ));
    }
    if !(c > 0.0) {
        return Err(SpcaError::InvalidArgument(format!(
            "normalizing coefficient must be positive, got {c}"
        )));
    }
    let max = ell.values().iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return Err(SpcaError::DegenerateInput(
            "all fidelities are zero; data columns are fully duplicated".into(),
        ));
    }
    let scaled: Vec<f64> = ell.values().iter().map(|&l| c * l / max).collect();
    FidelityVector::new(scaled, true)
}

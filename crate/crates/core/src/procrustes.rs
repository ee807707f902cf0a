//! Orthogonal Procrustes step: the column-orthonormal maximizer of
//! tr(WᵀH) is the polar factor QVᵀ of the thin SVD H = QΣVᵀ.

use nalgebra::DMatrix;

use crate::error::{Result, SpcaError};
use crate::types::ProjectionBasis;

/// Polar factor of H via thin SVD, with a fixed sign convention.
///
/// Each (Q column, V column) pair is flipped so the largest-magnitude
/// entry of the Q column is positive, making the output bit-reproducible
/// across runs. Rank-deficient H is handled deterministically by the
/// same convention.
pub fn procrustes_polar(h: &DMatrix<f64>) -> Result<ProjectionBasis> {
    let (d, k) = (h.nrows(), h.ncols());
    if d < k {
        return Err(SpcaError::InvalidArgument(format!(
            "polar factor needs d >= k, got {d}x{k}"
        )));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(SpcaError::InvalidArgument(
            "matrix contains non-finite entries".into(),
        ));
    }
    let svd = h.clone().svd(true, true);
    let mut q = svd.u.expect("svd requested u");
    let mut vt = svd.v_t.expect("svd requested v_t");

    for col in 0..k {
        let mut max_abs = 0.0;
        let mut max_val = 0.0;
        for row in 0..d {
            let v = q[(row, col)];
            if v.abs() > max_abs {
                max_abs = v.abs();
                max_val = v;
            }
        }
        if max_val < 0.0 {
            for row in 0..d {
                q[(row, col)] = -q[(row, col)];
            }
            for j in 0..vt.ncols() {
                vt[(col, j)] = -vt[(col, j)];
            }
        }
    }
    ProjectionBasis::new(q * vt)
}

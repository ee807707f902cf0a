//! Self-paced regularizer and the closed-form weight update.
//!
//! The weight subproblem is `max_{w in [0,1]} w·ℓ + f(w, η)` where the
//! regularizer is built so its maximizer is an increasing function of the
//! fidelity ℓ that saturates at 1. The threshold ℓ = 1/η separates
//! "complex" samples (slow weight growth) from "simple" ones.

use crate::error::{Result, SpcaError};

/// Regularizer f(w, η) = −(w+e^{−1/η})·ln(w+e^{−1/η}) − (1−w)·ln(1−w) − w/η.
///
/// The (1−w)·ln(1−w) term is continued by its limit 0 at w = 1.
pub fn regularizer_value(w: f64, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w) || !w.is_finite() {
        return Err(SpcaError::InvalidArgument(format!(
            "weight must be in [0, 1], got {w}"
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(SpcaError::InvalidArgument(format!(
            "eta must be positive and finite, got {eta}"
        )));
    }
    let shift = (-1.0 / eta).exp();
    let a = w + shift;
    // a > 0 always since shift > 0; a·ln(a) -> 0 as a -> 0+.
    let term1 = if a > 0.0 { -a * a.ln() } else { 0.0 };
    let b = 1.0 - w;
    let term2 = if b > 0.0 { -b * b.ln() } else { 0.0 };
    Ok(term1 + term2 - w / eta)
}

/// Closed-form maximizer w* = (e^{ℓ−1/η} − e^{−1/η}) / (1 + e^{ℓ−1/η}).
///
/// For large exponents the direct form is a ratio of overflowing
/// exponentials, so the algebraically equivalent
/// w* = 1 − (1 + e^{−1/η}) / (1 + e^{ℓ−1/η}) is used instead, keeping the
/// large exponential in the denominator only.
pub fn optimal_weight(ell: f64, eta: f64) -> Result<f64> {
    if !(ell >= 0.0) || !ell.is_finite() {
        return Err(SpcaError::InvalidArgument(format!(
            "fidelity must be non-negative and finite, got {ell}"
        )));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(SpcaError::InvalidArgument(format!(
            "eta must be positive and finite, got {eta}"
        )));
    }
    let exponent = ell - 1.0 / eta;
    let w = if exponent > 30.0 {
        // e^exponent may overflow to inf; the division then rounds to 0
        // and w saturates at 1, matching the analytic limit.
        1.0 - (1.0 + (-1.0 / eta).exp()) / (1.0 + exponent.exp())
    } else {
        let e = exponent.exp();
        (e - (-1.0 / eta).exp()) / (1.0 + e)
    };
    // Clamp sub-ulp negatives from the subtraction at ell = 0.
    Ok(w.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Independent oracle: grid search for argmax of w·ℓ + f(w, η).
    pub(crate) fn grid_search_weight(ell: f64, eta: f64, step: f64) -> f64 {
        let mut best_w = 0.0;
        let mut best_val = f64::NEG_INFINITY;
        let n = (1.0 / step).round() as usize;
        for i in 0..=n {
            let w = (i as f64) * step;
            let val = w * ell + regularizer_value(w, eta).unwrap();
            if val > best_val {
                best_val = val;
                best_w = w;
            }
        }
        best_w
    }

    #[test]
    fn regularizer_at_zero_eta_one() {
        // f(0, 1) = -e^{-1}·ln(e^{-1}) - 1·ln(1) - 0 = e^{-1}
        let v = regularizer_value(0.0, 1.0).unwrap();
        assert_relative_eq!(v, (-1.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn regularizer_at_one_uses_limit() {
        // f(1, 0.5) = -(1+e^{-2})·ln(1+e^{-2}) - 0 - 2
        let v = regularizer_value(1.0, 0.5).unwrap();
        let a: f64 = 1.0 + (-2.0f64).exp();
        assert_relative_eq!(v, -a * a.ln() - 2.0, epsilon = 1e-12);
        // cross-check: limit from below
        let v_near = regularizer_value(1.0 - 1e-9, 0.5).unwrap();
        assert!((v - v_near).abs() < 1e-7);
    }

    #[test]
    fn regularizer_vanishes_for_tiny_eta_at_zero() {
        let v = regularizer_value(0.0, 1e-12).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn regularizer_rejects_bad_args() {
        assert!(regularizer_value(-0.1, 1.0).is_err());
        assert!(regularizer_value(1.1, 1.0).is_err());
        assert!(regularizer_value(0.5, 0.0).is_err());
        assert!(regularizer_value(0.5, -1.0).is_err());
    }

    #[test]
    fn weight_zero_fidelity_is_zero() {
        for &eta in &[0.05, 0.1, 0.2, 1.0, 10.0] {
            assert_eq!(optimal_weight(0.0, eta).unwrap(), 0.0);
        }
    }

    #[test]
    fn weight_at_threshold() {
        // ℓ = 1/η makes the exponent zero: w* = (1 - e^{-5})/2.
        let w = optimal_weight(5.0, 0.2).unwrap();
        assert_relative_eq!(w, (1.0 - (-5.0f64).exp()) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(w, 0.496631, epsilon = 1e-6);
        // matches the grid-search oracle
        let oracle = grid_search_weight(5.0, 0.2, 1e-6);
        assert!((w - oracle).abs() < 1e-4);
    }

    #[test]
    fn weight_saturates_for_large_fidelity() {
        let w = optimal_weight(1000.0, 0.1).unwrap();
        assert!((w - 1.0).abs() < 1e-9);
        assert!(w <= 1.0);
    }

    #[test]
    fn weight_strictly_below_one_for_moderate_fidelity() {
        for &ell in &[0.1, 1.0, 5.0, 20.0] {
            let w = optimal_weight(ell, 0.2).unwrap();
            assert!(w < 1.0, "w*({ell}) = {w}");
            assert!(w >= 0.0);
        }
    }

    #[test]
    fn weight_monotone_in_fidelity() {
        for &eta in &[0.05, 0.1, 0.2, 0.5, 1.0] {
            let mut prev = -1.0;
            for i in 0..=2000 {
                let ell = i as f64 * 0.02;
                let w = optimal_weight(ell, eta).unwrap();
                assert!(w >= prev, "non-monotone at ell={ell}, eta={eta}");
                prev = w;
            }
        }
    }

    #[test]
    fn weight_inflection_at_reciprocal_eta() {
        // Second derivative of w* w.r.t. ℓ changes sign at ℓ = 1/η.
        for &eta in &[0.1, 0.2, 0.5] {
            let h = 1e-3;
            let d2 = |ell: f64| {
                let f = |x: f64| optimal_weight(x, eta).unwrap();
                (f(ell + h) - 2.0 * f(ell) + f(ell - h)) / (h * h)
            };
            let threshold = 1.0 / eta;
            assert!(d2(threshold - 0.05) > 0.0);
            assert!(d2(threshold + 0.05) < 0.0);
        }
    }

    #[test]
    fn weight_rejects_bad_args() {
        assert!(optimal_weight(-1.0, 0.1).is_err());
        assert!(optimal_weight(1.0, 0.0).is_err());
        assert!(optimal_weight(f64::INFINITY, 0.1).is_err());
    }
}

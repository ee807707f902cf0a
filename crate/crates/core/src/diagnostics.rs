//! Numerical spot checks of the solver's theory: the implicit surrogate
//! F_η (the integral of the weight curve), its tangent minorant, ascent
//! monitoring of a recorded fit, and the Lipschitz-style robustness
//! bound. All checks are quadrature- and grid-based, not symbolic.

use crate::error::{Result, SpcaError};
use crate::types::TrainingHistory;
use crate::weights::optimal_weight;

/// Tabulated surrogate F_η(ℓ) on a fidelity grid.
#[derive(Debug, Clone)]
pub struct SurrogateCurve {
    pub eta: f64,
    pub ell_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub step: f64,
}

/// F_η(ℓ) = ∫₀^ℓ w*(l, η) dl by composite Simpson's rule.
pub fn surrogate_f(ell: f64, eta: f64, steps: usize) -> Result<f64> {
    if !(ell >= 0.0) || !ell.is_finite() {
        return Err(SpcaError::InvalidArgument(format!(
            "upper limit must be non-negative and finite, got {ell}"
        )));
    }
    if steps < 16 {
        return Err(SpcaError::InvalidArgument(format!(
            "need at least 16 quadrature steps, got {steps}"
        )));
    }
    if ell == 0.0 {
        return Ok(0.0);
    }
    let n = if steps % 2 == 0 { steps } else { steps + 1 };
    let h = ell / n as f64;
    let mut acc = optimal_weight(0.0, eta)? + optimal_weight(ell, eta)?;
    for i in 1..n {
        let coeff = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += coeff * optimal_weight(i as f64 * h, eta)?;
    }
    Ok(acc * h / 3.0)
}

/// Samples F_η over `[0, ell_max]` at `points + 1` equally spaced nodes.
pub fn surrogate_curve(eta: f64, ell_max: f64, points: usize, steps: usize) -> Result<SurrogateCurve> {
    if points == 0 || !(ell_max > 0.0) {
        return Err(SpcaError::InvalidArgument(
            "surrogate curve needs points >= 1 and ell_max > 0".into(),
        ));
    }
    let step = ell_max / points as f64;
    let mut ell_grid = Vec::with_capacity(points + 1);
    let mut values = Vec::with_capacity(points + 1);
    for i in 0..=points {
        let ell = i as f64 * step;
        ell_grid.push(ell);
        values.push(surrogate_f(ell, eta, steps)?);
    }
    Ok(SurrogateCurve {
        eta,
        ell_grid,
        values,
        step,
    })
}

/// Tangent of F_η at ℓ(U*), evaluated at ℓ(U):
/// Q = F_η(ℓ*) + w*(ℓ*, η)·(ℓ − ℓ*).
pub fn surrogate_q(ell_u: f64, ell_ustar: f64, eta: f64, steps: usize) -> Result<f64> {
    if !(ell_u >= 0.0) || !(ell_ustar >= 0.0) {
        return Err(SpcaError::InvalidArgument(
            "fidelities must be non-negative".into(),
        ));
    }
    let f_star = surrogate_f(ell_ustar, eta, steps)?;
    let slope = optimal_weight(ell_ustar, eta)?;
    Ok(f_star + slope * (ell_u - ell_ustar))
}

/// One step of an ascent report: the objective value, its change from
/// the previous step, and whether that change violates the tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentStep {
    pub iter: usize,
    pub objective: f64,
    pub delta: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Default)]
pub struct MonotonicityReport {
    /// Σ_i F_η(ℓ_i^(t)) per outer iteration, from the recorded normalized
    /// fidelities.
    pub surrogate_steps: Vec<AscentStep>,
    /// Inner trace-objective deltas, flattened as (outer, inner, delta).
    pub inner_violations: Vec<(usize, usize, f64)>,
}

impl MonotonicityReport {
    pub fn surrogate_violations(&self) -> usize {
        self.surrogate_steps.iter().filter(|s| s.violation).count()
    }

    pub fn is_clean(&self) -> bool {
        self.surrogate_violations() == 0 && self.inner_violations.is_empty()
    }
}

/// Evaluates Σ_i F_η(ℓ_i) across the recorded outer iterations and flags
/// decreases beyond 1e−6·|value|; also flags inner trace-objective
/// decreases within each outer iteration.
///
/// With fidelity renormalization active the outer sequence is a
/// diagnostic, not a guarantee: rescaling ℓ each iteration changes the
/// implicit objective being ascended.
pub fn check_mm_monotonicity(
    history: &TrainingHistory,
    eta: f64,
    steps: usize,
) -> Result<MonotonicityReport> {
    if history.is_empty() {
        return Err(SpcaError::InvalidArgument("history is empty".into()));
    }
    let mut report = MonotonicityReport::default();
    let mut prev: Option<f64> = None;
    for (t, rec) in history.records.iter().enumerate() {
        let mut total = 0.0;
        for &ell in &rec.ell_norm {
            total += surrogate_f(ell, eta, steps)?;
        }
        let delta = prev.map_or(0.0, |p| total - p);
        let violation = match prev {
            Some(_) => delta < -1e-6 * total.abs(),
            None => false,
        };
        report.surrogate_steps.push(AscentStep {
            iter: t,
            objective: total,
            delta,
            violation,
        });
        prev = Some(total);

        for i in 1..rec.trace_objective.len() {
            let a = rec.trace_objective[i - 1];
            let b = rec.trace_objective[i];
            if b < a - 1e-8 * a.abs().max(1.0) {
                report.inner_violations.push((t, i, b - a));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct RobustnessReport {
    pub pairs_checked: usize,
    /// Worst value of w*(M,η)·|ℓ_i−ℓ_j| − |F(ℓ_i)−F(ℓ_j)| (negative means
    /// the bound failed).
    pub min_slack: f64,
    pub violations: usize,
}

/// Checks |F_η(ℓ_i) − F_η(ℓ_j)| ≤ w*(M, η)·|ℓ_i − ℓ_j| over all pairs.
pub fn check_robustness_bound(
    ells: &[f64],
    eta: f64,
    bound: f64,
    steps: usize,
) -> Result<RobustnessReport> {
    if ells.iter().any(|&l| l >= bound) {
        return Err(SpcaError::InvalidArgument(format!(
            "all fidelities must be strictly below the bound M = {bound}"
        )));
    }
    let lipschitz = optimal_weight(bound, eta)?;
    let f: Vec<f64> = ells
        .iter()
        .map(|&l| surrogate_f(l, eta, steps))
        .collect::<Result<_>>()?;
    let mut min_slack = f64::INFINITY;
    let mut violations = 0;
    let mut pairs = 0;
    for i in 0..ells.len() {
        for j in (i + 1)..ells.len() {
            let slack = lipschitz * (ells[i] - ells[j]).abs() - (f[i] - f[j]).abs();
            min_slack = min_slack.min(slack);
            if slack < -1e-9 {
                violations += 1;
            }
            pairs += 1;
        }
    }
    Ok(RobustnessReport {
        pairs_checked: pairs,
        min_slack,
        violations,
    })
}

/// One `(η, ℓ)` cell of the weight-curve table.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightCurveRow {
    pub eta: f64,
    pub ell: f64,
    pub weight: f64,
    /// The simple/complex threshold ℓ = 1/η for this row's η.
    pub threshold: f64,
}

/// Tabulates w*(ℓ, η) over the cross product of the two grids, with the
/// ℓ = 1/η marker carried per row.
pub fn weight_curve(eta_list: &[f64], ell_grid: &[f64]) -> Result<Vec<WeightCurveRow>> {
    if eta_list.is_empty() || ell_grid.is_empty() {
        return Err(SpcaError::InvalidArgument(
            "weight curve needs non-empty eta and ell grids".into(),
        ));
    }
    let mut rows = Vec::with_capacity(eta_list.len() * ell_grid.len());
    for &eta in eta_list {
        for &ell in ell_grid {
            rows.push(WeightCurveRow {
                eta,
                ell,
                weight: optimal_weight(ell, eta)?,
                threshold: 1.0 / eta,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::IterationRecord;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trapezoid_f(ell: f64, eta: f64, steps: usize) -> f64 {
        if ell == 0.0 {
            return 0.0;
        }
        let h = ell / steps as f64;
        let mut acc = 0.5 * (optimal_weight(0.0, eta).unwrap() + optimal_weight(ell, eta).unwrap());
        for i in 1..steps {
            acc += optimal_weight(i as f64 * h, eta).unwrap();
        }
        acc * h
    }

    #[test]
    fn f_at_zero_is_zero() {
        assert_eq!(surrogate_f(0.0, 0.3, 64).unwrap(), 0.0);
    }

    #[test]
    fn f_bounded_by_endpoint_rectangle() {
        for &ell in &[0.5, 2.0, 10.0, 30.0] {
            let f = surrogate_f(ell, 0.2, 256).unwrap();
            let bound = ell * optimal_weight(ell, 0.2).unwrap();
            assert!(f <= bound + 1e-12, "F({ell}) = {f} > {bound}");
        }
    }

    #[test]
    fn simpson_agrees_with_trapezoid() {
        let simpson = surrogate_f(10.0, 0.2, 256).unwrap();
        let trap = trapezoid_f(10.0, 0.2, 4096);
        assert!((simpson - trap).abs() < 1e-6);
    }

    #[test]
    fn f_rejects_small_step_counts() {
        assert!(surrogate_f(1.0, 0.2, 8).is_err());
    }

    #[test]
    fn curve_starts_at_zero_and_is_nondecreasing() {
        let curve = surrogate_curve(0.1, 20.0, 100, 64).unwrap();
        assert_eq!(curve.values[0], 0.0);
        for w in curve.values.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn q_touches_f_at_expansion_point() {
        let q = surrogate_q(3.0, 3.0, 0.2, 256).unwrap();
        let f = surrogate_f(3.0, 0.2, 256).unwrap();
        assert_eq!(q, f);
    }

    #[test]
    fn q_at_zero_expansion_point_vanishes() {
        // ℓ* = 0: Q = F(0) + w*(0)·ℓ = 0 since w*(0, η) = 0.
        let q = surrogate_q(5.0, 0.0, 0.2, 256).unwrap();
        assert_eq!(q, 0.0);
        assert!(surrogate_f(5.0, 0.2, 256).unwrap() >= 0.0);
    }

    #[test]
    fn minorant_holds_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let ell = rng.gen_range(0.0..20.0);
            let ell_star = rng.gen_range(0.0..20.0);
            let eta = rng.gen_range(0.05..1.0);
            let f = surrogate_f(ell, eta, 256).unwrap();
            let q = surrogate_q(ell, ell_star, eta, 256).unwrap();
            assert!(f >= q - 1e-8, "F={f} < Q={q} at ({ell},{ell_star},{eta})");
        }
    }

    #[test]
    fn f_convex_and_derivative_matches_weight() {
        let eta = 0.2;
        let h = 1e-3;
        for i in 1..200 {
            let ell = i as f64 * 0.1;
            let fp = surrogate_f(ell + h, eta, 512).unwrap();
            let fm = surrogate_f(ell - h, eta, 512).unwrap();
            let f0 = surrogate_f(ell, eta, 512).unwrap();
            let second = (fp - 2.0 * f0 + fm) / (h * h);
            assert!(second >= -1e-6, "non-convex at ell={ell}: {second}");
            let first = (fp - fm) / (2.0 * h);
            let w = optimal_weight(ell, eta).unwrap();
            assert!((first - w).abs() < 1e-5, "F' != w* at ell={ell}");
        }
    }

    fn record_with(ell_norm: Vec<f64>, traces: Vec<f64>) -> IterationRecord {
        IterationRecord {
            ell_raw: ell_norm.clone(),
            weights: vec![0.5; ell_norm.len()],
            objective: 0.0,
            inner_iters: traces.len(),
            trace_objective: traces,
            ell_norm,
        }
    }

    #[test]
    fn single_iteration_history_is_vacuously_monotone() {
        let history = TrainingHistory {
            records: vec![record_with(vec![1.0, 2.0], vec![1.0, 2.0, 3.0])],
        };
        let report = check_mm_monotonicity(&history, 0.2, 64).unwrap();
        assert!(report.is_clean());
        assert_eq!(report.surrogate_steps.len(), 1);
    }

    #[test]
    fn injected_decrease_is_flagged_at_right_index() {
        let history = TrainingHistory {
            records: vec![
                record_with(vec![5.0, 5.0], vec![1.0, 2.0]),
                record_with(vec![1.0, 1.0], vec![2.0, 1.0]), // both kinds of decrease
            ],
        };
        let report = check_mm_monotonicity(&history, 0.2, 64).unwrap();
        assert_eq!(report.surrogate_violations(), 1);
        assert!(report.surrogate_steps[1].violation);
        assert_eq!(report.inner_violations, vec![(1, 1, -1.0)]);
    }

    #[test]
    fn empty_history_is_an_error() {
        let history = TrainingHistory::default();
        assert!(check_mm_monotonicity(&history, 0.2, 64).is_err());
    }

    #[test]
    fn robustness_bound_on_linspace() {
        let ells: Vec<f64> = (0..50).map(|i| i as f64 * 14.9 / 49.0).collect();
        let report = check_robustness_bound(&ells, 0.1, 15.0, 256).unwrap();
        assert_eq!(report.violations, 0);
        assert!(report.min_slack >= -1e-9);
    }

    #[test]
    fn robustness_rejects_fidelity_at_bound() {
        assert!(check_robustness_bound(&[1.0, 15.0], 0.1, 15.0, 64).is_err());
    }

    #[test]
    fn equal_fidelities_have_zero_gap() {
        let report = check_robustness_bound(&[3.0, 3.0], 0.1, 15.0, 256).unwrap();
        assert!(report.min_slack.abs() < 1e-12);
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn weight_curve_rows_and_ordering() {
        let etas = [0.1, 0.5];
        let ells: Vec<f64> = (0..=40).map(|i| i as f64 * 0.5).collect();
        let rows = weight_curve(&etas, &ells).unwrap();
        assert_eq!(rows.len(), 2 * 41);
        // ℓ = 0 rows are zero
        for r in rows.iter().filter(|r| r.ell == 0.0) {
            assert_eq!(r.weight, 0.0);
        }
        // nondecreasing along ℓ for each η
        for chunk in rows.chunks(41) {
            for w in chunk.windows(2) {
                assert!(w[1].weight >= w[0].weight);
            }
        }
        // larger η admits samples faster: w*(ℓ, 0.5) >= w*(ℓ, 0.1) for ℓ > 0
        for i in 1..=40 {
            assert!(rows[41 + i].weight >= rows[i].weight);
        }
    }
}

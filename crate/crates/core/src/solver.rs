//! The alternating self-paced fit: weight update, fidelity rescaling, and
//! the iteratively reweighted projection solve.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SpcaError};
use crate::fidelity::{fidelity, normalize_fidelity};
use crate::graph::pair_weights;
use crate::procrustes::procrustes_polar;
use crate::types::{
    DataMatrix, InitStrategy, IterationRecord, ProjectionBasis, SampleWeights, SelfPacedConfig,
    TrainingHistory,
};
use crate::weights::{optimal_weight, regularizer_value};

/// Top-k eigenbasis of the centered covariance, eigenvalues descending,
/// each column sign-fixed so its largest-magnitude entry is positive.
pub fn pca_basis(x: &DataMatrix, k: usize) -> Result<ProjectionBasis> {
    let (d, n) = x.dims();
    if k < 1 || k > d {
        return Err(SpcaError::InvalidArgument(format!(
            "k must be in [1, d={d}], got {k}"
        )));
    }
    let mean = x.matrix().column_mean();
    let mut centered = x.matrix().clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let cov = &centered * centered.transpose() / n as f64;
    let eig = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());

    let mut u = DMatrix::zeros(d, k);
    for (col, &idx) in order.iter().take(k).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let mut max_abs = 0.0;
        let mut max_val = 0.0;
        for &e in v.iter() {
            if e.abs() > max_abs {
                max_abs = e.abs();
                max_val = e;
            }
        }
        if max_val < 0.0 {
            v = -v;
        }
        u.set_column(col, &v);
    }
    ProjectionBasis::new(u)
}

/// Seeded random orthonormal basis: QR of a standard Gaussian matrix.
pub fn random_basis(d: usize, k: usize, seed: u64) -> Result<ProjectionBasis> {
    if k < 1 || k > d {
        return Err(SpcaError::InvalidArgument(format!(
            "k must be in [1, d={d}], got {k}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(d, d, |_, _| standard_normal(&mut rng));
    let q = g.qr().q();
    ProjectionBasis::new(q.columns(0, k).into_owned())
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; avoids pulling in rand_distr for one distribution.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Fixed-weight projection solve.
///
/// Alternates: build the pair graph at the current U, form
/// H = X L Xᵀ U, replace U by the polar factor of H; stops when the
/// relative change of tr(UᵀH) drops below `inner_tol` or after
/// `inner_max` steps. Returns the final basis and the trace-objective
/// value after every step.
///
/// When H vanishes (all weighted pairwise differences are zero) the
/// incoming basis is returned unchanged rather than an arbitrary SVD
/// basis.
pub fn update_projection(
    x: &DataMatrix,
    w: &SampleWeights,
    p: f64,
    u0: &ProjectionBasis,
    inner_tol: f64,
    inner_max: usize,
    eps_dist: f64,
) -> Result<(ProjectionBasis, Vec<f64>)> {
    if x.nfeatures() != u0.nfeatures() {
        return Err(SpcaError::DimensionMismatch(format!(
            "data has d={} but basis has d={}",
            x.nfeatures(),
            u0.nfeatures()
        )));
    }
    let scale = x.matrix().norm();
    let degenerate_tol = 1e-12 * (1.0 + scale * scale) * x.nsamples() as f64;

    let mut u = u0.clone();
    let mut traces = Vec::new();
    let mut prev_trace: Option<f64> = None;
    for _ in 0..inner_max {
        let graph = pair_weights(x, &u, w, p, eps_dist)?;
        let h = x.matrix() * &graph.laplacian * x.matrix().transpose() * u.matrix();
        if h.norm() <= degenerate_tol {
            return Ok((u, traces));
        }
        let u_next = procrustes_polar(&h)?;
        let trace = (u_next.matrix().transpose() * &h).trace();
        traces.push(trace);
        u = u_next;
        if let Some(prev) = prev_trace {
            let denom = prev.abs().max(1e-30);
            if ((trace - prev) / denom).abs() < inner_tol {
                break;
            }
        }
        prev_trace = Some(trace);
    }
    Ok((u, traces))
}

/// Explicit self-paced objective Σ_i w_i ℓ_i + Σ_i f(w_i, η).
fn explicit_objective(weights: &[f64], ell: &[f64], eta: f64) -> Result<f64> {
    let mut total = 0.0;
    for (&w, &l) in weights.iter().zip(ell) {
        total += w * l + regularizer_value(w, eta)?;
    }
    Ok(total)
}

/// Runs the full alternating fit for exactly `cfg.outer_iters` outer
/// iterations: fidelity, rescale, closed-form weights, inner projection
/// solve. Returns the final basis, final weights, and the per-iteration
/// history.
pub fn fit_spca(
    x: &DataMatrix,
    cfg: &SelfPacedConfig,
) -> Result<(ProjectionBasis, SampleWeights, TrainingHistory)> {
    let (d, _n) = x.dims();
    cfg.validate(d)?;

    let mut u = match cfg.init {
        InitStrategy::Pca => pca_basis(x, cfg.k)?,
        InitStrategy::RandomOrthonormal => random_basis(d, cfg.k, cfg.seed)?,
    };

    let mut history = TrainingHistory::default();
    let mut weights = SampleWeights::ones(x.nsamples());

    for iter in 0..cfg.outer_iters {
        let ell_raw = fidelity(x, &u, cfg.p)?;
        let ell_norm = normalize_fidelity(&ell_raw, cfg.c).map_err(|e| match e {
            SpcaError::DegenerateInput(msg) => {
                SpcaError::DegenerateInput(format!("outer iteration {iter}: {msg}"))
            }
            other => other,
        })?;

        let w: Vec<f64> = ell_norm
            .values()
            .iter()
            .map(|&l| optimal_weight(l, cfg.eta))
            .collect::<Result<_>>()?;
        weights = SampleWeights::new(w)?;

        let objective = explicit_objective(weights.values(), ell_norm.values(), cfg.eta)?;

        let (u_next, traces) = update_projection(
            x,
            &weights,
            cfg.p,
            &u,
            cfg.inner_tol,
            cfg.inner_max,
            cfg.eps_dist,
        )?;
        u = u_next;

        history.records.push(IterationRecord {
            ell_raw: ell_raw.values().to_vec(),
            ell_norm: ell_norm.values().to_vec(),
            weights: weights.values().to_vec(),
            objective,
            inner_iters: traces.len(),
            trace_objective: traces,
        });
    }

    Ok((u, weights, history))
}

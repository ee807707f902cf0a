use nalgebra::DMatrix;

use crate::error::{Result, SpcaError};

/// A d×n data matrix whose columns are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
}

impl DataMatrix {
    /// Wraps a d×n matrix, rejecting non-finite entries and n < 2.
    ///
    /// At least two samples are required because the fidelity term sums
    /// over sample pairs.
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() < 1 {
            return Err(SpcaError::InvalidArgument("data matrix needs d >= 1".into()));
        }
        if values.ncols() < 2 {
            return Err(SpcaError::InvalidArgument(
                "data matrix needs at least 2 samples (n >= 2)".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpcaError::InvalidArgument(
                "data matrix contains non-finite entries".into(),
            ));
        }
        Ok(DataMatrix { values })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.values.nrows(), self.values.ncols())
    }

    pub fn nfeatures(&self) -> usize {
        self.values.nrows()
    }

    pub fn nsamples(&self) -> usize {
        self.values.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.values
    }
}

/// Maximum allowed deviation of UᵀU from the identity.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// A d×k column-orthonormal projection matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    u: DMatrix<f64>,
}

impl ProjectionBasis {
    /// Wraps a d×k matrix after checking column orthonormality.
    pub fn new(u: DMatrix<f64>) -> Result<Self> {
        if u.ncols() > u.nrows() {
            return Err(SpcaError::InvalidArgument(format!(
                "projection basis must have k <= d, got {}x{}",
                u.nrows(),
                u.ncols()
            )));
        }
        let gram_defect = orthonormality_defect(&u);
        if !(gram_defect <= ORTHONORMALITY_TOL) {
            return Err(SpcaError::InvalidArgument(format!(
                "columns are not orthonormal (max |UᵀU - I| = {gram_defect:.3e})"
            )));
        }
        Ok(ProjectionBasis { u })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.u.nrows(), self.u.ncols())
    }

    pub fn nfeatures(&self) -> usize {
        self.u.nrows()
    }

    pub fn subspace_dim(&self) -> usize {
        self.u.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.u
    }
}

/// Max-norm of UᵀU − I.
pub fn orthonormality_defect(u: &DMatrix<f64>) -> f64 {
    let gram = u.transpose() * u;
    let k = gram.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((gram[(i, j)] - target).abs());
        }
    }
    defect
}

/// How the projection basis is initialized before the alternating solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Classical PCA basis of the centered data (deterministic).
    Pca,
    /// QR of a seeded Gaussian matrix.
    RandomOrthonormal,
}

/// Solver configuration: target dimension, norm exponent, and the
/// self-paced weighting controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfPacedConfig {
    /// Target subspace dimension, 1 <= k <= d.
    pub k: usize,
    /// Exponent of the pairwise distance term, in (0, 2].
    pub p: f64,
    /// Age parameter; larger values admit samples faster.
    pub eta: f64,
    /// Normalizing coefficient: the largest fidelity is rescaled to this
    /// value every outer iteration.
    pub c: f64,
    /// Number of outer (weight/projection alternation) iterations.
    pub outer_iters: usize,
    /// Relative tolerance on the inner trace objective.
    pub inner_tol: f64,
    /// Cap on inner projection-update iterations.
    pub inner_max: usize,
    /// Smoothing constant added to squared projected distances so the
    /// reweighting stays finite at coincident samples when p < 2.
    pub eps_dist: f64,
    /// Seed for randomized initialization (unused by PCA init).
    pub seed: u64,
    pub init: InitStrategy,
}

impl Default for SelfPacedConfig {
    fn default() -> Self {
        SelfPacedConfig {
            k: 1,
            p: 1.0,
            eta: 0.1,
            c: 15.0,
            outer_iters: 10,
            inner_tol: 1e-6,
            inner_max: 50,
            eps_dist: 1e-8,
            seed: 0,
            init: InitStrategy::Pca,
        }
    }
}

impl SelfPacedConfig {
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.k < 1 || self.k > d {
            return Err(SpcaError::InvalidArgument(format!(
                "k must be in [1, d={d}], got {}",
                self.k
            )));
        }
        if !(self.p > 0.0 && self.p <= 2.0) {
            return Err(SpcaError::InvalidArgument(format!(
                "p must be in (0, 2], got {}",
                self.p
            )));
        }
        if !(self.eta > 0.0) {
            return Err(SpcaError::InvalidArgument(format!(
                "eta must be positive, got {}",
                self.eta
            )));
        }
        if !(self.c > 0.0) {
            return Err(SpcaError::InvalidArgument(format!(
                "c must be positive, got {}",
                self.c
            )));
        }
        if self.outer_iters == 0 {
            return Err(SpcaError::InvalidArgument("outer_iters must be positive".into()));
        }
        if !(self.inner_tol > 0.0) {
            return Err(SpcaError::InvalidArgument("inner_tol must be positive".into()));
        }
        if self.inner_max == 0 {
            return Err(SpcaError::InvalidArgument("inner_max must be positive".into()));
        }
        if !(self.eps_dist > 0.0) {
            return Err(SpcaError::InvalidArgument("eps_dist must be positive".into()));
        }
        Ok(())
    }
}

/// Per-sample weights in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SampleWeights {
    w: Vec<f64>,
}

impl SampleWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(SpcaError::InvalidArgument(
                "sample weights must lie in [0, 1]".into(),
            ));
        }
        Ok(SampleWeights { w })
    }

    pub fn ones(n: usize) -> Self {
        SampleWeights { w: vec![1.0; n] }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Per-sample fidelity scores (sums of projected pairwise distances).
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityVector {
    ell: Vec<f64>,
    normalized: bool,
}

impl FidelityVector {
    pub fn new(ell: Vec<f64>, normalized: bool) -> Result<Self> {
        if ell.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(SpcaError::InvalidArgument(
                "fidelities must be finite and non-negative".into(),
            ));
        }
        Ok(FidelityVector { ell, normalized })
    }

    pub fn values(&self) -> &[f64] {
        &self.ell
    }

    pub fn len(&self) -> usize {
        self.ell.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ell.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// Everything recorded during one outer iteration of the alternating fit.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Raw fidelities before rescaling.
    pub ell_raw: Vec<f64>,
    /// Fidelities after rescaling the maximum to c.
    pub ell_norm: Vec<f64>,
    /// Weights computed from the normalized fidelities.
    pub weights: Vec<f64>,
    /// Explicit objective Σ_i w_i ℓ_i + Σ_i f(w_i, η) at the normalized
    /// fidelities.
    pub objective: f64,
    /// Inner trace objective tr(UᵀH) after each inner step.
    pub trace_objective: Vec<f64>,
    /// Number of inner steps actually taken.
    pub inner_iters: usize,
}

/// Per-iteration trace of a fit, used by the diagnostics module and the
/// weight-trajectory exports.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory {
    pub records: Vec<IterationRecord>,
}

impl TrainingHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

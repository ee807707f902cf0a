//! Self-paced PCA: robust subspace estimation that alternates a
//! closed-form curriculum weight update with an iteratively reweighted
//! orthogonal-Procrustes projection solve, plus classical PCA and
//! unit-weight ℓ2,p baselines, theory spot-check diagnostics, and a
//! PGM-based image corruption pipeline.

pub mod baselines;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod fidelity;
pub mod graph;
pub mod io;
pub mod pgm;
pub mod procrustes;
pub mod solver;
#[cfg(test)]
pub(crate) mod testutil;
pub mod types;
pub mod weights;

pub use error::{Result, SpcaError};
pub use types::{
    DataMatrix, FidelityVector, InitStrategy, IterationRecord, ProjectionBasis, SampleWeights,
    SelfPacedConfig, TrainingHistory,
};

pub use baselines::{fit_l2p_rpca, fit_pca, reconstruct, reconstruction_error, PcaModel};
pub use fidelity::{fidelity, normalize_fidelity};
pub use graph::{pair_weights, PairGraph};
pub use procrustes::procrustes_polar;
pub use solver::{fit_spca, pca_basis, random_basis, update_projection};
pub use weights::{optimal_weight, regularizer_value};

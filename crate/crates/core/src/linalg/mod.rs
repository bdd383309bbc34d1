//! Dense and banded complex linear algebra for the desk-scale eigenproblems
//! and scattering solves.

mod band;
mod dense;
mod eig;
mod sparse;

pub use band::{BandLu, BandMat};
pub use dense::{CMat, LuFactor};
pub use eig::{eig_dense, generalized_eig, polish_pencil_pair, shift_invert_subspace, GenPair};
pub use sparse::{rcm_order, CooMat, CsrMat};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is singular (pivot {pivot:.3e} at step {step})")]
    Singular { step: usize, pivot: f64 },
    #[error("eigen iteration did not converge (window {0}..{1})")]
    NoConvergence(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix dimension {n} exceeds the dense budget {budget}; coarsen the mesh")]
    OverBudget { n: usize, budget: usize },
}

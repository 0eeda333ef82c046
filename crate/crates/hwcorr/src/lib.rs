//! Detection of entanglement and genuine multipartite entanglement for
//! tripartite and four-partite qudit states, built on the Heisenberg-Weyl
//! (HW) observable basis.
//!
//! The pipeline: expand a density matrix in tensor products of HW observables
//! ([`correlations`]), assemble per-partition block matrices from the
//! correlation tensors, and compare their trace norms against closed-form
//! separability bounds ([`criteria`]). A state whose trace norm exceeds the
//! bound for a partition is certified entangled across it; aggregate scores
//! over all partitions certify genuine multipartite entanglement. The
//! [`verify`] module carries independent slow-path oracles (brute-force
//! extraction, an alternative trace-norm route, and a partial-transpose
//! comparator) so the main pipeline can be cross-checked rather than trusted.
//!
//! All computations are pure functions of immutable values; everything is
//! safe to share across threads.

pub mod correlations;
pub mod criteria;
pub mod hw_basis;
pub mod linalg;
pub mod matrix;
pub mod states;
pub mod verify;

pub use correlations::{extract, CorrelationData};
pub use hw_basis::{basis_set, hw_displacement, hw_observable, HWObservableBasis, PhaseChoice};
pub use matrix::{kron, ComplexMatrix, RealMatrix};
pub use states::{
    family, ghz, partial_trace, random_mixed, random_product_mixture, random_pure, validate,
    DensityMatrix, MixingConvention, StateFamily, ValidationReport,
};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed arguments, out-of-range indices, unparseable input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A candidate state failed the density-matrix invariants.
    #[error("validation failed: {0}")]
    Validation(String),
    /// A criterion's precondition (dimension condition) does not hold; this
    /// is distinct from a non-detection.
    #[error("criterion not applicable: {0}")]
    CriterionInapplicable(String),
    /// An iterative numerical routine failed to deliver its accuracy.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

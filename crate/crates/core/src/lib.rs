//! # qmeas
//!
//! Finite-dimensional simulation of indirect quantum measurement processes.
//!
//! A measurement process couples a system in `H` to an ancilla (the apparatus)
//! in `K` through a unitary `U`, and the outcome is read off a meter observable
//! `M` on the ancilla. In the Heisenberg picture the meter evolves to
//! `M(T) = U†(I⊗M)U`, and the process induces a POVM on the system through
//! `Π(x) = ⟨ξ|E_{M(T)}(x)|ξ⟩`.
//!
//! The crate checks, algebraically and statistically:
//!
//! - probability reproducibility: the induced POVM is the PVM of a target
//!   observable, so the meter statistics equal the Born statistics;
//! - intersubjectivity: two observers that jointly run local, probability
//!   reproducible measurements of the same sharp observable always agree;
//! - the failure of intersubjectivity for unsharp (non-projective) POVMs;
//! - von Neumann's controlled-shift coupling and the perfect correlation
//!   ("observable entanglement") it produces between system and meter.
//!
//! ## Layout
//!
//! - [`linalg`]: dense complex matrices, states, Hermitian eigendecomposition
//!   with degeneracy merging, Schmidt decomposition, seeded randomness.
//! - [`observables`]: sharp observables, POVMs and Born statistics.
//! - [`measproc`]: measurement processes, induced POVMs, Naimark dilation.
//! - [`vonneumann`]: the entangling coupling and observable entanglement.
//! - [`intersub`]: two-observer scenarios and intersubjectivity checks.
//! - [`cli`]: the `qmeas` command-line front end and its JSON formats.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

#![forbid(unsafe_code)]

pub mod cli;
pub mod intersub;
pub mod linalg;
pub mod measproc;
pub mod observables;
pub mod vonneumann;

pub use intersub::{
    compose_joint_scenario, counterexample_uninformative_povm, verify_oit, CompositionOrder,
    IntersubjectivityReport, JointCounts, JointDistribution, JointScenario, OitConfig, OitSummary,
};
pub use linalg::{
    ComplexMatrix, SchmidtDecomposition, SpectralBranch, SpectralDecomposition, State,
};
pub use measproc::{naimark_dilation, MeasurementProcess, ReproducibilityReport};
pub use num_complex::Complex64;
pub use observables::{Observable, OutcomeDistribution, Povm};
pub use vonneumann::{
    build_vn_process, check_observable_entanglement, entangled_state, find_entangled_observables,
    verify_perfect_correlation, EntanglementConditions, EntanglementReport,
};

use thiserror::Error;

/// Eigenvalues closer than this are treated as one outcome.
pub const DEFAULT_MERGE_TOL: f64 = 1e-8;
/// Two outcome labels within this distance denote the same outcome.
pub const DEFAULT_LABEL_TOL: f64 = 1e-8;
/// Largest off-diagonal joint mass accepted as intersubjective agreement.
pub const DEFAULT_OIT_TOL: f64 = 1e-9;
/// Allowed deviation of a probability total from one.
pub const PROBABILITY_SUM_TOL: f64 = 1e-10;
/// Allowed deviation of a state's norm from one.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed deviation from unitarity (or isometry) in max-entry norm.
pub const UNITARY_TOL: f64 = 1e-10;
/// Upper bound on either dimension of any tensor product.
pub const MAX_PRODUCT_DIM: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("columns are not orthonormal (max deviation {0:.3e})")]
    NotIsometry(f64),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid spectral family: {0}")]
    InvalidSpectral(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("tensor product of size {rows}x{cols} exceeds the limit {limit}")]
    SizeLimit {
        rows: usize,
        cols: usize,
        limit: usize,
    },

    #[error("evolved meters do not commute (commutator norm {0:.3e}); the joint measurement is not local")]
    Locality(f64),

    #[error("numerical consistency violated: {0}")]
    NumericalConsistency(String),

    #[error("internal consistency violated: {0}")]
    InternalConsistency(String),
}

impl Error {
    /// `true` when the error is caused by the caller's input rather than by
    /// a numerical or internal failure.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NumericalConsistency(_) | Error::InternalConsistency(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

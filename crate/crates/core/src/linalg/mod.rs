//! Dense complex linear algebra kernel.

mod decompose;
mod matrix;
pub mod random;
mod spectral;
mod state;

pub use decompose::{complete_isometry_to_unitary, schmidt_decompose, SchmidtDecomposition};
pub use matrix::{tensor, ComplexMatrix};
pub use random::{derive_seed, random_hermitian, random_state, random_unitary, seeded_rng};
pub use spectral::{
    hermitian_eig, hermitian_eigenvalues, psd_sqrt, spectral_decomposition, SpectralBranch,
    SpectralDecomposition,
};
pub use state::State;

pub(crate) use spectral::inverse_sqrt;

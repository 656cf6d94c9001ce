//! Seeded randomness.
//!
//! Every random object is drawn from `ChaCha20Rng::seed_from_u64(seed)`, with
//! normal variates from `rand_distr::StandardNormal` (ziggurat). Both
//! algorithms are platform independent, so a seed replays bit for bit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::state::State;

pub type SeededRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Seed for the `index`-th independent stream derived from `seed`
/// (one SplitMix64 step).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian with `E|z|² = 2`.
fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<Complex64> {
    // Column-major fill order is part of the replay contract.
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Unitarily invariant random state drawn from an existing generator.
pub fn random_state_from(rng: &mut impl Rng, dim: usize) -> State {
    assert!(dim >= 1, "state dimension must be positive");
    loop {
        let v = DVector::from_fn(dim, |_, _| gaussian(rng));
        let norm = v.norm();
        if norm > 0.0 {
            return State::from_vector(v.unscale(norm)).expect("normalized by construction");
        }
    }
}

/// Normalized complex Gaussian vector; deterministic in `seed`.
pub fn random_state(dim: usize, seed: u64) -> State {
    random_state_from(&mut seeded_rng(seed), dim)
}

/// Gaussian-unitary-ensemble matrix `(G + G†)/2`, non-degenerate with
/// probability one.
pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    let g = ComplexMatrix::wrap(ginibre(&mut seeded_rng(seed), dim, dim));
    g.hermitian_part()
}

/// Haar-random unitary: Gram-Schmidt on the columns of a Ginibre matrix.
pub fn random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = seeded_rng(seed);
    loop {
        let g = ginibre(&mut rng, dim, dim);
        if let Some(q) = gram_schmidt_columns(&g) {
            return ComplexMatrix::wrap(q);
        }
    }
}

fn gram_schmidt_columns(g: &DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    let mut q = g.clone();
    for j in 0..q.ncols() {
        let mut v = q.column(j).into_owned();
        for _ in 0..2 {
            for k in 0..j {
                let qk = q.column(k);
                let overlap = qk.dotc(&v);
                v -= qk * overlap;
            }
        }
        let norm = v.norm();
        if norm < 1e-8 {
            return None;
        }
        q.set_column(j, &v.unscale(norm));
    }
    Some(q)
}

//! Spectral decomposition with degenerate eigenvalues, and the Schmidt form
//! of a bipartite state.
//!
//! Run with `cargo run --example spectral_and_schmidt`.

use qmeas::linalg::{random_state, random_unitary, schmidt_decompose, spectral_decomposition};
use qmeas::ComplexMatrix;

fn main() -> qmeas::Result<()> {
    // V diag(2, 2, -1) V†: a doubly degenerate eigenvalue hidden by a basis change.
    let v = random_unitary(3, 11);
    let a = &(&v * &ComplexMatrix::diagonal(&[2.0, 2.0, -1.0])) * &v.adjoint();
    let family = spectral_decomposition(&a)?;
    for b in family.branches() {
        println!(
            "eigenvalue {:+.6}  rank {:.0}",
            b.eigenvalue,
            b.projector.trace().re
        );
    }
    println!(
        "reconstruction error {:.2e}, projector invariants {:.2e}",
        family.reconstruct().distance(&a),
        family.max_invariant_violation()
    );

    let phi = random_state(6, 12);
    let s = schmidt_decompose(&phi, 2, 3)?;
    println!(
        "Schmidt coefficients of a random 2x3 state: {:?}",
        s.coefficients
    );
    println!(
        "rank {}, reconstruction error {:.2e}",
        s.rank(),
        (s.reconstruct() - phi.amplitudes()).norm()
    );
    Ok(())
}

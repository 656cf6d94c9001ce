//! Born statistics of a sharp observable and of a generalized one.
//!
//! Run with `cargo run --example born_and_povm`.

use qmeas::observables::povm_probabilities;
use qmeas::{ComplexMatrix, Observable, Povm, State};

fn main() -> qmeas::Result<()> {
    let psi = State::real(&[0.6, 0.8])?;

    let z = Observable::pauli_z();
    println!("Pauli Z on 0.6|0> + 0.8|1>:");
    for (x, p) in z.born_probabilities(&psi)?.entries() {
        println!("  P(Z = {x:+}) = {p:.4}");
    }

    let x = Observable::new(ComplexMatrix::pauli_x())?;
    println!("Pauli X on the same state:");
    for (label, p) in x.born_probabilities(&psi)?.entries() {
        println!("  P(X = {label:+}) = {p:.4}");
    }

    // Trine POVM: three unsharp effects (2/3)|φ_k⟩⟨φ_k| at 120° apart.
    let effects = (0..3)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            let (c, s) = (t.cos(), t.sin());
            ComplexMatrix::from_real(2, 2, &[c * c, c * s, c * s, s * s])
                .map(|m| m.scale(2.0 / 3.0))
        })
        .collect::<qmeas::Result<Vec<_>>>()?;
    let trine = Povm::from_effects(effects)?;
    println!(
        "trine POVM: resolution of identity {}, projective {}",
        trine.is_resolution_of_identity(1e-12),
        trine.is_projective(1e-12)
    );
    for (label, p) in povm_probabilities(&trine, &psi)?.entries() {
        println!("  P(trine = {label}) = {p:.4}");
    }
    Ok(())
}

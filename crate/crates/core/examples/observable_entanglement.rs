//! After the von Neumann coupling, system and meter are perfectly
//! correlated. The same check separates entangled from product states, and
//! the Schmidt bases of any state give a correlated pair of observables.
//!
//! Run with `cargo run --example observable_entanglement`.

use qmeas::linalg::random_state;
use qmeas::{
    build_vn_process, check_observable_entanglement, entangled_state, find_entangled_observables,
    Observable, State,
};

fn main() -> qmeas::Result<()> {
    let z = Observable::pauli_z();
    let psi = State::real(&[0.6, 0.8])?;
    let phi = entangled_state(&psi, &z)?;
    let amps: Vec<f64> = phi.amplitudes().iter().map(|c| c.re).collect();
    println!("coupled state amplitudes (real): {amps:?}");

    let meter = build_vn_process(&z)?.meter().clone();
    let rep = check_observable_entanglement(&z, &meter, &phi, 1e-9)?;
    println!("joint table {:?}", rep.joint);
    println!("conditions {:?}", rep.conditions);

    let product = State::basis(2, 0).tensor(&State::plus())?;
    let rep = check_observable_entanglement(&z, &z, &product, 1e-9)?;
    println!(
        "|0>|+> with (Z, Z): entangled {}, off-pairing mass {:.2}",
        rep.is_entangled, rep.off_pairing_mass
    );

    let generic = random_state(6, 3);
    let (a1, a2) = find_entangled_observables(&generic, 2, 3)?;
    let rep = check_observable_entanglement(&a1, &a2, &generic, 1e-9)?;
    println!(
        "random 2x3 state: found pair entangled {}, worst residual {:.2e}",
        rep.is_entangled, rep.max_violation
    );
    Ok(())
}

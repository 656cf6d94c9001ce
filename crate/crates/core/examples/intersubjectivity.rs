//! Two observers measure the same sharp observable with different
//! reproducible processes and always agree.
//!
//! Run with `cargo run --example intersubjectivity`.

use qmeas::intersub::joint_distribution;
use qmeas::{
    build_vn_process, compose_joint_scenario, naimark_dilation, verify_oit, Observable, State,
};

fn main() -> qmeas::Result<()> {
    let z = Observable::pauli_z();
    let first = build_vn_process(&z)?;
    let second = naimark_dilation(&z.pvm())?;
    let scenario = compose_joint_scenario(&first, &second)?;
    println!("meter commutator norm {:.2e}", scenario.commutator_norm());

    let psi = State::real(&[0.6, 0.8])?;
    let jd = joint_distribution(&scenario, &psi)?;
    println!("joint distribution on 0.6|0> + 0.8|1>:");
    for ((x, y), p) in jd.entries() {
        println!("  P({x:+}, {y:+}) = {p:.4}");
    }
    let report = jd.intersubjectivity(1e-9, 1e-8);
    println!(
        "off-diagonal mass {:.2e}, agree: {}",
        report.off_diagonal_mass, report.passes
    );

    for (name, a) in [
        ("Pauli Z", z),
        ("diag(1,2,3)", Observable::diagonal(&[1.0, 2.0, 3.0])?),
    ] {
        let s = verify_oit(&a, 100, 42, 1e-9)?;
        println!(
            "{name}: {} trials, max off-diagonal {:.2e}, max diagonal gap {:.2e}, passes {}",
            s.trials, s.max_off_diagonal_mass, s.max_diagonal_gap, s.passes
        );
    }
    Ok(())
}

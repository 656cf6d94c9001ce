//! Intersubjectivity fails for generalized observables: two coin-flip
//! apparatuses each reproduce the POVM `Π(0) = Π(1) = I/2`, yet disagree half
//! the time.
//!
//! Run with `cargo run --example povm_counterexample`.

use qmeas::counterexample_uninformative_povm;
use qmeas::intersub::joint_distribution;
use qmeas::linalg::random_state;
use qmeas::observables::povm_probabilities;

fn main() -> qmeas::Result<()> {
    let (povm, scenario) = counterexample_uninformative_povm();
    for (k, mp) in [scenario.process1(), scenario.process2()]
        .into_iter()
        .enumerate()
    {
        let err = mp
            .induced_povm()
            .max_effect_distance(&povm, 1e-8)
            .expect("same labels");
        println!("observer {}: induced POVM error {err:.2e}", k + 1);
    }

    let psi = random_state(2, 5);
    println!(
        "POVM statistics: {:?}",
        povm_probabilities(&povm, &psi)?.entries()
    );
    let jd = joint_distribution(&scenario, &psi)?;
    for ((x, y), p) in jd.entries() {
        println!("  P({x}, {y}) = {p:.4}");
    }
    let report = jd.intersubjectivity(1e-9, 1e-8);
    println!(
        "off-diagonal mass {:.4}: the observers disagree with probability one half",
        report.off_diagonal_mass
    );
    Ok(())
}

//! The von Neumann measurement process: a controlled shift copies the
//! eigenvalue of `A` into the apparatus, so the meter reproduces the Born
//! statistics of `A`. An uncoupled apparatus does not.
//!
//! Run with `cargo run --example von_neumann_measurement`.

use qmeas::linalg::random_state;
use qmeas::{build_vn_process, MeasurementProcess, Observable, State};

fn main() -> qmeas::Result<()> {
    let a = Observable::diagonal(&[1.0, 2.0, 3.0])?;
    let mp = build_vn_process(&a)?;
    println!(
        "system dim {}, ancilla dim {}, coupling unitarity error {:.2e}",
        mp.system_dim(),
        mp.ancilla_dim(),
        mp.coupling().unitarity_deviation()
    );

    let report = mp.reproducibility_report(&a, 1e-10, 1e-8)?;
    println!("induced POVM equals the PVM of A: {}", report.reproduces);
    for (x, gap) in &report.gaps {
        println!("  outcome {x}: Frobenius gap {gap:.2e}");
    }

    let psi = random_state(3, 1);
    let born = a.born_probabilities(&psi)?;
    let meter = mp.outcome_distribution(&psi)?;
    println!("Born vs meter on a random state:");
    for ((x, p), (_, q)) in born.entries().iter().zip(meter.entries()) {
        println!("  {x}: {p:.6} vs {q:.6}");
    }

    let idle = MeasurementProcess::uncoupled(3, State::basis(3, 0), a.clone())?;
    println!(
        "uncoupled apparatus reproduces A: {}",
        idle.check_probability_reproducibility(&a, 1e-10)
    );
    println!(
        "  it always reads {:?}",
        idle.outcome_distribution(&psi)?.entries()
    );
    Ok(())
}

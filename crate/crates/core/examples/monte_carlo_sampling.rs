//! Seeded sampling of joint outcomes, compared with the exact distribution.
//!
//! Run with `cargo run --release --example monte_carlo_sampling`.

use qmeas::intersub::{joint_distribution, sample_outcomes};
use qmeas::{build_vn_process, compose_joint_scenario, Observable, State};

fn main() -> qmeas::Result<()> {
    let z = Observable::pauli_z();
    let mp = build_vn_process(&z)?;
    let scenario = compose_joint_scenario(&mp, &mp)?;
    let psi = State::real(&[0.6, 0.8])?;

    let n = 100_000;
    let counts = sample_outcomes(&scenario, &psi, n, 8)?;
    let exact = joint_distribution(&scenario, &psi)?;
    println!("{n} draws, seed 8");
    for &((x, y), p) in exact.entries() {
        let f = counts.frequency(x, y, 0.0);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        let z_score = if se > 0.0 { (f - p) / se } else { 0.0 };
        println!("  ({x:+}, {y:+}): exact {p:.4}  observed {f:.4}  z {z_score:+.2}");
    }
    Ok(())
}

//! Any POVM is the induced POVM of some measurement process. Builds the
//! dilation of a random POVM and extracts it again.
//!
//! Run with `cargo run --example naimark_dilation`.

use qmeas::linalg::random_state;
use qmeas::observables::povm_probabilities;
use qmeas::{naimark_dilation, Povm};

fn main() -> qmeas::Result<()> {
    let p = Povm::random(3, 4, 2024)?;
    println!(
        "random POVM on C^3 with {} outcomes, projective: {}",
        p.len(),
        p.is_projective(1e-9)
    );

    let mp = naimark_dilation(&p)?;
    println!(
        "dilation: ancilla dim {}, coupling unitarity error {:.2e}",
        mp.ancilla_dim(),
        mp.coupling().unitarity_deviation()
    );

    let back = mp.induced_povm();
    let err = back.max_effect_distance(&p, 1e-8).expect("labels survive");
    println!("round-trip max effect error {err:.2e}");

    let psi = random_state(3, 7);
    let direct = povm_probabilities(&p, &psi)?;
    let meter = mp.outcome_distribution(&psi)?;
    println!(
        "statistics gap on a random state {:.2e}",
        direct.max_abs_gap(&meter, 1e-8)
    );
    Ok(())
}

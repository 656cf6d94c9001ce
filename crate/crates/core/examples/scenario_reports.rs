//! Drives the command-line front end from code: parses a scenario document
//! and prints the JSON report that `qmeas verify-oit --json` would emit.
//!
//! Run with `cargo run --example scenario_reports`.

use clap::Parser;
use qmeas::cli::{run, Cli};

fn main() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/pauli_z.json");
    let cli = Cli::parse_from(["qmeas", "verify-oit", "--input", fixture, "--trials", "20"]);
    match run(&cli) {
        Ok(report) => println!("{}", report.to_json()),
        Err(e) => eprintln!("{} error: {}", e.kind(), e.message()),
    }
}

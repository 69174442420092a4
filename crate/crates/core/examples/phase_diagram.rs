//! Ground-state phase diagram over (omega, B_x), written as CSV to stdout.
//!
//! Run with `cargo run --example phase_diagram > phase.csv`.

use ionspin::config::{grid, Spacing};
use ionspin::groundstate::phase_diagram;
use ionspin::{CrystalConfig, Result};

fn main() -> Result<()> {
    let config = CrystalConfig::ca_mn_ca();
    let omegas = grid(0.5, 3.0, 126, Spacing::Linear);
    let fields = grid(0.01, 5.0, 40, Spacing::Log);
    let observables: Vec<String> = ["fm3", "f1-f2+f3-a3", "f3", "a0"].iter().map(|s| s.to_string()).collect();
    let d = phase_diagram(&config, &omegas, &fields, &observables, 0.02)?;

    println!("omega,field,{}", d.observables.join(","));
    for (i, w) in d.omegas.iter().enumerate() {
        for (j, b) in d.fields.iter().enumerate() {
            let vals: Vec<String> = (0..d.observables.len()).map(|k| format!("{:.6}", d.value(i, j, k))).collect();
            println!("{w:.4},{b:.5},{}", vals.join(","));
        }
    }
    Ok(())
}

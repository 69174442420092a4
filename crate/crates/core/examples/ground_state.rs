//! Ground states of the Ca-Mn-Ca transverse Ising model in each coupling region,
//! plus the level crossings between the ferrimagnetic states.
//!
//! Run with `cargo run --example ground_state`.

use ionspin::groundstate::{ground_state_at, level_crossings, region_two_window};
use ionspin::{CrystalConfig, Result};

fn main() -> Result<()> {
    let config = CrystalConfig::ca_mn_ca();
    for omega in [0.6, 1.2, 1.3, 1.5, 2.0, 2.35] {
        let (c, report) = ground_state_at(&config, omega, 0.01, 0.02)?;
        let phase = report.phase.expect("three-site chain");
        println!(
            "omega = {omega:.2}: J = {:+.3}, J13 = {:+.3}, A = {:+.3} -> region {}, E0 = {:+.5}, degeneracy {}",
            c.pair(0, 1),
            c.pair(0, 2),
            c.anisotropy[0],
            phase.region,
            report.energies[0],
            report.ground_degeneracy
        );
        let pops: Vec<String> = report.populations.iter().map(|(n, p)| format!("{n}={p:.4}")).collect();
        println!("    {}", pops.join(" "));
    }

    let (lo, hi) = region_two_window(&config)?;
    println!("\nlevel crossings for omega in [{lo:.3}, {hi:.3}]:");
    for c in level_crossings(&config, lo, hi, 400)? {
        println!("  {:>6}: omega = {:.4}", c.kind.name(), c.omega);
    }
    Ok(())
}

//! Equilibrium positions and axial/radial normal modes of mixed-species chains.
//!
//! Run with `cargo run --example normal_modes`.

use ionspin::crystal::linear_regime_check;
use ionspin::modes::ChainModes;
use ionspin::{CrystalConfig, Result, TrapParams};

fn show(label: &str, config: &CrystalConfig) -> Result<()> {
    println!("== {label} (mass ratios {:?})", config.mass_ratios());
    let u = config.equilibrium_positions()?;
    println!("positions: {}", u.iter().map(|x| format!("{x:+.5}")).collect::<Vec<_>>().join(" "));
    let modes = ChainModes::compute(config)?;
    for (name, m) in [("axial", &modes.axial), ("radial", &modes.radial_x)] {
        println!("{name} modes:");
        for (n, w) in m.frequencies().iter().enumerate() {
            let b: Vec<String> = (0..config.len()).map(|i| format!("{:+.4}", m.vector_entry(i, n))).collect();
            println!("  {n}: omega/omega_z = {w:.6}  b = [{}]", b.join(", "));
        }
    }
    let check = linear_regime_check(config)?;
    println!("linear chain stable: {} (min radial eigenvalue {:.4})\n", check.stable, check.min_radial_eigenvalue);
    Ok(())
}

fn main() -> Result<()> {
    show("Ca Ca Ca", &CrystalConfig::from_names(&["Ca", "Ca", "Ca"], TrapParams::new(1.0, 0.1)?)?)?;
    show("Ca Mn Ca", &CrystalConfig::ca_mn_ca())?;
    show("Ca Mn Ca Mn Ca", &CrystalConfig::ca_mn_ca_mn_ca())?;
    // a softer radial trap pushes the chain towards the zigzag transition
    show("Ca Mn Ca, alpha = 0.55", &CrystalConfig::from_names(&["Ca", "Mn", "Ca"], TrapParams::new(1.0, 0.55)?)?)?;
    Ok(())
}

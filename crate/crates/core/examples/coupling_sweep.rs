//! Effective couplings J, J13 and A of the Ca-Mn-Ca chain versus drive frequency.
//!
//! Run with `cargo run --example coupling_sweep`.

use ionspin::couplings::{coupling_sweep, epsilon_scale, DEFAULT_GUARD_BAND};
use ionspin::groundstate::{classify_phase, region_boundaries};
use ionspin::{CrystalConfig, FieldDrive, ModeData, Result, Species, TrapParams};

fn main() -> Result<()> {
    let config = CrystalConfig::ca_mn_ca();
    let modes = ModeData::axial(&config)?;
    println!("axial modes: {:?}", modes.frequencies());

    let grid: Vec<f64> = (0..=60).map(|k| 0.4 + 0.04 * f64::from(k)).collect();
    println!("{:>7} {:>10} {:>10} {:>10}  region", "omega", "J", "J13", "A");
    for p in coupling_sweep(&modes, &config, 1.0, &grid, DEFAULT_GUARD_BAND) {
        match p.couplings {
            Some(c) => {
                let region = classify_phase(&c)?.region;
                println!("{:7.3} {:10.4} {:10.4} {:10.4}  {region}", p.frequency, c.pair(0, 1), c.pair(0, 2), c.anisotropy[0]);
            }
            None => println!("{:7.3}   (inside guard band)", p.frequency),
        }
    }

    println!("\nsign changes of the couplings:");
    for (name, w) in region_boundaries(&config, 0.4, 3.0, 1000)? {
        println!("  {name:>4} = 0 at omega = {w:.4}");
    }

    // the energy scale for a Ca/Mn chain at 2pi x 100 kHz in a 20 T/m gradient
    let si = CrystalConfig::new(
        vec![Species::calcium40(), Species::manganese50(), Species::calcium40()],
        TrapParams::new(std::f64::consts::TAU * 1e5, 0.1)?,
    )?;
    let eps = epsilon_scale(&si, &FieldDrive::axial(20.0, 1.8)?);
    println!("\nepsilon = {eps:.4e} rad/s = 2pi x {:.1} Hz", eps / std::f64::consts::TAU);
    Ok(())
}

//! Gradients along all three axes: radial couplings at a detuning from the
//! radial modes combined with the axial ones into an XYZ-type Hamiltonian.
//!
//! Run with `cargo run --example xyz_model`.

use ionspin::couplings::coupling_set_guarded;
use ionspin::groundstate::{analyze, ConfigSet};
use ionspin::hamiltonian::build_xyz;
use ionspin::modes::ChainModes;
use ionspin::{Axis, CrystalConfig, FieldDrive, Result, SpinBasis};

fn main() -> Result<()> {
    let config = CrystalConfig::ca_mn_ca();
    let modes = ChainModes::compute(&config)?;
    println!("radial modes: {:?}", modes.radial_x.frequencies());

    let z = coupling_set_guarded(&modes.axial, &config, &FieldDrive::axial(20.0, 2.0)?, 0.02)?;
    let detuning = modes.radial_x.frequencies()[0] - 0.5;
    let x = coupling_set_guarded(&modes.radial_x, &config, &FieldDrive::new(20.0, detuning, Axis::X)?, 0.02)?;
    let y = coupling_set_guarded(&modes.radial_y, &config, &FieldDrive::new(10.0, detuning, Axis::Y)?, 0.02)?;
    for set in [&x, &y, &z] {
        println!(
            "{}: J = {:+.4}, J13 = {:+.4}, A = {:+.4} (epsilon = {:.3e} rad/s)",
            set.axis,
            set.pair(0, 1),
            set.pair(0, 2),
            set.anisotropy[0],
            set.epsilon
        );
    }

    let basis = SpinBasis::new(config.spins())?;
    let h = build_xyz([&x, &y, &z], &basis)?;
    let report = analyze(&h, None)?;
    println!("E0 = {:.5} (units of the axial epsilon), degeneracy {}", report.energies[0], report.ground_degeneracy);
    let sets = ConfigSet::standard(&basis);
    for (set, (_, p)) in sets.iter().zip(&report.populations) {
        println!("  P_{} = {p:.4}", set.name);
    }
    Ok(())
}

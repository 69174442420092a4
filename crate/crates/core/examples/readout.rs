//! Static-gradient readout: displacement of the indicator ion, its resonance
//! shift, which spin configurations it can tell apart, and a heralded
//! projection of a ground state.
//!
//! Run with `cargo run --example readout`.

use std::f64::consts::TAU;

use ionspin::groundstate::ground_state_at;
use ionspin::hamiltonian::parse_configuration;
use ionspin::readout::{distinguishability, readout_sequence, shift_report, ReadoutSetup};
use ionspin::{CrystalConfig, Result, Species, SpinBasis};

fn main() -> Result<()> {
    let chain = vec![Species::calcium40(), Species::manganese50(), Species::calcium40()];
    let setup = ReadoutSetup::new(20.0, TAU * 1e5, chain, 0)?;
    for label in ["up,3,up", "up,-3,up", "down,0,up"] {
        let r = shift_report(&setup, &parse_configuration(label)?)?;
        println!(
            "{label:>10}: d_z = {:+7.2} nm, delta omega = {:.4e} rad/s ({:.2} kHz)",
            r.displacements[0] * 1e9,
            r.splittings[0],
            r.splittings_hz()[0] / 1e3
        );
    }

    let four = vec![Species::calcium40(), Species::manganese50(), Species::manganese50(), Species::calcium40()];
    let setup4 = ReadoutSetup::new(20.0, TAU * 1e5, four, 0)?;
    let labels = ["up,2,-2,up", "up,-2,2,up", "up,3,3,up"];
    let configs = labels.iter().map(|l| parse_configuration(l)).collect::<Result<Vec<_>>>()?;
    for (k, class) in distinguishability(&setup4, &configs)?.iter().enumerate() {
        println!("class {k}: {:?}", class.iter().map(|&i| labels[i]).collect::<Vec<_>>());
    }

    let config = CrystalConfig::ca_mn_ca();
    let basis = SpinBasis::new(config.spins())?;
    let (_, report) = ground_state_at(&config, 1.45, 0.05, 0.02)?;
    let state = report.manifold.states.column(0).into_owned();
    let herald = readout_sequence(&basis, &state, 1, -3.0)?;
    println!("herald probability for m = -3 in the omega = 1.45 ground state: {:.4}", herald.probability);
    Ok(())
}

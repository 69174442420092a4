//! Adiabatic preparation: start in the x-polarised state at large transverse
//! field, ramp the couplings on and the field down, and compare the final
//! state with the ground state.
//!
//! Run with `cargo run --example adiabatic_ramp`.

use ionspin::dynamics::{adiabatic_ramp, RampSchedule};
use ionspin::groundstate::axial_couplings;
use ionspin::hamiltonian::build_effective_z;
use ionspin::readout::prepare_initial_state;
use ionspin::{CrystalConfig, ModeData, Result, SpinBasis};

fn main() -> Result<()> {
    let config = CrystalConfig::ca_mn_ca();
    let basis = SpinBasis::new(config.spins())?;
    let start = prepare_initial_state(&basis)?;
    let modes = ModeData::axial(&config)?;
    for omega in [2.0, 1.3, 0.6] {
        let hz = build_effective_z(&axial_couplings(&config, &modes, omega, 0.02)?, &basis)?;
        println!("omega = {omega}:");
        for t in [0.0, 5.0, 20.0, 80.0, 320.0] {
            let r = adiabatic_ramp(&hz, &start, &RampSchedule::new(t, 5.0, 0.01)?)?;
            println!(
                "  T = {t:>5} / epsilon: fidelity {:.6}, min gap {:.3e}{}",
                r.fidelity,
                r.min_gap,
                if r.crossing_warning { "  (passes a level crossing)" } else { "" }
            );
        }
    }
    Ok(())
}

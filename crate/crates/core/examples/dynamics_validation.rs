//! Two spins sharing one mode: full spin-phonon evolution against the
//! averaged spin-spin model over one coupling period.
//!
//! Run with `cargo run --release --example dynamics_validation`.

use ionspin::dynamics::{compare_effective, two_spin_phase, two_spin_scenario, x_polarized_state};
use ionspin::Result;

fn main() -> Result<()> {
    let drive = 0.3;
    let base = two_spin_scenario(drive, 0.02, 4)?;
    let psi = x_polarized_state(&base.basis);
    let period = base.coupling_period()?;
    println!("J12 = {:.4e} omega_z, period = {period:.1} / omega_z, {} steps", base.pair_coupling()?, base.steps_for(period));

    for scale in [1.0, 0.5, 0.25] {
        let s = base.scaled(scale);
        let c = compare_effective(&s, &psi, period, 40)?;
        println!(
            "Omega/|omega - omega_n| = {:.4}: max correlator deviation {:.3e}, norm error {:.1e}, top Fock population {:.1e}",
            s.rabi_ratio(),
            c.correlator_deviation,
            c.max_norm_error,
            c.max_top_population
        );
    }
    let phase = two_spin_phase(&base, period, 200)?;
    println!("two-spin phase {phase:.5} vs 2 J12 t = {:.5}", 2.0 * base.pair_coupling()? * period);
    Ok(())
}

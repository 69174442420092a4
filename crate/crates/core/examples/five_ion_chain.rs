//! The alternating {1/2, 3, 1/2, 3, 1/2} chain: couplings at omega = 1.8 and
//! the ferrimagnetic ground state as the transverse field is lowered.
//!
//! Run with `cargo run --example five_ion_chain`.

use ionspin::groundstate::{axial_couplings, ground_state_at, populations, ConfigSet};
use ionspin::{CrystalConfig, ModeData, Result, SpinBasis};

fn main() -> Result<()> {
    let config = CrystalConfig::ca_mn_ca_mn_ca();
    let modes = ModeData::axial(&config)?;
    let c = axial_couplings(&config, &modes, 1.8, 0.02)?;
    println!("nearest-neighbour couplings: {:?}", (0..4).map(|i| c.pair(i, i + 1)).collect::<Vec<_>>());
    println!("anisotropies: {:?}", c.anisotropy);

    let basis = SpinBasis::new(config.spins())?;
    // heavy spins at -3 and -2 in either order, light spins up, and the flip
    let mixed = ConfigSet::new(
        "f32",
        vec![vec![1, -6, 1, -4, 1], vec![1, -4, 1, -6, 1], vec![-1, 6, -1, 4, -1], vec![-1, 4, -1, 6, -1]],
    );
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "B_x", "P_f3", "P_f2", "mixed", "region");
    for b in [0.0, 0.001, 0.003, 0.01, 0.03, 0.1] {
        let (_, r) = ground_state_at(&config, 1.8, b, 0.02)?;
        let p = populations(&r.manifold, &basis, &[ConfigSet::ferrimagnetic(&basis, 3), ConfigSet::ferrimagnetic(&basis, 2), mixed.clone()])?;
        let region = r.phase.map(|p| format!("{} (heuristic)", p.region)).unwrap_or_default();
        println!("{b:8.3} {:10.5} {:10.5} {:10.5} {region:>10}", p[0], p[1], p[2]);
    }
    Ok(())
}

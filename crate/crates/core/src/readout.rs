//! Static-gradient (Stern-Gerlach type) readout.
//!
//! A static gradient `b` along z pushes every ion by a force proportional to
//! its spin projection. The indicator ion is displaced by the sum of the
//! forces acting on the other ions divided by the common axial spring
//! constant `m_ref ω_z²`, and its resonance shifts by `g μ_B b |d_z| / ħ`.

use num_complex::Complex64;

use crate::constants::{ATOMIC_MASS_UNIT, BOHR_MAGNETON, HBAR};
use crate::crystal::{CrystalConfig, Species};
use crate::hamiltonian::{y_rotation, SpinBasis};
use crate::linalg::{kron_all, CVector};
use crate::{Error, Result};

/// Relative tolerance for grouping configurations by probe shift.
pub const CLASS_TOLERANCE: f64 = 1e-12;

/// SI description of the readout stage.
#[derive(Clone, Debug)]
pub struct ReadoutSetup {
    /// Static gradient, T/m.
    pub gradient: f64,
    /// Axial angular frequency of the reference species, rad/s.
    pub omega_z: f64,
    pub species: Vec<Species>,
    /// Index of the indicator ion.
    pub probe: usize,
}

impl ReadoutSetup {
    pub fn new(gradient: f64, omega_z: f64, species: Vec<Species>, probe: usize) -> Result<Self> {
        if !(gradient.is_finite() && gradient >= 0.0) {
            return Err(Error::invalid("gradient", format!("{gradient} must be non-negative")));
        }
        if !(omega_z.is_finite() && omega_z > 0.0) {
            return Err(Error::invalid("omega_z", format!("{omega_z} must be positive")));
        }
        match species.get(probe) {
            None => return Err(Error::invalid("probe", format!("site {probe} outside a {}-ion chain", species.len()))),
            Some(s) if !s.spin.is_half() => {
                return Err(Error::invalid("probe", format!("site {probe} ({}) is not spin-1/2", s.name)))
            }
            Some(_) => {}
        }
        Ok(ReadoutSetup {
            gradient,
            omega_z,
            species,
            probe,
        })
    }

    /// Setup for a crystal whose trap frequency is given in rad/s.
    pub fn for_crystal(config: &CrystalConfig, gradient: f64, probe: usize) -> Result<Self> {
        Self::new(gradient, config.trap.omega_z, config.species.clone(), probe)
    }

    /// Axial spring constant `m ω²`, identical for every ion, kg/s².
    pub fn spring_constant(&self) -> f64 {
        let m_ref = self
            .species
            .iter()
            .map(|s| s.mass)
            .fold(f64::INFINITY, f64::min);
        m_ref * ATOMIC_MASS_UNIT * self.omega_z * self.omega_z
    }

    /// Force on each ion, N, for projections given as `2m`.
    pub fn forces(&self, twice_m: &[i32]) -> Result<Vec<f64>> {
        if twice_m.len() != self.species.len() {
            return Err(Error::invalid(
                "configuration",
                format!("{} projections for {} ions", twice_m.len(), self.species.len()),
            ));
        }
        self.species
            .iter()
            .zip(twice_m)
            .map(|(s, &tm)| {
                if s.spin.index_of(tm).is_none() {
                    return Err(Error::invalid("configuration", format!("2m = {tm} not allowed for {}", s.name)));
                }
                Ok(s.g_factor * BOHR_MAGNETON * self.gradient * 0.5 * f64::from(tm))
            })
            .collect()
    }
}

/// Shifts for one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftReport {
    /// Displacement of each ion from the forces on all other ions, m.
    pub displacements: Vec<f64>,
    /// Resonance shift `g μ_B b |d_z| / ħ` of each ion, rad/s.
    pub splittings: Vec<f64>,
}

impl ShiftReport {
    /// Splittings in Hz (`δω / 2π`).
    pub fn splittings_hz(&self) -> Vec<f64> {
        self.splittings.iter().map(|w| w / std::f64::consts::TAU).collect()
    }
}

/// Displacement of every ion; entry `setup.probe` is the readout signal.
pub fn spin_dependent_shift(setup: &ReadoutSetup, twice_m: &[i32]) -> Result<Vec<f64>> {
    let forces = setup.forces(twice_m)?;
    let total: f64 = forces.iter().sum();
    let k = setup.spring_constant();
    Ok(forces.iter().map(|f| (total - f) / k).collect())
}

/// `δω = g μ_B b |d_z| / ħ` in rad/s for the ion at `site`.
pub fn zeeman_splitting(setup: &ReadoutSetup, site: usize, displacement: f64) -> f64 {
    setup.species[site].g_factor * BOHR_MAGNETON * setup.gradient * displacement.abs() / HBAR
}

pub fn shift_report(setup: &ReadoutSetup, twice_m: &[i32]) -> Result<ShiftReport> {
    let displacements = spin_dependent_shift(setup, twice_m)?;
    let splittings = displacements
        .iter()
        .enumerate()
        .map(|(i, &d)| zeeman_splitting(setup, i, d))
        .collect();
    Ok(ShiftReport {
        displacements,
        splittings,
    })
}

/// Partition configurations into classes of equal probe displacement.
/// Classes are listed in order of first appearance and hold input indices.
pub fn distinguishability(setup: &ReadoutSetup, configurations: &[Vec<i32>]) -> Result<Vec<Vec<usize>>> {
    let shifts = configurations
        .iter()
        .map(|c| Ok(spin_dependent_shift(setup, c)?[setup.probe]))
        .collect::<Result<Vec<f64>>>()?;
    let mut classes: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &d) in shifts.iter().enumerate() {
        let same = |r: f64| (r - d).abs() <= CLASS_TOLERANCE * r.abs().max(d.abs());
        match classes.iter_mut().find(|(r, _)| same(*r)) {
            Some((_, members)) => members.push(i),
            None => classes.push((d, vec![i])),
        }
    }
    Ok(classes.into_iter().map(|(_, m)| m).collect())
}

fn require_light_heavy_light(basis: &SpinBasis) -> Result<()> {
    if basis.n_sites() != 3 || basis.light_sites() != [0, 2] || basis.heavy_sites() != [1] {
        return Err(Error::CrystalShape("preparation needs a {spin-1/2, spin>1/2, spin-1/2} basis".into()));
    }
    Ok(())
}

fn rotated_lowest_weight(basis: &SpinBasis, angle: f64) -> CVector {
    let factors: Vec<_> = basis.spins().iter().map(|&s| y_rotation(s, angle)).collect();
    let u = kron_all(&factors);
    let mut start = CVector::zeros(basis.dim());
    let lowest: Vec<i32> = basis.spins().iter().map(|s| -(s.twice() as i32)).collect();
    start[basis.index_of(&lowest).expect("lowest-weight state exists")] = Complex64::new(1.0, 0.0);
    u * start
}

/// Start state for the adiabatic ramp: every spin rotated from its lowest
/// weight state into the `+x` extremal state, i.e. the ground state of
/// `−B Σ S_x` for `B > 0`.
pub fn prepare_initial_state(basis: &SpinBasis) -> Result<CVector> {
    require_light_heavy_light(basis)?;
    Ok(rotated_lowest_weight(basis, -std::f64::consts::FRAC_PI_2))
}

/// The rotation sequence `e^{−iπ/4 σ_y} e^{−iπ/2 S_y}` applied literally to
/// the lowest weight state. It lands in the `−x` extremal state, the ground
/// state of `−B Σ S_x` for `B < 0`.
pub fn literal_rotation_state(basis: &SpinBasis) -> Result<CVector> {
    require_light_heavy_light(basis)?;
    Ok(rotated_lowest_weight(basis, std::f64::consts::FRAC_PI_2))
}

/// Outcome of the heralded projective readout of one site.
#[derive(Clone, Debug)]
pub struct Herald {
    /// Probability of the heralding event.
    pub probability: f64,
    /// Projected, renormalised state; `None` when the probability vanishes.
    pub post_state: Option<CVector>,
}

/// Project `state` onto `m = target_m` at `site`.
pub fn readout_sequence(basis: &SpinBasis, state: &CVector, site: usize, target_m: f64) -> Result<Herald> {
    if state.len() != basis.dim() {
        return Err(Error::BasisMismatch(format!("state length {} vs basis {}", state.len(), basis.dim())));
    }
    let spin = *basis
        .spins()
        .get(site)
        .ok_or_else(|| Error::invalid("site", format!("{site} outside a {}-site basis", basis.n_sites())))?;
    let twice = 2.0 * target_m;
    if (twice - twice.round()).abs() > 1e-12 || spin.index_of(twice.round() as i32).is_none() {
        return Err(Error::invalid("target_m", format!("{target_m} outside [-{0}, {0}]", spin.value())));
    }
    let twice = twice.round() as i32;
    let mut projected = state.clone();
    for (i, amp) in projected.iter_mut().enumerate() {
        if basis.configuration(i)[site] != twice {
            *amp = Complex64::new(0.0, 0.0);
        }
    }
    let probability = projected.norm_squared() / state.norm_squared();
    let post_state = (probability > 0.0).then(|| {
        let n = projected.norm();
        projected / Complex64::new(n, 0.0)
    });
    Ok(Herald {
        probability,
        post_state,
    })
}

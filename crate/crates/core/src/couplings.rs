//! Phonon-mediated spin-spin couplings and single-ion anisotropy.
//!
//! Eliminating the modes driven off-resonantly by an oscillating gradient
//! gives, for every pair of sites, a coupling proportional to the mode sum
//!
//! ```text
//! K_ij = Σ_n b_{i,n} b_{j,n} ω_z² / (ω² − ω_n²)
//! ```
//!
//! In units of `ε = (Δz ∂_z ω₀)² / (2 ω_z)` and for `μ_i = m_i/m`:
//!
//! | term                    | value / ε          |
//! |-------------------------|--------------------|
//! | σ_j σ_j' (light pairs)  | `K / 2`            |
//! | S_k S_k' (heavy pairs)  | `2 K / μ`          |
//! | σ_j S_k (mixed pairs)   | `K / √μ`           |
//! | (S_k)² (anisotropy)     | `K_kk / μ`         |
//!
//! Species with g-factors different from the reference pick up a factor
//! `g_i g_j / g_ref²`. Radial drives use the same path with the detuning δ in
//! place of ω and the radial modes in place of the axial ones.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::constants::{ATOMIC_MASS_UNIT, BOHR_MAGNETON, HBAR};
use crate::crystal::CrystalConfig;
use crate::modes::ModeData;
pub use crate::modes::Axis;
use crate::{Error, Result};

/// Default half-width of the excluded band around each mode, in units of ω_z.
pub const DEFAULT_GUARD_BAND: f64 = 0.02;

/// An oscillating gradient drive along one axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldDrive {
    /// Gradient amplitude, T/m.
    pub gradient: f64,
    /// ω/ω_z for the axial drive, δ/ω_z (sideband detuning) for radial drives.
    pub frequency: f64,
    pub axis: Axis,
}

impl FieldDrive {
    pub fn new(gradient: f64, frequency: f64, axis: Axis) -> Result<Self> {
        if !(gradient.is_finite() && gradient >= 0.0) {
            return Err(Error::invalid("gradient", format!("{gradient} must be non-negative")));
        }
        if !(frequency.is_finite() && frequency > 0.0) {
            return Err(Error::invalid("frequency", format!("{frequency} must be positive")));
        }
        Ok(FieldDrive {
            gradient,
            frequency,
            axis,
        })
    }

    pub fn axial(gradient: f64, frequency: f64) -> Result<Self> {
        Self::new(gradient, frequency, Axis::Z)
    }
}

/// The coupling scale ε in rad/s:
/// `ε = γ² B² / (4 ħ m ω_z²)` with `γ = μ_B g` of the reference species.
pub fn epsilon_scale(config: &CrystalConfig, drive: &FieldDrive) -> f64 {
    let reference = config.reference();
    let gamma = BOHR_MAGNETON * reference.g_factor;
    let mass = reference.mass * ATOMIC_MASS_UNIT;
    let wz = config.trap.omega_z;
    let b = drive.gradient;
    gamma * gamma * b * b / (4.0 * HBAR * mass * wz * wz)
}

/// Result of checking a drive frequency against the mode spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuardVerdict {
    pub pass: bool,
    pub nearest_mode: usize,
    /// `|ω − ω_n|` for the nearest mode, in units of ω_z.
    pub distance: f64,
}

/// Fails iff `min_n |ω − ω_n| < guard_band` (all in units of ω_z).
pub fn resonance_guard(drive_frequency: f64, modes: &ModeData, guard_band: f64) -> GuardVerdict {
    let (nearest_mode, distance) = modes
        .frequencies()
        .iter()
        .map(|f| (drive_frequency - f).abs())
        .enumerate()
        .fold((0, f64::INFINITY), |best, (n, d)| if d < best.1 { (n, d) } else { best });
    GuardVerdict {
        pass: distance.is_nan() || distance >= guard_band,
        nearest_mode,
        distance,
    }
}

/// Couplings along one axis, in units of `epsilon`.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSet {
    pub axis: Axis,
    /// Drive frequency (or detuning) the set was evaluated at, units of ω_z.
    pub drive_frequency: f64,
    /// Chain indices of the spin-1/2 sites.
    pub light_sites: Vec<usize>,
    /// Chain indices of the spin > 1/2 sites.
    pub heavy_sites: Vec<usize>,
    /// σσ couplings, symmetric, zero diagonal.
    pub j_light: DMatrix<f64>,
    /// SS couplings, symmetric, zero diagonal.
    pub j_heavy: DMatrix<f64>,
    /// σS couplings, rows light, columns heavy.
    pub j_mixed: DMatrix<f64>,
    /// Single-ion anisotropy per heavy site.
    pub anisotropy: Vec<f64>,
    /// ε in rad/s for the drive that produced this set.
    pub epsilon: f64,
}

impl CouplingSet {
    /// An all-zero set with the given site layout.
    pub fn zeros(axis: Axis, light_sites: Vec<usize>, heavy_sites: Vec<usize>) -> Self {
        let (nl, nh) = (light_sites.len(), heavy_sites.len());
        CouplingSet {
            axis,
            drive_frequency: f64::NAN,
            light_sites,
            heavy_sites,
            j_light: DMatrix::zeros(nl, nl),
            j_heavy: DMatrix::zeros(nh, nh),
            j_mixed: DMatrix::zeros(nl, nh),
            anisotropy: vec![0.0; nh],
            epsilon: 0.0,
        }
    }

    /// Zero set laid out for a crystal.
    pub fn zeros_for(config: &CrystalConfig, axis: Axis) -> Self {
        Self::zeros(axis, config.light_sites(), config.heavy_sites())
    }

    /// The {light, heavy, light} parametrisation used for three-ion chains:
    /// `J = J12 = J23`, `J13`, and `A`.
    pub fn three_site(j: f64, j13: f64, a: f64) -> Self {
        let mut set = Self::zeros(Axis::Z, vec![0, 2], vec![1]);
        set.j_light[(0, 1)] = j13;
        set.j_light[(1, 0)] = j13;
        set.j_mixed[(0, 0)] = j;
        set.j_mixed[(1, 0)] = j;
        set.anisotropy[0] = a;
        set
    }

    pub fn n_sites(&self) -> usize {
        self.light_sites.len() + self.heavy_sites.len()
    }

    /// Coupling between chain sites `i ≠ j` in the operator convention of the
    /// Hamiltonian (σ for spin-1/2, S otherwise).
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        let light = |s| self.light_sites.iter().position(|&x| x == s);
        let heavy = |s| self.heavy_sites.iter().position(|&x| x == s);
        match (light(i), light(j), heavy(i), heavy(j)) {
            (Some(a), Some(b), _, _) => self.j_light[(a, b)],
            (_, _, Some(a), Some(b)) => self.j_heavy[(a, b)],
            (Some(a), _, _, Some(b)) | (_, Some(a), Some(b), _) => self.j_mixed[(a, b)],
            _ => panic!("sites {i}, {j} not in coupling set"),
        }
    }

    /// Anisotropy of chain site `k` (zero for spin-1/2 sites).
    pub fn anisotropy_at(&self, k: usize) -> f64 {
        self.heavy_sites
            .iter()
            .position(|&x| x == k)
            .map_or(0.0, |h| self.anisotropy[h])
    }

    /// Multiply every coupling by `factor` (keeps `epsilon`).
    pub fn scaled(&self, factor: f64) -> Self {
        CouplingSet {
            j_light: &self.j_light * factor,
            j_heavy: &self.j_heavy * factor,
            j_mixed: &self.j_mixed * factor,
            anisotropy: self.anisotropy.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.j_light.iter().all(|x| x.is_finite())
            && self.j_heavy.iter().all(|x| x.is_finite())
            && self.j_mixed.iter().all(|x| x.is_finite())
            && self.anisotropy.iter().all(|x| x.is_finite())
    }
}

/// Mode sum `K_ij = Σ_n b_in b_jn / (w² − w_n²)` with frequencies in ω_z units.
pub fn mode_sum(modes: &ModeData, frequency: f64, i: usize, j: usize) -> f64 {
    let w2 = frequency * frequency;
    modes
        .frequencies()
        .iter()
        .enumerate()
        .map(|(n, wn)| modes.vector_entry(i, n) * modes.vector_entry(j, n) / (w2 - wn * wn))
        .sum()
}

/// Couplings with the default guard band.
pub fn coupling_set(modes: &ModeData, config: &CrystalConfig, drive: &FieldDrive) -> Result<CouplingSet> {
    coupling_set_guarded(modes, config, drive, DEFAULT_GUARD_BAND)
}

pub fn coupling_set_guarded(
    modes: &ModeData,
    config: &CrystalConfig,
    drive: &FieldDrive,
    guard_band: f64,
) -> Result<CouplingSet> {
    if modes.axis != drive.axis {
        return Err(Error::AxisMismatch {
            expected: drive.axis.as_char(),
            found: modes.axis.as_char(),
        });
    }
    if modes.len() != config.len() {
        return Err(Error::invalid("modes", "mode count does not match the crystal"));
    }
    let verdict = resonance_guard(drive.frequency, modes, guard_band);
    if !verdict.pass {
        return Err(Error::GuardedResonance {
            axis: modes.axis.as_char(),
            mode: verdict.nearest_mode,
            drive: drive.frequency,
            mode_frequency: modes.frequencies()[verdict.nearest_mode],
        });
    }

    let mu = config.mass_ratios();
    let g_ref = config.reference().g_factor;
    let g = |i: usize| config.species[i].g_factor / g_ref;
    let sqrt_mass = |i: usize, j: usize| if mu[i] == mu[j] { mu[i] } else { (mu[i] * mu[j]).sqrt() };
    let k = |i, j| mode_sum(modes, drive.frequency, i, j);

    let mut set = CouplingSet::zeros_for(config, drive.axis);
    set.drive_frequency = drive.frequency;
    set.epsilon = epsilon_scale(config, drive);

    let light = set.light_sites.clone();
    let heavy = set.heavy_sites.clone();
    for (a, &i) in light.iter().enumerate() {
        for (b, &j) in light.iter().enumerate().skip(a + 1) {
            let v = 0.5 * g(i) * g(j) * k(i, j) / sqrt_mass(i, j);
            set.j_light[(a, b)] = v;
            set.j_light[(b, a)] = v;
        }
        for (b, &j) in heavy.iter().enumerate() {
            set.j_mixed[(a, b)] = g(i) * g(j) * k(i, j) / sqrt_mass(i, j);
        }
    }
    for (a, &i) in heavy.iter().enumerate() {
        for (b, &j) in heavy.iter().enumerate().skip(a + 1) {
            let v = 2.0 * g(i) * g(j) * k(i, j) / sqrt_mass(i, j);
            set.j_heavy[(a, b)] = v;
            set.j_heavy[(b, a)] = v;
        }
        set.anisotropy[a] = g(i) * g(i) * k(i, i) / mu[i];
    }
    Ok(set)
}

/// Rabi frequencies Ω_{j,n} = b_{j,n} Δz_n(m_j) B γ_j / (2ħ) in rad/s, with
/// `Δz_n(m_j) = √(ħ / 2 m_j ω_n)` using the ion's own mass. Rows are ions,
/// columns modes.
pub fn rabi_frequencies(modes: &ModeData, config: &CrystalConfig, gradient: f64) -> DMatrix<f64> {
    let wz = config.trap.omega_z;
    let freqs = modes.frequencies();
    DMatrix::from_fn(config.len(), modes.len(), |j, n| {
        let species = &config.species[j];
        let mass = species.mass * ATOMIC_MASS_UNIT;
        let spread = (HBAR / (2.0 * mass * freqs[n] * wz)).sqrt();
        let gamma = BOHR_MAGNETON * species.g_factor;
        modes.vector_entry(j, n) * spread * gradient * gamma / (2.0 * HBAR)
    })
}

/// One point of a frequency sweep. `couplings` is `None` for guarded points.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub frequency: f64,
    pub couplings: Option<CouplingSet>,
}

/// Evaluate couplings over a frequency grid in parallel; output follows the
/// grid order and guarded points become gaps.
pub fn coupling_sweep(
    modes: &ModeData,
    config: &CrystalConfig,
    gradient: f64,
    frequencies: &[f64],
    guard_band: f64,
) -> Vec<SweepPoint> {
    frequencies
        .par_iter()
        .map(|&frequency| {
            let couplings = FieldDrive::new(gradient, frequency, modes.axis)
                .ok()
                .and_then(|d| coupling_set_guarded(modes, config, &d, guard_band).ok());
            SweepPoint {
                frequency,
                couplings,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::TrapParams;

    fn ca_mn_ca() -> (CrystalConfig, ModeData) {
        let c = CrystalConfig::ca_mn_ca();
        let m = ModeData::axial(&c).unwrap();
        (c, m)
    }

    #[test]
    fn epsilon_zero_and_quadratic() {
        let c = CrystalConfig::ca_mn_ca();
        assert_eq!(epsilon_scale(&c, &FieldDrive::axial(0.0, 1.5).unwrap()), 0.0);
        let e1 = epsilon_scale(&c, &FieldDrive::axial(10.0, 1.5).unwrap());
        let e2 = epsilon_scale(&c, &FieldDrive::axial(20.0, 1.5).unwrap());
        assert!((e2 / e1 - 4.0).abs() < 1e-14);
    }

    #[test]
    fn epsilon_matches_spread_route() {
        let wz = 2.0 * std::f64::consts::PI * 100e3;
        let c = CrystalConfig::from_names(&["Ca", "Mn", "Ca"], TrapParams::new(wz, 0.1).unwrap()).unwrap();
        let eps = epsilon_scale(&c, &FieldDrive::axial(20.0, 1.5).unwrap());
        // ε = (Δz ∂_z ω₀)² / (2 ω_z)
        let m = 40.0 * 1.660_539_066_60e-27;
        let hbar = 1.054_571_817e-34;
        let dz = (hbar / (2.0 * m * wz)).sqrt();
        let dw = 9.274_010_078_3e-24 * 2.0 * 20.0 / hbar;
        let expected = (dz * dw).powi(2) / (2.0 * wz);
        assert!((eps / expected - 1.0).abs() < 1e-13);
        assert!((eps - 1.2442e4).abs() < 5.0, "{eps}");
    }

    #[test]
    fn guard_verdicts() {
        let (_, m) = ca_mn_ca();
        let f = m.frequencies();
        assert!(!resonance_guard(f[1], &m, 0.02).pass);
        assert!(resonance_guard(100.0, &m, 0.02).pass);
        let g = resonance_guard(f[2] + 0.01, &m, 0.02);
        assert_eq!(g.nearest_mode, 2);
        assert!(!g.pass);
    }

    #[test]
    fn guarded_drive_is_refused() {
        let (c, m) = ca_mn_ca();
        let drive = FieldDrive::axial(1.0, m.frequencies()[0]).unwrap();
        match coupling_set(&m, &c, &drive) {
            Err(Error::GuardedResonance { mode, .. }) => assert_eq!(mode, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn far_detuned_couplings_vanish() {
        let (c, m) = ca_mn_ca();
        let set = coupling_set(&m, &c, &FieldDrive::axial(1.0, 100.0).unwrap()).unwrap();
        let worst = set
            .j_light
            .iter()
            .chain(set.j_mixed.iter())
            .chain(set.anisotropy.iter())
            .fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(worst <= 1e-3);
    }

    #[test]
    fn mirror_symmetry() {
        let (c, m) = ca_mn_ca();
        for w in [0.5, 1.2, 1.5, 2.0, 2.6] {
            let s = coupling_set(&m, &c, &FieldDrive::axial(3.0, w).unwrap()).unwrap();
            assert!((s.j_mixed[(0, 0)] - s.j_mixed[(1, 0)]).abs() < 1e-12);
            assert_eq!(s.j_light[(0, 1)], s.j_light[(1, 0)]);
        }
    }

    #[test]
    fn epsilon_units_independent_of_gradient() {
        let (c, m) = ca_mn_ca();
        let a = coupling_set(&m, &c, &FieldDrive::axial(1.0, 1.3).unwrap()).unwrap();
        let b = coupling_set(&m, &c, &FieldDrive::axial(17.0, 1.3).unwrap()).unwrap();
        assert_eq!(a.j_light, b.j_light);
        assert_eq!(a.j_mixed, b.j_mixed);
        assert_eq!(a.anisotropy, b.anisotropy);
        assert!((b.epsilon / a.epsilon - 289.0).abs() < 1e-10);
    }

    #[test]
    fn per_term_sign_flip_across_resonance() {
        let (_, m) = ca_mn_ca();
        let f = m.frequencies();
        for (n, &fnn) in f.iter().enumerate() {
            let term = |w: f64| m.vector_entry(0, n) * m.vector_entry(1, n) / (w * w - fnn * fnn);
            if m.vector_entry(0, n) * m.vector_entry(1, n) != 0.0 {
                assert!(term(fnn - 1e-3).signum() != term(fnn + 1e-3).signum());
            }
        }
    }

    #[test]
    fn prefactors_on_synthetic_single_mode() {
        // one mode with every b entry 1/√N: every K_ij is the same number
        let c = CrystalConfig::from_names(&["Ca", "Mn", "Ca", "Mn"], crate::crystal::default_trap()).unwrap();
        let n = 4;
        let mut b = DMatrix::zeros(n, n);
        b.fill(0.0);
        for j in 0..n {
            b[(j, 0)] = 0.5;
        }
        let modes = ModeData {
            axis: Axis::Z,
            eigenvalues: vec![1.0, 100.0, 200.0, 300.0],
            eigenvectors: b,
            frequency_unit: 1.0,
        };
        let set = coupling_set(&modes, &c, &FieldDrive::axial(1.0, 2.0).unwrap()).unwrap();
        let k = 0.25 / 3.0;
        let mu = 1.25f64;
        assert!((set.j_light[(0, 1)] - k / 2.0).abs() < 1e-15);
        assert!((set.j_heavy[(0, 1)] - 2.0 * k / mu).abs() < 1e-15);
        assert!((set.j_mixed[(0, 0)] - k / mu.sqrt()).abs() < 1e-15);
        assert!((set.anisotropy[0] - k / mu).abs() < 1e-15);
    }

    #[test]
    fn equal_mass_spin_half_direct_sum() {
        let c = CrystalConfig::from_names(&["Ca", "Ca", "Ca", "Ca"], crate::crystal::default_trap()).unwrap();
        let m = ModeData::axial(&c).unwrap();
        let w = 1.37;
        let set = coupling_set(&m, &c, &FieldDrive::axial(1.0, w).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let mut direct = 0.0;
                for n in 0..4 {
                    direct += m.eigenvectors[(i, n)] * m.eigenvectors[(j, n)] / (w * w - m.eigenvalues[n]);
                }
                assert!((set.j_light[(i, j)] - direct / 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn rabi_route_reproduces_couplings() {
        // Σ_n 2 ω_n Ω_i Ω_j / (ω² − ω_n²) is the coefficient of S_i S_j in rad/s.
        let wz = 2.0 * std::f64::consts::PI * 1e5;
        let c = CrystalConfig::from_names(&["Ca", "Mn", "Ca"], TrapParams::new(wz, 0.1).unwrap()).unwrap();
        let m = ModeData::axial(&c).unwrap();
        let drive = FieldDrive::axial(5.0, 1.9).unwrap();
        let set = coupling_set(&m, &c, &drive).unwrap();
        let rabi = rabi_frequencies(&m, &c, drive.gradient);
        let w = drive.frequency * wz;
        let coeff = |i: usize, j: usize| -> f64 {
            (0..3)
                .map(|n| {
                    let wn = m.frequencies()[n] * wz;
                    2.0 * wn * rabi[(i, n)] * rabi[(j, n)] / (w * w - wn * wn)
                })
                .sum()
        };
        let eps = set.epsilon;
        // S_i S_j pair terms appear twice in F², σ = 2S for light sites
        assert!((2.0 * coeff(0, 2) / 4.0 / eps - set.j_light[(0, 1)]).abs() < 1e-10);
        assert!((2.0 * coeff(0, 1) / 2.0 / eps - set.j_mixed[(0, 0)]).abs() < 1e-10);
        assert!((coeff(1, 1) / eps - set.anisotropy[0]).abs() < 1e-10);
    }

    #[test]
    fn sweep_marks_gaps_in_order() {
        let (c, m) = ca_mn_ca();
        let f = m.frequencies();
        let grid = vec![0.5, f[0], 1.5, f[1], 2.0];
        let out = coupling_sweep(&m, &c, 1.0, &grid, 0.02);
        let present: Vec<bool> = out.iter().map(|p| p.couplings.is_some()).collect();
        assert_eq!(present, vec![true, false, true, false, true]);
        assert!(out.iter().zip(&grid).all(|(p, g)| p.frequency == *g));
    }

    #[test]
    fn axis_mismatch() {
        let (c, m) = ca_mn_ca();
        let drive = FieldDrive::new(1.0, 0.3, Axis::X).unwrap();
        assert!(matches!(coupling_set(&m, &c, &drive), Err(Error::AxisMismatch { .. })));
    }
}

//! Mass-weighted Hessians of a mixed-species chain and their normal modes.
//!
//! With `μ_i = m_i / m` the mass ratio of ion `i` to the reference species,
//! the mass-weighted matrices are `Ã_ij = A_ij / √(μ_i μ_j)` and likewise for
//! `B̃`. For a single heavy species this reproduces the five scaling cases
//! (1, 1/μ on heavy diagonals, 1/√μ on mixed pairs, 1/μ on heavy pairs).

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::crystal::CrystalConfig;
use crate::linalg::{asymmetry, eigh_real};
use crate::{Error, Result};

/// Tolerance on the symmetry of a matrix handed to [`normal_modes`].
const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn is_radial(self) -> bool {
        self != Axis::Z
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Normal modes along one axis.
///
/// `eigenvalues` are λ_n (axial) or γ_n (radial); column `n` of
/// `eigenvectors` is the mass-weighted mode vector b_n.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeData {
    pub axis: Axis,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    /// Mode frequency over √eigenvalue, in units of ω_z:
    /// 1 for axial modes, 1/α for radial modes.
    pub frequency_unit: f64,
}

impl ModeData {
    /// Axial modes of a crystal.
    pub fn axial(config: &CrystalConfig) -> Result<Self> {
        let u = config.equilibrium_positions()?;
        normal_modes(&axial_hessian(&u, config)?, Axis::Z, 1.0)
    }

    /// Radial modes; x and y are degenerate and share one eigenproblem.
    pub fn radial(config: &CrystalConfig, axis: Axis) -> Result<Self> {
        if !axis.is_radial() {
            return Err(Error::invalid("axis", "radial modes need axis x or y"));
        }
        let u = config.equilibrium_positions()?;
        normal_modes(&radial_hessian(&u, config)?, axis, 1.0 / config.trap.alpha)
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Mode frequencies in units of ω_z. NaN for an unstable (negative) mode.
    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|&l| self.frequency_unit * l.sqrt())
            .collect()
    }

    /// Entry b_{j,n}.
    pub fn vector_entry(&self, ion: usize, mode: usize) -> f64 {
        self.eigenvectors[(ion, mode)]
    }
}

/// Modes along all three axes. The y modes are a copy of the x modes.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainModes {
    pub axial: ModeData,
    pub radial_x: ModeData,
    pub radial_y: ModeData,
}

impl ChainModes {
    pub fn compute(config: &CrystalConfig) -> Result<Self> {
        let axial = ModeData::axial(config)?;
        let radial_x = ModeData::radial(config, Axis::X)?;
        let radial_y = ModeData {
            axis: Axis::Y,
            ..radial_x.clone()
        };
        Ok(ChainModes {
            axial,
            radial_x,
            radial_y,
        })
    }

    pub fn along(&self, axis: Axis) -> &ModeData {
        match axis {
            Axis::X => &self.radial_x,
            Axis::Y => &self.radial_y,
            Axis::Z => &self.axial,
        }
    }
}

/// Σ_{p≠i} 1/|u_i − u_p|³ for each ion.
fn inverse_cube_sums(u: &[f64]) -> Result<Vec<f64>> {
    let n = u.len();
    let mut sums = vec![0.0; n];
    for i in 0..n {
        for p in 0..n {
            if p == i {
                continue;
            }
            let d = (u[i] - u[p]).abs();
            if d == 0.0 {
                return Err(Error::DegenerateGeometry(i.min(p), i.max(p)));
            }
            sums[i] += 1.0 / (d * d * d);
        }
    }
    Ok(sums)
}

/// Unweighted axial Hessian A (row-major), mass independent.
pub fn coulomb_hessian(u: &[f64]) -> Result<Vec<f64>> {
    let n = u.len();
    let sums = inverse_cube_sums(u)?;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j {
                1.0 + 2.0 * sums[i]
            } else {
                -2.0 / (u[i] - u[j]).abs().powi(3)
            };
        }
    }
    Ok(a)
}

fn check_lengths(u: &[f64], config: &CrystalConfig) -> Result<()> {
    if u.len() != config.len() {
        return Err(Error::invalid(
            "positions",
            format!("{} positions for {} ions", u.len(), config.len()),
        ));
    }
    Ok(())
}

fn mass_weight(raw: DMatrix<f64>, mu: &[f64]) -> DMatrix<f64> {
    let n = raw.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            raw[(i, i)] / mu[i]
        } else if mu[i] == 1.0 && mu[j] == 1.0 {
            raw[(i, j)]
        } else if mu[i] == mu[j] {
            raw[(i, j)] / mu[i]
        } else {
            raw[(i, j)] / (mu[i] * mu[j]).sqrt()
        }
    })
}

/// Mass-weighted axial Hessian Ã.
pub fn axial_hessian(u: &[f64], config: &CrystalConfig) -> Result<DMatrix<f64>> {
    check_lengths(u, config)?;
    let n = u.len();
    let raw = DMatrix::from_row_slice(n, n, &coulomb_hessian(u)?);
    Ok(mass_weight(raw, &config.mass_ratios()))
}

/// Mass-weighted radial Hessian B̃ in units of m ω_r⁰(m)².
///
/// The radial spring of ion `i` is `1/μ_i − α²/2` because ω_r⁰ ∝ 1/mass while
/// the axial reduction term is mass independent.
pub fn radial_hessian(u: &[f64], config: &CrystalConfig) -> Result<DMatrix<f64>> {
    check_lengths(u, config)?;
    let n = u.len();
    let a2 = config.trap.alpha * config.trap.alpha;
    let mu = config.mass_ratios();
    let sums = inverse_cube_sums(u)?;
    let raw = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0 / mu[i] - a2 / 2.0 - a2 * sums[i]
        } else {
            a2 / (u[i] - u[j]).abs().powi(3)
        }
    });
    Ok(mass_weight(raw, &mu))
}

/// Diagonalize a symmetric Hessian.
///
/// Eigenvalues ascend; every eigenvector is scaled so that its entry of
/// largest magnitude is positive, ties going to the lowest index.
pub fn normal_modes(hessian: &DMatrix<f64>, axis: Axis, frequency_unit: f64) -> Result<ModeData> {
    if !hessian.is_square() {
        return Err(Error::invalid("hessian", "matrix must be square"));
    }
    let defect = asymmetry(hessian);
    let scale = hessian.amax().max(1.0);
    if defect > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric(defect));
    }
    let (eigenvalues, mut eigenvectors) = eigh_real(hessian);
    for mut col in eigenvectors.column_iter_mut() {
        let peak = col.amax();
        let lead = col
            .iter()
            .position(|x| x.abs() >= peak * (1.0 - 1e-9))
            .expect("nonempty column");
        if col[lead] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(ModeData {
        axis,
        eigenvalues,
        eigenvectors,
        frequency_unit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{default_trap, TrapParams};

    fn chain(names: &[&str], alpha: f64) -> CrystalConfig {
        CrystalConfig::from_names(names, TrapParams::new(1.0, alpha).unwrap()).unwrap()
    }

    #[test]
    fn two_ion_axial_hessian() {
        let c = chain(&["Ca", "Ca"], 0.1);
        let u = c.equilibrium_positions().unwrap();
        let a = axial_hessian(&u, &c).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        assert!((a - expected).amax() < 1e-12);
    }

    #[test]
    fn single_ion_matrices() {
        let c = chain(&["Ca"], 0.3);
        assert_eq!(axial_hessian(&[0.0], &c).unwrap()[(0, 0)], 1.0);
        assert!((radial_hessian(&[0.0], &c).unwrap()[(0, 0)] - (1.0 - 0.045)).abs() < 1e-15);
    }

    #[test]
    fn two_ion_radial_hessian() {
        let c = chain(&["Ca", "Ca"], 0.1);
        let u = c.equilibrium_positions().unwrap();
        let b = radial_hessian(&u, &c).unwrap();
        let d3 = 2.0;
        assert!((b[(0, 0)] - (1.0 - 0.005 - 0.01 / d3)).abs() < 1e-13);
        assert!((b[(0, 1)] - 0.01 / d3).abs() < 1e-13);
    }

    #[test]
    fn heavy_center_scaling() {
        let light = chain(&["Ca", "Ca", "Ca"], 0.1);
        let mixed = chain(&["Ca", "Mn", "Ca"], 0.1);
        let u = light.equilibrium_positions().unwrap();
        let a = axial_hessian(&u, &light).unwrap();
        let at = axial_hessian(&u, &mixed).unwrap();
        assert!((at[(1, 1)] - a[(1, 1)] / 1.25).abs() < 1e-15);
        assert!((at[(0, 1)] - a[(0, 1)] / 1.25f64.sqrt()).abs() < 1e-15);
        assert_eq!(at[(0, 2)], a[(0, 2)]);
        assert_eq!(asymmetry(&at), 0.0);

        let bt = radial_hessian(&u, &mixed).unwrap();
        let a2 = 0.01;
        let s = 2.0 / 1.25f64; // Σ 1/|u|³ at the center, |u| = (5/4)^(1/3)
        let expected = (1.0 / 1.25 - a2 / 2.0 - a2 * s) / 1.25;
        assert!((bt[(1, 1)] - expected).abs() < 1e-14);
    }

    #[test]
    fn two_heavy_ions_pair_scaling() {
        let c = chain(&["Ca", "Mn", "Mn", "Ca"], 0.1);
        let u = c.equilibrium_positions().unwrap();
        let raw = DMatrix::from_row_slice(4, 4, &coulomb_hessian(&u).unwrap());
        let at = axial_hessian(&u, &c).unwrap();
        assert!((at[(1, 2)] - raw[(1, 2)] / 1.25).abs() < 1e-15);
    }

    #[test]
    fn small_alpha_radial_is_identity() {
        let c = chain(&["Ca", "Ca", "Ca", "Ca"], 1e-9);
        let u = c.equilibrium_positions().unwrap();
        let b = radial_hessian(&u, &c).unwrap();
        assert!((b - DMatrix::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn coincident_ions_rejected() {
        let c = chain(&["Ca", "Ca"], 0.1);
        assert!(matches!(
            axial_hessian(&[0.5, 0.5], &c),
            Err(Error::DegenerateGeometry(0, 1))
        ));
    }

    #[test]
    fn two_by_two_modes() {
        let h = DMatrix::from_row_slice(2, 2, &[2.0, -1.0, -1.0, 2.0]);
        let m = normal_modes(&h, Axis::Z, 1.0).unwrap();
        assert!((m.eigenvalues[0] - 1.0).abs() < 1e-14 && (m.eigenvalues[1] - 3.0).abs() < 1e-14);
        let r = 0.5f64.sqrt();
        assert!((m.eigenvectors[(0, 0)] - r).abs() < 1e-14 && (m.eigenvectors[(1, 0)] - r).abs() < 1e-14);
        // tie between ±1/√2 goes to index 0
        assert!((m.eigenvectors[(0, 1)] - r).abs() < 1e-14 && (m.eigenvectors[(1, 1)] + r).abs() < 1e-14);
    }

    #[test]
    fn identity_modes() {
        let m = normal_modes(&DMatrix::identity(4, 4), Axis::Z, 1.0).unwrap();
        assert!(m.eigenvalues.iter().all(|&l| l == 1.0));
        assert!((&m.eigenvectors - DMatrix::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn rejects_asymmetric() {
        let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(normal_modes(&h, Axis::Z, 1.0), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn mixed_mass_center_of_mass_shift() {
        let m = ModeData::axial(&CrystalConfig::ca_mn_ca()).unwrap();
        assert!((m.eigenvalues[0] - 1.0).abs() > 1e-6);
        // breathing mode leaves the heavy center at rest
        assert!((m.eigenvalues[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn palindromic_parity_and_orthonormality() {
        for names in [&["Ca", "Mn", "Ca"][..], &["Ca", "Mn", "Ca", "Mn", "Ca"], &["Mn", "Ca", "Ca", "Mn"]] {
            let c = CrystalConfig::from_names(names, default_trap()).unwrap();
            for m in [ModeData::axial(&c).unwrap(), ModeData::radial(&c, Axis::X).unwrap()] {
                let n = m.len();
                let b = &m.eigenvectors;
                assert!((b.transpose() * b - DMatrix::identity(n, n)).amax() < 1e-10);
                for k in 0..n {
                    let even = (0..n).map(|j| (b[(j, k)] - b[(n - 1 - j, k)]).abs()).fold(0.0, f64::max);
                    let odd = (0..n).map(|j| (b[(j, k)] + b[(n - 1 - j, k)]).abs()).fold(0.0, f64::max);
                    assert!(even.min(odd) < 1e-8);
                }
            }
        }
    }
}

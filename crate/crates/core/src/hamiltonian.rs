//! Spin operators, mixed-dimension product bases and model Hamiltonians.
//!
//! Basis convention: sites in chain order with the leftmost site varying
//! slowest; local states ordered `m = +s, +s−1, …, −s`. Spin-1/2 sites enter
//! the coupling terms through Pauli matrices (eigenvalues ±1), larger spins
//! through `S`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::couplings::{Axis, CouplingSet};
use crate::crystal::Spin;
use crate::linalg::{kron_all, CMatrix};
use crate::{Error, Result};

/// `(S_x, S_y, S_z)` for spin `s`, basis ordered `m = s, …, −s`.
pub fn spin_operators(s: Spin) -> (CMatrix, CMatrix, CMatrix) {
    let d = s.dim();
    let sv = s.value();
    let m = |k: usize| f64::from(s.twice_m(k)) / 2.0;
    let mut raise = DMatrix::<f64>::zeros(d, d);
    for k in 1..d {
        // ⟨m+1| S₊ |m⟩ = √(s(s+1) − m(m+1))
        let mk = m(k);
        raise[(k - 1, k)] = (sv * (sv + 1.0) - mk * (mk + 1.0)).sqrt();
    }
    let lower = raise.transpose();
    let sx = (&raise + &lower).map(|x| Complex64::new(0.5 * x, 0.0));
    let sy = (&raise - &lower).map(|x| Complex64::new(0.0, -0.5 * x));
    let sz = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |k, _| Complex64::new(m(k), 0.0)));
    (sx, sy, sz)
}

/// Component `q` of the spin operator.
pub fn spin_component(s: Spin, axis: Axis) -> CMatrix {
    let (x, y, z) = spin_operators(s);
    match axis {
        Axis::X => x,
        Axis::Y => y,
        Axis::Z => z,
    }
}

/// The operator entering the couplings: σ_q = 2 S_q for spin 1/2, S_q otherwise.
pub fn coupling_component(s: Spin, axis: Axis) -> CMatrix {
    let op = spin_component(s, axis);
    if s.is_half() {
        op * Complex64::new(2.0, 0.0)
    } else {
        op
    }
}

/// Tensor-product basis over sites with mixed local dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinBasis {
    spins: Vec<Spin>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl SpinBasis {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::invalid("spins", "basis needs at least one site"));
        }
        let dims: Vec<usize> = spins.iter().map(|s| s.dim()).collect();
        let mut strides = vec![1; dims.len()];
        for k in (0..dims.len() - 1).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let total = strides[0] * dims[0];
        Ok(SpinBasis {
            spins,
            dims,
            strides,
            total,
        })
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn site_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn light_sites(&self) -> Vec<usize> {
        (0..self.n_sites()).filter(|&k| self.spins[k].is_half()).collect()
    }

    pub fn heavy_sites(&self) -> Vec<usize> {
        (0..self.n_sites()).filter(|&k| !self.spins[k].is_half()).collect()
    }

    /// Local state indices of basis state `index`.
    pub fn local_indices(&self, index: usize) -> Vec<usize> {
        (0..self.n_sites())
            .map(|k| (index / self.strides[k]) % self.dims[k])
            .collect()
    }

    /// `2m` for every site of basis state `index`.
    pub fn configuration(&self, index: usize) -> Vec<i32> {
        self.local_indices(index)
            .iter()
            .zip(&self.spins)
            .map(|(&k, s)| s.twice_m(k))
            .collect()
    }

    /// Basis index of a configuration given as `2m` per site.
    pub fn index_of(&self, twice_m: &[i32]) -> Option<usize> {
        if twice_m.len() != self.n_sites() {
            return None;
        }
        let mut index = 0;
        for (k, (&tm, s)) in twice_m.iter().zip(&self.spins).enumerate() {
            index += s.index_of(tm)? * self.strides[k];
        }
        Some(index)
    }

    /// Index of the globally flipped configuration `m → −m`.
    pub fn flipped(&self, index: usize) -> usize {
        self.local_indices(index)
            .iter()
            .enumerate()
            .map(|(k, &l)| (self.dims[k] - 1 - l) * self.strides[k])
            .sum()
    }

    /// Human-readable label, e.g. `↑,-3,↑`.
    pub fn label(&self, index: usize) -> String {
        format_configuration(&self.spins, &self.configuration(index))
    }

    /// Parse a label such as `up,3,down` or `↑,-3,↑`.
    pub fn parse_label(&self, label: &str) -> Result<Vec<i32>> {
        let parsed = parse_configuration(label)?;
        if parsed.len() != self.n_sites() {
            return Err(Error::UnknownLabel(format!(
                "`{label}` has {} sites, basis has {}",
                parsed.len(),
                self.n_sites()
            )));
        }
        for (tm, s) in parsed.iter().zip(&self.spins) {
            if s.index_of(*tm).is_none() {
                return Err(Error::UnknownLabel(format!("`{label}`: m = {} not allowed for spin {s}", *tm as f64 / 2.0)));
            }
        }
        Ok(parsed)
    }

    /// Embed per-site operators into the full space (identity elsewhere).
    pub fn embed(&self, ops: &[(usize, &CMatrix)]) -> CMatrix {
        let factors: Vec<CMatrix> = (0..self.n_sites())
            .map(|k| {
                ops.iter()
                    .filter(|(site, _)| *site == k)
                    .fold(CMatrix::identity(self.dims[k], self.dims[k]), |acc, (_, op)| acc * *op)
            })
            .collect();
        kron_all(&factors)
    }

    /// `S_q` of one site in the full space.
    pub fn site_spin(&self, site: usize, axis: Axis) -> CMatrix {
        self.embed(&[(site, &spin_component(self.spins[site], axis))])
    }

    /// Global spin flip X = ⊗ (|m⟩ → |−m⟩), which maps S_z → −S_z and keeps S_x.
    pub fn flip_operator(&self) -> CMatrix {
        let mut x = CMatrix::zeros(self.total, self.total);
        for i in 0..self.total {
            x[(self.flipped(i), i)] = Complex64::new(1.0, 0.0);
        }
        x
    }
}

/// Format `2m` values: spin-1/2 sites as arrows, others as signed `m`.
pub fn format_configuration(spins: &[Spin], twice_m: &[i32]) -> String {
    twice_m
        .iter()
        .zip(spins)
        .map(|(&tm, s)| {
            if s.is_half() {
                if tm > 0 { "↑".to_string() } else { "↓".to_string() }
            } else if tm % 2 == 0 {
                format!("{}", tm / 2)
            } else {
                format!("{tm}/2")
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Parse a comma separated configuration into `2m` values.
///
/// Accepted tokens: `up`, `u`, `↑`, `+`, `down`, `d`, `↓`, `-` (±1/2), and
/// integers or halves such as `3`, `-2`, `3/2`, `-1/2`.
pub fn parse_configuration(text: &str) -> Result<Vec<i32>> {
    text.split(',')
        .map(|tok| {
            let t = tok.trim();
            match t.to_ascii_lowercase().as_str() {
                "up" | "u" | "↑" | "+" => return Ok(1),
                "down" | "d" | "↓" | "-" => return Ok(-1),
                _ => {}
            }
            let t = t.replace('−', "-");
            if let Some((num, den)) = t.split_once('/') {
                let n: i32 = num.trim().parse().map_err(|_| Error::UnknownLabel(tok.to_string()))?;
                if den.trim() != "2" || n % 2 == 0 {
                    return Err(Error::UnknownLabel(tok.to_string()));
                }
                return Ok(n);
            }
            let m: i32 = t.parse().map_err(|_| Error::UnknownLabel(tok.to_string()))?;
            Ok(2 * m)
        })
        .collect()
}

/// A dense Hermitian Hamiltonian over a labelled basis, in units of ε.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinHamiltonian {
    pub basis: SpinBasis,
    pub matrix: CMatrix,
}

impl SpinHamiltonian {
    pub fn zeros(basis: SpinBasis) -> Self {
        let d = basis.dim();
        SpinHamiltonian {
            basis,
            matrix: CMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::linalg::hermiticity_defect(&self.matrix)
    }
}

impl fmt::Display for SpinHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpinHamiltonian(dim = {}, sites = {:?})", self.dim(), self.basis.spins())
    }
}

fn check_layout(couplings: &CouplingSet, basis: &SpinBasis) -> Result<()> {
    if couplings.light_sites != basis.light_sites() || couplings.heavy_sites != basis.heavy_sites() {
        return Err(Error::BasisMismatch(format!(
            "couplings have light sites {:?} / heavy sites {:?}, basis has {:?} / {:?}",
            couplings.light_sites,
            couplings.heavy_sites,
            basis.light_sites(),
            basis.heavy_sites()
        )));
    }
    Ok(())
}

/// The time-averaged Hamiltonian of an axial drive; diagonal in the S_z basis.
pub fn build_effective_z(couplings: &CouplingSet, basis: &SpinBasis) -> Result<SpinHamiltonian> {
    if couplings.axis != Axis::Z {
        return Err(Error::AxisMismatch {
            expected: 'z',
            found: couplings.axis.as_char(),
        });
    }
    check_layout(couplings, basis)?;
    let spins = basis.spins();
    let n = basis.n_sites();
    let mut h = SpinHamiltonian::zeros(basis.clone());
    for idx in 0..basis.dim() {
        let tm = basis.configuration(idx);
        // eigenvalue of σ_z (±1) or S_z (m)
        let z: Vec<f64> = tm
            .iter()
            .zip(spins)
            .map(|(&t, s)| if s.is_half() { f64::from(t) } else { f64::from(t) / 2.0 })
            .collect();
        let mut e = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                e += couplings.pair(i, j) * z[i] * z[j];
            }
            if !spins[i].is_half() {
                e += couplings.anisotropy_at(i) * z[i] * z[i];
            }
        }
        h.matrix[(idx, idx)] = Complex64::new(e, 0.0);
    }
    Ok(h)
}

fn axis_terms(couplings: &CouplingSet, basis: &SpinBasis, axis: Axis, scale: f64) -> CMatrix {
    let spins = basis.spins();
    let n = basis.n_sites();
    let ops: Vec<CMatrix> = spins.iter().map(|&s| coupling_component(s, axis)).collect();
    let mut h = CMatrix::zeros(basis.dim(), basis.dim());
    for i in 0..n {
        for j in i + 1..n {
            let c = couplings.pair(i, j) * scale;
            if c != 0.0 {
                h += basis.embed(&[(i, &ops[i]), (j, &ops[j])]) * Complex64::new(c, 0.0);
            }
        }
        if !spins[i].is_half() {
            let a = couplings.anisotropy_at(i) * scale;
            if a != 0.0 {
                let sq = &ops[i] * &ops[i];
                h += basis.embed(&[(i, &sq)]) * Complex64::new(a, 0.0);
            }
        }
    }
    h
}

/// Anisotropic XYZ Hamiltonian from one coupling set per axis.
///
/// Everything is expressed in the ε of the z set; the x and y sets are
/// rescaled by `ε_q / ε_z`. Sets with equal ε (e.g. synthetic sets) are
/// combined as they are.
pub fn build_xyz(sets: [&CouplingSet; 3], basis: &SpinBasis) -> Result<SpinHamiltonian> {
    let find = |axis: Axis| {
        sets.iter()
            .find(|s| s.axis == axis)
            .copied()
            .ok_or_else(|| Error::invalid("coupling_sets", format!("missing {axis} axis")))
    };
    let (sx, sy, sz) = (find(Axis::X)?, find(Axis::Y)?, find(Axis::Z)?);
    let mut h = build_effective_z(sz, basis)?;
    for set in [sx, sy] {
        check_layout(set, basis)?;
        let scale = if set.epsilon == sz.epsilon {
            1.0
        } else if sz.epsilon > 0.0 {
            set.epsilon / sz.epsilon
        } else {
            return Err(Error::invalid(
                "coupling_sets",
                "z coupling set has zero ε; cannot express radial couplings in its units",
            ));
        };
        h.matrix += axis_terms(set, basis, set.axis, scale);
    }
    Ok(h)
}

/// Σ_k S_x over all sites (σ_x/2 for spin-1/2 sites).
pub fn transverse_operator(basis: &SpinBasis) -> CMatrix {
    let mut t = CMatrix::zeros(basis.dim(), basis.dim());
    for k in 0..basis.n_sites() {
        t += basis.site_spin(k, Axis::X);
    }
    t
}

/// `H_z − B (Σ σ_x/2 + Σ S_x)`, with B in units of ε.
pub fn build_transverse_ising(hz: &SpinHamiltonian, b_field: f64) -> SpinHamiltonian {
    let t = transverse_operator(&hz.basis);
    SpinHamiltonian {
        basis: hz.basis.clone(),
        matrix: &hz.matrix - t * Complex64::new(b_field, 0.0),
    }
}

/// The pure transverse-field Hamiltonian used for state preparation.
pub fn build_preparation(basis: &SpinBasis, b_field: f64) -> SpinHamiltonian {
    build_transverse_ising(&SpinHamiltonian::zeros(basis.clone()), b_field)
}

/// Σ_k σ_q (Pauli for spin-1/2, S for larger spins) over all sites.
pub fn total_coupling_operator(basis: &SpinBasis, axis: Axis) -> CMatrix {
    let mut t = CMatrix::zeros(basis.dim(), basis.dim());
    for (k, &s) in basis.spins().iter().enumerate() {
        t += basis.embed(&[(k, &coupling_component(s, axis))]);
    }
    t
}

/// `exp(−i θ S_y)` on one site.
pub fn y_rotation(s: Spin, angle: f64) -> CMatrix {
    let sy = spin_component(s, Axis::Y);
    // −i θ S_y is real antisymmetric; use the spectral route of the Hermitian S_y.
    crate::linalg::unitary_exp(&sy, angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, eigh, hermiticity_defect, max_abs, I};

    fn spin(s: f64) -> Spin {
        Spin::new(s).unwrap()
    }

    fn ca_mn_ca_basis() -> SpinBasis {
        SpinBasis::new(vec![spin(0.5), spin(3.0), spin(0.5)]).unwrap()
    }

    #[test]
    fn spin_half_operators() {
        let (sx, _, sz) = spin_operators(spin(0.5));
        assert_eq!(sz[(0, 0)].re, 0.5);
        assert_eq!(sz[(1, 1)].re, -0.5);
        assert_eq!(sx[(0, 1)].re, 0.5);
        assert_eq!(sx[(1, 0)].re, 0.5);
    }

    #[test]
    fn spin_three_ladder_element() {
        let (sx, _, sz) = spin_operators(spin(3.0));
        let diag: Vec<f64> = (0..7).map(|k| sz[(k, k)].re).collect();
        assert_eq!(diag, vec![3.0, 2.0, 1.0, 0.0, -1.0, -2.0, -3.0]);
        assert!((sx[(0, 1)].re - 6f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn algebra_for_many_spins() {
        for twice in 1..=8 {
            let s = Spin::from_twice(twice).unwrap();
            let (x, y, z) = spin_operators(s);
            assert!(max_abs(&(commutator(&x, &y) - &z * I)) < 1e-12);
            assert!(max_abs(&(commutator(&y, &z) - &x * I)) < 1e-12);
            assert!(max_abs(&(commutator(&z, &x) - &y * I)) < 1e-12);
            let casimir = &x * &x + &y * &y + &z * &z;
            let sv = s.value();
            let expected = CMatrix::identity(s.dim(), s.dim()) * Complex64::new(sv * (sv + 1.0), 0.0);
            assert!(max_abs(&(casimir - expected)) < 1e-12);
        }
    }

    #[test]
    fn basis_indexing_is_bijective() {
        let b = SpinBasis::new(vec![spin(0.5), spin(3.0), spin(0.5), spin(3.0), spin(0.5)]).unwrap();
        assert_eq!(b.dim(), 392);
        for i in 0..b.dim() {
            assert_eq!(b.index_of(&b.configuration(i)), Some(i));
            assert_eq!(b.flipped(b.flipped(i)), i);
        }
        assert_eq!(b.configuration(0), vec![1, 6, 1, 6, 1]);
    }

    #[test]
    fn labels_round_trip() {
        let b = ca_mn_ca_basis();
        let c = b.parse_label("up,-3,up").unwrap();
        assert_eq!(c, vec![1, -6, 1]);
        let idx = b.index_of(&c).unwrap();
        assert_eq!(b.label(idx), "↑,-3,↑");
        assert_eq!(b.parse_label(&b.label(idx)).unwrap(), c);
        assert!(b.parse_label("up,4,up").is_err());
        assert!(b.parse_label("up,3").is_err());
        assert!(b.parse_label("sideways,3,up").is_err());
    }

    #[test]
    fn effective_z_diagonal_formula() {
        let b = ca_mn_ca_basis();
        assert_eq!(b.dim(), 28);
        let (j, j13, a) = (0.7, -0.3, 0.45);
        let h = build_effective_z(&CouplingSet::three_site(j, j13, a), &b).unwrap();
        for idx in 0..28 {
            let c = b.configuration(idx);
            let (s1, m, s3) = (f64::from(c[0]), f64::from(c[1]) / 2.0, f64::from(c[2]));
            let expected = j13 * s1 * s3 + j * m * (s1 + s3) + a * m * m;
            assert!((h.matrix[(idx, idx)].re - expected).abs() < 1e-14);
        }
        assert_eq!(hermiticity_defect(&h.matrix), 0.0);
    }

    #[test]
    fn effective_z_single_entry_and_zero() {
        let b = ca_mn_ca_basis();
        let h = build_effective_z(&CouplingSet::three_site(1.0, 0.0, 0.0), &b).unwrap();
        let idx = b.index_of(&[1, 6, 1]).unwrap();
        assert_eq!(h.matrix[(idx, idx)].re, 6.0);
        let z = build_effective_z(&CouplingSet::three_site(0.0, 0.0, 0.0), &b).unwrap();
        assert_eq!(max_abs(&z.matrix), 0.0);
    }

    #[test]
    fn effective_z_rejects_radial_set_and_layout() {
        let b = ca_mn_ca_basis();
        let mut set = CouplingSet::three_site(1.0, 0.0, 0.0);
        set.axis = Axis::X;
        assert!(matches!(build_effective_z(&set, &b), Err(Error::AxisMismatch { .. })));
        let wrong = SpinBasis::new(vec![spin(3.0), spin(0.5), spin(0.5)]).unwrap();
        assert!(build_effective_z(&CouplingSet::three_site(1.0, 0.0, 0.0), &wrong).is_err());
    }

    #[test]
    fn xyz_reduces_to_z_without_radial_gradient() {
        let b = ca_mn_ca_basis();
        let mut z = CouplingSet::three_site(0.4, 0.2, -0.1);
        z.epsilon = 5.0;
        let mut x = CouplingSet::three_site(1.3, -0.7, 0.9);
        x.axis = Axis::X;
        x.epsilon = 0.0;
        let mut y = x.clone();
        y.axis = Axis::Y;
        let full = build_xyz([&x, &y, &z], &b).unwrap();
        assert_eq!(full.matrix, build_effective_z(&z, &b).unwrap().matrix);
    }

    #[test]
    fn xyz_isotropic_commutes_with_total_spin() {
        let b = SpinBasis::new(vec![spin(0.5), spin(0.5)]).unwrap();
        let mut sets: Vec<CouplingSet> = Axis::ALL
            .iter()
            .map(|&axis| {
                let mut s = CouplingSet::zeros(axis, vec![0, 1], vec![]);
                s.j_light[(0, 1)] = 0.8;
                s.j_light[(1, 0)] = 0.8;
                s
            })
            .collect();
        let z = sets.pop().unwrap();
        let y = sets.pop().unwrap();
        let x = sets.pop().unwrap();
        let h = build_xyz([&x, &y, &z], &b).unwrap();
        assert!(hermiticity_defect(&h.matrix) < 1e-12);
        for axis in Axis::ALL {
            let total = total_coupling_operator(&b, axis);
            assert!(max_abs(&commutator(&h.matrix, &total)) <= 1e-10);
        }
    }

    #[test]
    fn xyz_missing_axis() {
        let b = ca_mn_ca_basis();
        let z = CouplingSet::three_site(0.4, 0.2, -0.1);
        assert!(build_xyz([&z, &z, &z], &b).is_err());
    }

    #[test]
    fn single_site_x_anisotropy_spectrum() {
        let b = SpinBasis::new(vec![spin(3.0)]).unwrap();
        let z = CouplingSet::zeros(Axis::Z, vec![], vec![0]);
        let mut x = CouplingSet::zeros(Axis::X, vec![], vec![0]);
        x.anisotropy[0] = 1.0;
        let y = CouplingSet::zeros(Axis::Y, vec![], vec![0]);
        let h = build_xyz([&x, &y, &z], &b).unwrap();
        let (vals, _) = eigh(&h.matrix);
        let expected = [0.0, 1.0, 1.0, 4.0, 4.0, 9.0, 9.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-10);
        }
    }

    #[test]
    fn transverse_field_limits() {
        let b = ca_mn_ca_basis();
        let hz = build_effective_z(&CouplingSet::three_site(0.3, 0.1, 0.2), &b).unwrap();
        assert_eq!(build_transverse_ising(&hz, 0.0).matrix, hz.matrix);

        let prep = build_preparation(&b, 0.7);
        let (vals, _) = eigh(&prep.matrix);
        assert!((vals[0] + 4.0 * 0.7).abs() < 1e-12);
        assert!(vals[1] - vals[0] > 0.1);
    }

    #[test]
    fn z2_symmetry() {
        let b = ca_mn_ca_basis();
        let hz = build_effective_z(&CouplingSet::three_site(0.3, -0.6, 0.2), &b).unwrap();
        let h = build_transverse_ising(&hz, 0.9);
        let x = b.flip_operator();
        assert!(max_abs(&commutator(&h.matrix, &x)) <= 1e-12);
        // X anticommutes with every S_z
        for k in 0..3 {
            let sz = b.site_spin(k, Axis::Z);
            assert!(max_abs(&(&x * &sz + &sz * &x)) < 1e-14);
        }
    }

    #[test]
    fn rotation_of_spin_half_down() {
        // exp(−i π/4 σ_y)|↓⟩ = exp(−i π/2 S_y)|↓⟩ is the −1 eigenstate of σ_x
        let r = y_rotation(spin(0.5), std::f64::consts::FRAC_PI_2);
        let out = r.column(1).into_owned();
        let sx = spin_component(spin(0.5), Axis::X);
        let expect = (&sx * &out).dot(&out.conjugate());
        assert!((expect.re + 0.5).abs() < 1e-14);
    }
}

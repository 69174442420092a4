//! Randomised invariants over chain layouts, couplings and fields.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use ionspin::couplings::{coupling_set, epsilon_scale};
use ionspin::crystal::{axial_gradient, equilibrium_positions};
use ionspin::groundstate::{default_tolerance, diagonalize, ground_manifold, populations, ConfigSet};
use ionspin::hamiltonian::{build_effective_z, build_transverse_ising, spin_operators};
use ionspin::linalg::{commutator, max_abs, CMatrix};
use ionspin::readout::{spin_dependent_shift, zeeman_splitting, ReadoutSetup};
use ionspin::{CouplingSet, CrystalConfig, FieldDrive, ModeData, Species, Spin, SpinBasis, TrapParams};

fn chain(heavy: &[bool]) -> CrystalConfig {
    let species = heavy
        .iter()
        .map(|&h| if h { Species::manganese50() } else { Species::calcium40() })
        .collect();
    CrystalConfig::new(species, TrapParams::new(1.0, 0.1).unwrap()).unwrap()
}

fn pattern(max: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 2..=max).prop_filter("needs a light ion", |p| p.iter().any(|h| !h))
}

fn palindrome() -> impl Strategy<Value = Vec<bool>> {
    (prop::collection::vec(any::<bool>(), 1..=3), any::<bool>(), any::<bool>()).prop_map(|(half, mid, odd)| {
        let mut p = vec![false];
        p.extend(&half);
        let mut full = p.clone();
        if odd {
            full.push(mid);
        }
        full.extend(p.iter().rev());
        full
    })
}

fn three_site_couplings() -> impl Strategy<Value = (f64, f64, f64)> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positions_are_mirror_symmetric_equilibria(n in 1usize..=12) {
        let u = equilibrium_positions(n).unwrap();
        for j in 0..n {
            prop_assert!((u[j] + u[n - 1 - j]).abs() <= 1e-12);
        }
        prop_assert!(axial_gradient(&u).iter().all(|f| f.abs() <= 1e-12));
    }

    #[test]
    fn spacing_shrinks_towards_the_centre(n in 3usize..=10) {
        let u = equilibrium_positions(n).unwrap();
        let gaps: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
        let mid = gaps.len() / 2;
        for k in 0..mid {
            prop_assert!(gaps[k] > gaps[k + 1] - 1e-12);
        }
        for k in mid..gaps.len() - 1 {
            prop_assert!(gaps[k] < gaps[k + 1] + 1e-12);
        }
    }

    #[test]
    fn positions_ignore_the_mass_pattern(p in pattern(8)) {
        let mixed = chain(&p).equilibrium_positions().unwrap();
        let bare = equilibrium_positions(p.len()).unwrap();
        prop_assert!(mixed.iter().zip(&bare).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn mode_vectors_are_orthonormal(p in pattern(7)) {
        let config = chain(&p);
        for m in [ModeData::axial(&config).unwrap(), ModeData::radial(&config, ionspin::Axis::X).unwrap()] {
            let b = &m.eigenvectors;
            let defect = (b.transpose() * b - DMatrix::identity(b.ncols(), b.ncols())).abs().max();
            prop_assert!(defect <= 1e-10);
        }
    }

    #[test]
    fn palindromic_chains_have_parity_modes(p in palindrome()) {
        let m = ModeData::axial(&chain(&p)).unwrap();
        let n = p.len();
        for k in 0..m.len() {
            let v = m.eigenvectors.column(k);
            let even = (0..n).map(|j| (v[j] - v[n - 1 - j]).abs()).fold(0.0, f64::max);
            let odd = (0..n).map(|j| (v[j] + v[n - 1 - j]).abs()).fold(0.0, f64::max);
            prop_assert!(even.min(odd) <= 1e-8);
        }
    }

    #[test]
    fn epsilon_units_do_not_depend_on_the_gradient(
        p in pattern(5),
        omega in 0.2..4.0f64,
        b1 in 1.0..50.0f64,
        b2 in 1.0..50.0f64,
    ) {
        let config = chain(&p);
        let modes = ModeData::axial(&config).unwrap();
        prop_assume!(modes.frequencies().iter().all(|w| (w - omega).abs() > 0.05));
        let c1 = coupling_set(&modes, &config, &FieldDrive::axial(b1, omega).unwrap()).unwrap();
        let c2 = coupling_set(&modes, &config, &FieldDrive::axial(b2, omega).unwrap()).unwrap();
        prop_assert_eq!(&c1.j_light, &c2.j_light);
        prop_assert_eq!(&c1.j_mixed, &c2.j_mixed);
        prop_assert_eq!(&c1.anisotropy, &c2.anisotropy);
        let ratio = epsilon_scale(&config, &FieldDrive::axial(b2, omega).unwrap())
            / epsilon_scale(&config, &FieldDrive::axial(b1, omega).unwrap());
        prop_assert!((ratio / (b2 * b2 / (b1 * b1)) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn transverse_ising_is_hermitian_and_flip_symmetric((j, j13, a) in three_site_couplings(), b in 0.0..3.0f64) {
        let basis = SpinBasis::new(CrystalConfig::ca_mn_ca().spins()).unwrap();
        let hz = build_effective_z(&CouplingSet::three_site(j, j13, a), &basis).unwrap();
        let off_diagonal = (0..hz.dim())
            .flat_map(|r| (0..hz.dim()).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|rc| hz.matrix[rc].norm())
            .fold(0.0, f64::max);
        prop_assert_eq!(off_diagonal, 0.0);
        let h = build_transverse_ising(&hz, b);
        prop_assert!(h.hermiticity_defect() <= 1e-12);
        prop_assert!(max_abs(&commutator(&h.matrix, &basis.flip_operator())) <= 1e-12);
    }

    #[test]
    fn flipped_sets_have_equal_population((j, j13, a) in three_site_couplings(), b in 0.01..3.0f64) {
        let basis = SpinBasis::new(CrystalConfig::ca_mn_ca().spins()).unwrap();
        let hz = build_effective_z(&CouplingSet::three_site(j, j13, a), &basis).unwrap();
        let s = diagonalize(&build_transverse_ising(&hz, b));
        let m = ground_manifold(&s, default_tolerance(s.energies[0]));
        // a nearly split doublet makes single eigenvectors ill-conditioned
        let d = m.degeneracy();
        prop_assume!(d == s.energies.len() || s.energies[d] - s.energies[d - 1] > 1e-2);
        // one member of each pair, so a set and its flip are distinct
        let sets = [
            ConfigSet::new("a", vec![vec![1, 6, 1], vec![1, -2, -1]]),
            ConfigSet::new("b", vec![vec![-1, 0, 1], vec![1, 4, 1]]),
        ];
        for set in sets {
            let p = populations(&m, &basis, &[set.clone(), set.flipped()]).unwrap();
            prop_assert!((p[0] - p[1]).abs() <= 1e-10, "{} vs {}", p[0], p[1]);
        }
    }

    #[test]
    fn spin_algebra_holds(twice in 1u32..=9) {
        let s = Spin::from_twice(twice).unwrap();
        let (x, y, z) = spin_operators(s);
        let i = Complex64::new(0.0, 1.0);
        prop_assert!(max_abs(&(commutator(&x, &y) - &z * i)) <= 1e-12);
        prop_assert!(max_abs(&(commutator(&y, &z) - &x * i)) <= 1e-12);
        let casimir: CMatrix = &x * &x + &y * &y + &z * &z;
        let v = s.value() * (s.value() + 1.0);
        prop_assert!(max_abs(&(casimir - CMatrix::identity(s.dim(), s.dim()) * Complex64::new(v, 0.0))) <= 1e-12);
    }

    #[test]
    fn probe_shift_is_affine_in_the_other_spins(
        heavy in prop::collection::vec(-2i32..=2, 1..=3),
        k in 0usize..3,
        b in 1.0..40.0f64,
    ) {
        // probe at site 0, heavy ions after it
        let mut species = vec![Species::calcium40()];
        species.extend(heavy.iter().map(|_| Species::manganese50()));
        let setup = ReadoutSetup::new(b, std::f64::consts::TAU * 1e5, species, 0).unwrap();
        let k = k % heavy.len();
        let mut m: Vec<i32> = std::iter::once(1).chain(heavy.iter().map(|h| 2 * h)).collect();
        let d = |m: &[i32]| spin_dependent_shift(&setup, m).unwrap()[0];
        let base = d(&m);
        // second difference along one heavy projection vanishes
        let mut steps = Vec::new();
        for delta in [-2, 2] {
            m[k + 1] += delta;
            steps.push(d(&m) - base);
            m[k + 1] -= delta;
        }
        prop_assert!((steps[0] + steps[1]).abs() <= 1e-12 * base.abs().max(1e-9));
        // the probe's own projection does not move it
        m[0] = -1;
        prop_assert!((d(&m) - base).abs() <= 1e-12 * (base.abs() + 1e-8));
    }

    #[test]
    fn zeeman_shift_scales_with_gradient_squared(b in 1.0..40.0f64, scale in 0.5..4.0f64) {
        let species = vec![Species::calcium40(), Species::manganese50(), Species::calcium40()];
        let m = [1, 6, 1];
        let shift = |g: f64| {
            let setup = ReadoutSetup::new(g, std::f64::consts::TAU * 1e5, species.clone(), 0).unwrap();
            let d = spin_dependent_shift(&setup, &m).unwrap()[0];
            zeeman_splitting(&setup, 0, d)
        };
        let ratio = shift(b * scale) / shift(b);
        prop_assert!((ratio / (scale * scale) - 1.0).abs() <= 1e-12);
    }
}

//! Ion chain definition and dimensionless equilibrium positions.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::eigh_real;
use crate::modes;
use crate::{Error, Result};

/// Non-negative half-integer spin, stored as `2s`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);

    /// Spin from `2s`. Zero is rejected.
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::invalid("spin", "spin must be at least 1/2"));
        }
        Ok(Spin(twice))
    }

    pub fn new(s: f64) -> Result<Self> {
        let twice = 2.0 * s;
        if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
            return Err(Error::invalid("spin", format!("{s} is not a positive half-integer")));
        }
        Ok(Spin(twice.round() as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    /// Local Hilbert space dimension `2s + 1`.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn is_half(self) -> bool {
        self.0 == 1
    }

    /// `2m` for the local state index `k`, states ordered `m = s, s-1, ..., -s`.
    pub fn twice_m(self, k: usize) -> i32 {
        self.0 as i32 - 2 * k as i32
    }

    /// Local state index of `2m`, if it lies in `[-s, s]` with the right parity.
    pub fn index_of(self, twice_m: i32) -> Option<usize> {
        let s2 = self.0 as i32;
        if twice_m.abs() > s2 || (s2 - twice_m) % 2 != 0 {
            return None;
        }
        Some(((s2 - twice_m) / 2) as usize)
    }
}

impl TryFrom<f64> for Spin {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Spin::new(s)
    }
}

impl From<Spin> for f64 {
    fn from(s: Spin) -> f64 {
        s.value()
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// An ion species: mass in atomic mass units, electronic spin and Landé g.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub name: String,
    pub mass: f64,
    pub spin: Spin,
    pub g_factor: f64,
}

impl Species {
    pub fn new(name: impl Into<String>, mass: f64, spin: Spin, g_factor: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::invalid("mass", format!("{mass} must be positive")));
        }
        if !g_factor.is_finite() {
            return Err(Error::invalid("g_factor", "must be finite"));
        }
        Ok(Species {
            name: name.into(),
            mass,
            spin,
            g_factor,
        })
    }

    /// ⁴⁰Ca⁺: spin 1/2, g = 2.
    pub fn calcium40() -> Self {
        Species {
            name: "Ca".into(),
            mass: 40.0,
            spin: Spin::HALF,
            g_factor: 2.0,
        }
    }

    /// ⁵⁰Mn⁺ (⁷S₃ ground state): spin 3, g = 2.
    pub fn manganese50() -> Self {
        Species {
            name: "Mn".into(),
            mass: 50.0,
            spin: Spin(6),
            g_factor: 2.0,
        }
    }

    /// Look up a named preset (`"Ca"`, `"Ca40"`, `"Mn"`, `"Mn50"`).
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "Ca" | "Ca40" | "40Ca+" => Some(Self::calcium40()),
            "Mn" | "Mn50" | "50Mn+" => Some(Self::manganese50()),
            _ => None,
        }
    }
}

/// Trap frequencies of the reference (lightest) species.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Axial angular frequency, rad/s.
    pub omega_z: f64,
    /// Anisotropy `α = ω_z / ω_r⁰`.
    pub alpha: f64,
}

impl TrapParams {
    pub fn new(omega_z: f64, alpha: f64) -> Result<Self> {
        if !(omega_z.is_finite() && omega_z > 0.0) {
            return Err(Error::invalid("omega_z", format!("{omega_z} must be positive")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} must lie in (0, 1)")));
        }
        Ok(TrapParams { omega_z, alpha })
    }

    /// Bare radial frequency ω_r⁰ of the reference species, rad/s.
    pub fn omega_r0(&self) -> f64 {
        self.omega_z / self.alpha
    }

    /// Axial frequency of a species with mass ratio `mu` to the reference.
    /// The axial potential is mass independent, so ω_z ∝ mass^(-1/2).
    pub fn axial_frequency(&self, mu: f64) -> f64 {
        self.omega_z / mu.sqrt()
    }

    /// Radial frequency including the axial reduction,
    /// `ω_r = ω_r⁰ √(1 − ω_z²/(2 ω_r⁰²))`, with ω_r⁰ ∝ 1/mass.
    /// `None` when the reduction makes it imaginary.
    pub fn radial_frequency(&self, mu: f64) -> Option<f64> {
        let wr0 = self.omega_r0() / mu;
        let wz = self.axial_frequency(mu);
        let arg = 1.0 - wz * wz / (2.0 * wr0 * wr0);
        (arg > 0.0).then(|| wr0 * arg.sqrt())
    }
}

/// Ordered ion chain in a trap. Chain order is an input and is never inferred.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrystalConfig {
    pub species: Vec<Species>,
    pub trap: TrapParams,
}

impl CrystalConfig {
    pub fn new(species: Vec<Species>, trap: TrapParams) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::invalid("species", "at least one ion is required"));
        }
        let config = CrystalConfig { species, trap };
        for (i, &mu) in config.mass_ratios().iter().enumerate() {
            if config.trap.radial_frequency(mu).is_none() {
                return Err(Error::invalid(
                    "alpha",
                    format!("radial frequency of ion {i} is imaginary for alpha = {}", config.trap.alpha),
                ));
            }
        }
        Ok(config)
    }

    /// Build a chain from preset species names, e.g. `["Ca", "Mn", "Ca"]`.
    pub fn from_names<S: AsRef<str>>(names: &[S], trap: TrapParams) -> Result<Self> {
        let species = names
            .iter()
            .map(|n| {
                Species::preset(n.as_ref())
                    .ok_or_else(|| Error::invalid("species", format!("unknown preset `{}`", n.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(species, trap)
    }

    /// The {Ca⁺, Mn⁺, Ca⁺} chain with a unit-free default trap (α = 0.1).
    pub fn ca_mn_ca() -> Self {
        Self::from_names(&["Ca", "Mn", "Ca"], default_trap()).expect("valid preset")
    }

    /// The alternating {Ca⁺, Mn⁺, Ca⁺, Mn⁺, Ca⁺} chain.
    pub fn ca_mn_ca_mn_ca() -> Self {
        Self::from_names(&["Ca", "Mn", "Ca", "Mn", "Ca"], default_trap()).expect("valid preset")
    }

    pub fn len(&self) -> usize {
        self.species.len()
    }

    pub fn is_empty(&self) -> bool {
        self.species.is_empty()
    }

    /// Index of the reference species: the lightest ion, first one on ties.
    pub fn reference_index(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.species.iter().enumerate() {
            if s.mass < self.species[best].mass {
                best = i;
            }
        }
        best
    }

    pub fn reference(&self) -> &Species {
        &self.species[self.reference_index()]
    }

    /// Mass of each ion divided by the reference mass.
    pub fn mass_ratios(&self) -> Vec<f64> {
        let m = self.reference().mass;
        self.species.iter().map(|s| s.mass / m).collect()
    }

    pub fn spins(&self) -> Vec<Spin> {
        self.species.iter().map(|s| s.spin).collect()
    }

    /// Sites carrying spin 1/2 (the σ operators).
    pub fn light_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.species[i].spin.is_half()).collect()
    }

    /// Sites carrying spin above 1/2 (the S operators).
    pub fn heavy_sites(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.species[i].spin.is_half()).collect()
    }

    /// Equilibrium positions in units of ℓ. Depends only on the ion count.
    pub fn equilibrium_positions(&self) -> Result<Vec<f64>> {
        equilibrium_positions(self.len())
    }

    /// True if the mass pattern reads the same in both directions.
    pub fn is_palindromic(&self) -> bool {
        let n = self.len();
        (0..n / 2).all(|i| {
            let (a, b) = (&self.species[i], &self.species[n - 1 - i]);
            a.mass == b.mass && a.spin == b.spin && a.g_factor == b.g_factor
        })
    }
}

/// A dimensionless trap with ω_z = 1 rad/s and α = 0.1, for unit-free work.
pub fn default_trap() -> TrapParams {
    TrapParams {
        omega_z: 1.0,
        alpha: 0.1,
    }
}

const MAX_NEWTON_ITERATIONS: usize = 200;
const FORCE_TOLERANCE: f64 = 1e-12;

/// Gradient of the dimensionless axial potential
/// `V(u) = Σ u_j²/2 + Σ_{i<j} 1/|u_i − u_j|`.
pub fn axial_gradient(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let coulomb: f64 = (0..n)
                .filter(|&p| p != i)
                .map(|p| {
                    let d = u[i] - u[p];
                    d.signum() / (d * d)
                })
                .sum();
            u[i] - coulomb
        })
        .collect()
}

/// Dimensionless equilibrium positions of `n` ions in a harmonic axial
/// potential, sorted ascending.
///
/// Damped Newton iteration on the force equations starting from a uniform
/// spacing of `2.018 / n^0.559`. The result is mirror-symmetrised, which the
/// exact solution is.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("n", "at least one ion is required"));
    }
    if n == 1 {
        return Ok(vec![0.0]);
    }
    let spacing = 2.018 / (n as f64).powf(0.559);
    let center = (n as f64 + 1.0) / 2.0;
    let mut u: Vec<f64> = (1..=n).map(|j| (j as f64 - center) * spacing).collect();

    let norm = |g: &[f64]| g.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut grad = axial_gradient(&u);
    let mut residual = norm(&grad);
    let mut iterations = 0;
    while residual > FORCE_TOLERANCE {
        if iterations == MAX_NEWTON_ITERATIONS {
            return Err(Error::SolverFailure { iterations, residual });
        }
        iterations += 1;
        let hessian = DMatrix::from_row_slice(n, n, &modes::coulomb_hessian(&u)?);
        let rhs = DVector::from_iterator(n, grad.iter().map(|g| -g));
        let step = hessian
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or(rhs);

        // Backtrack until the force residual drops and the ordering survives.
        let mut damping = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, d)| x + damping * d).collect();
            let ordered = trial.windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let g = axial_gradient(&trial);
                let r = norm(&g);
                if r < residual || damping < 1e-6 {
                    u = trial;
                    grad = g;
                    residual = r;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-12 {
                return Err(Error::SolverFailure { iterations, residual });
            }
        }
    }

    for j in 0..n / 2 {
        let half = 0.5 * (u[n - 1 - j] - u[j]);
        u[j] = -half;
        u[n - 1 - j] = half;
    }
    if n % 2 == 1 {
        u[n / 2] = 0.0;
    }
    Ok(u)
}

/// Outcome of the linear-chain stability test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// Smallest eigenvalue of the mass-weighted radial Hessian.
    pub min_radial_eigenvalue: f64,
}

/// The linear chain is stable iff every radial eigenvalue is positive.
pub fn linear_regime_check(config: &CrystalConfig) -> Result<Stability> {
    let u = config.equilibrium_positions()?;
    let b = modes::radial_hessian(&u, config)?;
    let (vals, _) = eigh_real(&b);
    let min = vals[0];
    Ok(Stability {
        stable: min > 0.0,
        min_radial_eigenvalue: min,
    })
}

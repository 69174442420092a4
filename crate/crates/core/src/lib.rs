//! Quantum magnetism in impurity-doped linear ion crystals.
//!
//! The pipeline runs from trap parameters to observables:
//!
//! 1. [`crystal`]: species, trap, dimensionless equilibrium positions.
//! 2. [`modes`]: mass-weighted axial and radial Hessians and their normal modes.
//! 3. [`couplings`]: phonon-mediated spin-spin couplings and single-ion
//!    anisotropy for an oscillating gradient drive, in units of `ε`.
//! 4. [`hamiltonian`]: spin operators for arbitrary spin, mixed-dimension
//!    tensor-product bases and the model Hamiltonians.
//! 5. [`groundstate`]: exact diagonalization, populations, phase labels,
//!    level crossings and phase diagrams.
//! 6. [`readout`]: static-gradient (Stern-Gerlach) readout and state preparation.
//! 7. [`dynamics`]: spin-phonon propagation checks of the effective Hamiltonian
//!    and adiabatic ramps.
//!
//! Lengths are measured in `ℓ = (e²/4πε₀ m ω_z²)^(1/3)`, frequencies in the
//! axial trap frequency `ω_z` of the reference (lightest) species, and spin
//! couplings in `ε`. SI units only appear in [`readout`] and in
//! [`couplings::epsilon_scale`].

pub mod cli;
pub mod config;
pub mod constants;
pub mod couplings;
pub mod crystal;
pub mod dynamics;
mod error;
pub mod groundstate;
pub mod hamiltonian;
pub mod linalg;
pub mod modes;
pub mod readout;

pub use error::{Error, Result};

pub use couplings::{Axis, CouplingSet, FieldDrive};
pub use crystal::{CrystalConfig, Species, Spin, TrapParams};
pub use hamiltonian::{SpinBasis, SpinHamiltonian};
pub use modes::ModeData;

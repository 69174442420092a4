//! Time evolution: full spin-phonon dynamics against the averaged spin model,
//! and adiabatic ramps of the spin Hamiltonian.
//!
//! Time in the spin-phonon part is measured in `1/ω_z` and frequencies in
//! `ω_z`. In the interaction picture the drive couples each mode `n` through
//! `F_n = Σ_i Ω_in S_i`:
//!
//! ```text
//! H(t) = −2 cos(ωt) Σ_n F_n (a_n† e^{iω_n t} + a_n e^{−iω_n t})
//! ```
//!
//! `F_n` is diagonal in the spin z basis, so each spin configuration drives
//! every mode independently and the state is a sum of product branches.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::couplings::{resonance_guard, Axis, DEFAULT_GUARD_BAND};
use crate::crystal::{CrystalConfig, Spin};
use crate::groundstate::{default_tolerance, ground_manifold, Spectrum};
use crate::hamiltonian::{coupling_component, transverse_operator, SpinBasis, SpinHamiltonian};
use crate::linalg::{eigh, eigh_real, CMatrix, CVector};
use crate::modes::ModeData;
use crate::{Error, Result};

/// Population allowed in the highest retained Fock level.
pub const LEAKAGE_THRESHOLD: f64 = 1e-4;
/// Integration steps per period of the fastest frame frequency.
pub const STEPS_PER_PERIOD: f64 = 50.0;
/// Smallest gap in the symmetric sector that a ramp may pass without a warning.
pub const CROSSING_GAP: f64 = 1e-6;

const MAX_SITES: usize = 2;
const MAX_MODES: usize = 2;
const CUTOFF_RANGE: (usize, usize) = (2, 8);

/// A few spins coupled to a few Fock-truncated modes.
#[derive(Clone, Debug)]
pub struct TruncatedSystem {
    pub basis: SpinBasis,
    /// Mode frequencies, units of ω_z.
    pub mode_frequencies: Vec<f64>,
    /// Ω_in in units of ω_z, rows sites, columns modes.
    pub rabi: DMatrix<f64>,
    /// Drive frequency, units of ω_z.
    pub drive: f64,
    /// Highest retained Fock level per mode.
    pub n_max: usize,
    pub guard_band: f64,
}

impl TruncatedSystem {
    pub fn new(basis: SpinBasis, mode_frequencies: Vec<f64>, rabi: DMatrix<f64>, drive: f64, n_max: usize) -> Result<Self> {
        if basis.n_sites() > MAX_SITES {
            return Err(Error::invalid("sites", format!("{} > {MAX_SITES}", basis.n_sites())));
        }
        if mode_frequencies.is_empty() || mode_frequencies.len() > MAX_MODES {
            return Err(Error::invalid("modes", format!("{} not in 1..={MAX_MODES}", mode_frequencies.len())));
        }
        if !(CUTOFF_RANGE.0..=CUTOFF_RANGE.1).contains(&n_max) {
            return Err(Error::invalid("n_max", format!("{n_max} not in {}..={}", CUTOFF_RANGE.0, CUTOFF_RANGE.1)));
        }
        if rabi.shape() != (basis.n_sites(), mode_frequencies.len()) {
            return Err(Error::invalid("rabi", format!("shape {:?}", rabi.shape())));
        }
        if !(drive.is_finite() && drive > 0.0) || mode_frequencies.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("frequency", "drive and mode frequencies must be positive"));
        }
        Ok(TruncatedSystem {
            basis,
            mode_frequencies,
            rabi,
            drive,
            n_max,
            guard_band: DEFAULT_GUARD_BAND,
        })
    }

    /// Keep the axial modes `mode_indices` of a crystal. `epsilon` is the
    /// coupling scale in units of ω_z; the Rabi frequencies follow
    /// `Ω_in = b_in √(ε / (2 μ_i ω_n)) g_i / g_ref`.
    pub fn from_crystal(config: &CrystalConfig, mode_indices: &[usize], drive: f64, epsilon: f64, n_max: usize) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::invalid("epsilon", format!("{epsilon} must be non-negative")));
        }
        let modes = ModeData::axial(config)?;
        let freqs = modes.frequencies();
        if let Some(&bad) = mode_indices.iter().find(|&&n| n >= modes.len()) {
            return Err(Error::invalid("mode", format!("index {bad} out of {}", modes.len())));
        }
        let mu = config.mass_ratios();
        let g_ref = config.reference().g_factor;
        let rabi = DMatrix::from_fn(config.len(), mode_indices.len(), |i, k| {
            let n = mode_indices[k];
            let g = config.species[i].g_factor / g_ref;
            modes.vector_entry(i, n) * (epsilon / (2.0 * mu[i] * freqs[n])).sqrt() * g
        });
        let basis = SpinBasis::new(config.spins())?;
        Self::new(basis, mode_indices.iter().map(|&n| freqs[n]).collect(), rabi, drive, n_max)
    }

    /// Same system with every Rabi frequency multiplied by `factor`
    /// (rescaling the drive gradient).
    pub fn scaled(&self, factor: f64) -> Self {
        TruncatedSystem {
            rabi: &self.rabi * factor,
            ..self.clone()
        }
    }

    pub fn with_cutoff(&self, n_max: usize) -> Result<Self> {
        Self::new(self.basis.clone(), self.mode_frequencies.clone(), self.rabi.clone(), self.drive, n_max)
    }

    /// `max |Ω_in| / |ω − ω_n|`.
    pub fn rabi_ratio(&self) -> f64 {
        let mut worst = 0.0f64;
        for (n, &wn) in self.mode_frequencies.iter().enumerate() {
            for i in 0..self.basis.n_sites() {
                worst = worst.max(self.rabi[(i, n)].abs() / (self.drive - wn).abs());
            }
        }
        worst
    }

    fn guard(&self) -> Result<()> {
        let modes = self.mode_proxy();
        let verdict = resonance_guard(self.drive, &modes, self.guard_band);
        if verdict.pass {
            Ok(())
        } else {
            Err(Error::GuardedResonance {
                axis: 'z',
                mode: verdict.nearest_mode,
                drive: self.drive,
                mode_frequency: self.mode_frequencies[verdict.nearest_mode],
            })
        }
    }

    fn mode_proxy(&self) -> ModeData {
        let k = self.mode_frequencies.len();
        ModeData {
            axis: Axis::Z,
            eigenvalues: self.mode_frequencies.iter().map(|w| w * w).collect(),
            eigenvectors: DMatrix::identity(k, k),
            frequency_unit: 1.0,
        }
    }

    /// `f_cn = Σ_i Ω_in m_i(c)` for every configuration and mode.
    fn branch_forces(&self) -> Vec<Vec<f64>> {
        (0..self.basis.dim())
            .map(|c| {
                let config = self.basis.configuration(c);
                (0..self.mode_frequencies.len())
                    .map(|n| {
                        config
                            .iter()
                            .enumerate()
                            .map(|(i, &tm)| self.rabi[(i, n)] * 0.5 * f64::from(tm))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }

    /// `H_eff = Σ_n 2ω_n/(ω² − ω_n²) F_n²`, units of ω_z.
    pub fn effective_hamiltonian(&self) -> SpinHamiltonian {
        let forces = self.branch_forces();
        let mut h = SpinHamiltonian::zeros(self.basis.clone());
        for (c, f) in forces.iter().enumerate() {
            let e: f64 = self
                .mode_frequencies
                .iter()
                .zip(f)
                .map(|(&wn, &fc)| 2.0 * wn / (self.drive * self.drive - wn * wn) * fc * fc)
                .sum();
            h.matrix[(c, c)] = Complex64::new(e, 0.0);
        }
        h
    }

    /// Coefficient of `σ₁σ₂` (σ for spin-1/2, S otherwise) in the effective model.
    pub fn pair_coupling(&self) -> Result<f64> {
        if self.basis.n_sites() != 2 {
            return Err(Error::invalid("sites", "pair coupling needs two sites"));
        }
        let scale: f64 = self
            .basis
            .spins()
            .iter()
            .map(|s| if s.is_half() { 0.5 } else { 1.0 })
            .product();
        let c: f64 = self
            .mode_frequencies
            .iter()
            .enumerate()
            .map(|(n, &wn)| 4.0 * wn * self.rabi[(0, n)] * self.rabi[(1, n)] / (self.drive * self.drive - wn * wn))
            .sum();
        Ok(c * scale)
    }

    /// `2π / |J₁₂|`.
    pub fn coupling_period(&self) -> Result<f64> {
        let j = self.pair_coupling()?;
        if j == 0.0 {
            return Err(Error::invalid("coupling", "pair coupling vanishes"));
        }
        Ok(std::f64::consts::TAU / j.abs())
    }

    /// Number of midpoint steps for `duration`.
    pub fn steps_for(&self, duration: f64) -> usize {
        let fastest = self.drive + self.mode_frequencies.iter().cloned().fold(0.0, f64::max);
        (duration * STEPS_PER_PERIOD * fastest).ceil().max(1.0) as usize
    }
}

/// Spin amplitudes times per-mode phonon branches.
#[derive(Clone, Debug)]
pub struct FullState {
    pub spin: CVector,
    /// `branches[c][n]` is the Fock-space state of mode `n` given spin configuration `c`.
    pub branches: Vec<Vec<CVector>>,
    pub time: f64,
}

impl FullState {
    fn vacuum(spin: &CVector, modes: usize, n_max: usize) -> Self {
        let mut vac = CVector::zeros(n_max + 1);
        vac[0] = Complex64::new(1.0, 0.0);
        FullState {
            spin: spin.clone(),
            branches: vec![vec![vac; modes]; spin.len()],
            time: 0.0,
        }
    }

    pub fn norm(&self) -> f64 {
        self.spin
            .iter()
            .zip(&self.branches)
            .map(|(a, b)| a.norm_sqr() * b.iter().map(|v| v.norm_squared()).product::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// `ρ_cc' = ψ_c ψ_c'* Π_n ⟨φ_c'n | φ_cn⟩`.
    pub fn reduced_density(&self) -> CMatrix {
        let d = self.spin.len();
        CMatrix::from_fn(d, d, |c, cp| {
            let overlap: Complex64 = self.branches[c]
                .iter()
                .zip(&self.branches[cp])
                .map(|(a, b)| b.dotc(a))
                .product();
            self.spin[c] * self.spin[cp].conj() * overlap
        })
    }

    /// Largest population in the highest retained Fock level over branches.
    pub fn top_population(&self) -> f64 {
        self.branches
            .iter()
            .flatten()
            .map(|v| v[v.len() - 1].norm_sqr())
            .fold(0.0, f64::max)
    }
}

/// Midpoint exponential stepper for one driven truncated mode.
struct FockStepper {
    /// Eigenvectors of `a + a†` (real).
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl FockStepper {
    fn new(n_max: usize) -> Self {
        let d = n_max + 1;
        let mut x = DMatrix::<f64>::zeros(d, d);
        for k in 1..d {
            let s = (k as f64).sqrt();
            x[(k - 1, k)] = s;
            x[(k, k - 1)] = s;
        }
        let (values, vectors) = eigh_real(&x);
        FockStepper { vectors, values }
    }

    /// `exp(−i dt g (a† e^{iθ} + a e^{−iθ}))` applied in place.
    fn apply(&self, v: &mut CVector, g_dt: f64, theta: f64, buf: &mut CVector) {
        let d = v.len();
        for (k, x) in v.iter_mut().enumerate() {
            *x *= Complex64::from_polar(1.0, -theta * k as f64);
        }
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..d {
                acc += v[k] * self.vectors[(k, j)];
            }
            buf[j] = acc * Complex64::from_polar(1.0, -g_dt * self.values[j]);
        }
        for k in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                acc += buf[j] * self.vectors[(k, j)];
            }
            v[k] = acc * Complex64::from_polar(1.0, theta * k as f64);
        }
    }
}

/// Integrate the spin-phonon model from the phonon vacuum, calling
/// `observe` at `checkpoints` evenly spaced times (including `duration`).
pub fn full_propagate_observed<F>(
    system: &TruncatedSystem,
    spin_state: &CVector,
    duration: f64,
    checkpoints: usize,
    mut observe: F,
) -> Result<FullState>
where
    F: FnMut(&FullState),
{
    if spin_state.len() != system.basis.dim() {
        return Err(Error::BasisMismatch(format!("spin state length {} vs {}", spin_state.len(), system.basis.dim())));
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("duration", format!("{duration}")));
    }
    let modes = system.mode_frequencies.len();
    let mut state = FullState::vacuum(spin_state, modes, system.n_max);
    let checkpoints = checkpoints.max(1);
    let per_block = system.steps_for(duration).div_ceil(checkpoints);
    let dt = duration / (per_block * checkpoints) as f64;
    let forces = system.branch_forces();
    let stepper = FockStepper::new(system.n_max);
    let mut buf = CVector::zeros(system.n_max + 1);

    for block in 0..checkpoints {
        for step in 0..per_block {
            let t_mid = ((block * per_block + step) as f64 + 0.5) * dt;
            let drive = -2.0 * (system.drive * t_mid).cos();
            for (c, branch) in state.branches.iter_mut().enumerate() {
                for (n, v) in branch.iter_mut().enumerate() {
                    let g = drive * forces[c][n];
                    if g != 0.0 {
                        stepper.apply(v, g * dt, system.mode_frequencies[n] * t_mid, &mut buf);
                    }
                }
            }
        }
        state.time = ((block + 1) * per_block) as f64 * dt;
        let top = state.top_population();
        if top >= LEAKAGE_THRESHOLD {
            return Err(Error::CutoffTooSmall {
                population: top,
                threshold: LEAKAGE_THRESHOLD,
            });
        }
        observe(&state);
    }
    Ok(state)
}

pub fn full_propagate(system: &TruncatedSystem, spin_state: &CVector, duration: f64) -> Result<FullState> {
    full_propagate_observed(system, spin_state, duration, 16, |_| {})
}

/// `exp(−i H t) ψ` by spectral decomposition.
pub fn effective_propagate(h: &SpinHamiltonian, state: &CVector, duration: f64) -> Result<CVector> {
    if state.len() != h.dim() {
        return Err(Error::BasisMismatch(format!("state length {} vs {}", state.len(), h.dim())));
    }
    Ok(crate::linalg::unitary_exp(&h.matrix, duration) * state)
}

/// Named spin observables: single-site σ_q (S_q above spin 1/2) and all
/// two-site products.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    pub names: Vec<String>,
    pub operators: Vec<CMatrix>,
    /// Marks the two-site correlators.
    pub correlator: Vec<bool>,
}

impl ObservableSet {
    pub fn standard(basis: &SpinBasis) -> Self {
        let mut names = Vec::new();
        let mut operators = Vec::new();
        let mut correlator = Vec::new();
        let op = |site: usize, q: Axis| coupling_component(basis.spins()[site], q);
        for i in 0..basis.n_sites() {
            for q in Axis::ALL {
                names.push(format!("{}{i}", q.as_char()));
                operators.push(basis.embed(&[(i, &op(i, q))]));
                correlator.push(false);
            }
        }
        for i in 0..basis.n_sites() {
            for j in i + 1..basis.n_sites() {
                for q in Axis::ALL {
                    for p in Axis::ALL {
                        names.push(format!("{}{}{i}{j}", q.as_char(), p.as_char()));
                        operators.push(basis.embed(&[(i, &op(i, q)), (j, &op(j, p))]));
                        correlator.push(true);
                    }
                }
            }
        }
        ObservableSet {
            names,
            operators,
            correlator,
        }
    }

    pub fn expectations_density(&self, rho: &CMatrix) -> Vec<f64> {
        self.operators.iter().map(|o| (rho * o).trace().re).collect()
    }

    pub fn expectations_pure(&self, psi: &CVector) -> Vec<f64> {
        self.operators.iter().map(|o| psi.dotc(&(o * psi)).re).collect()
    }
}

/// Full versus effective evolution over a time window.
#[derive(Clone, Debug)]
pub struct Comparison {
    /// Max |full − effective| over observables and checkpoints.
    pub deviation: f64,
    /// Same, restricted to two-site correlators.
    pub correlator_deviation: f64,
    pub times: Vec<f64>,
    pub observables: Vec<String>,
    pub full: Vec<Vec<f64>>,
    pub effective: Vec<Vec<f64>>,
    pub max_norm_error: f64,
    pub max_top_population: f64,
}

/// Product state with every spin in its `+x` extremal state.
pub fn x_polarized_state(basis: &SpinBasis) -> CVector {
    let (_, vecs) = eigh(&transverse_operator(basis));
    vecs.column(basis.dim() - 1).into_owned()
}

/// Propagate `spin_state` with both models and compare the standard
/// observables at `checkpoints` times. Refuses inside the guard band.
pub fn compare_effective(system: &TruncatedSystem, spin_state: &CVector, duration: f64, checkpoints: usize) -> Result<Comparison> {
    system.guard()?;
    let obs = ObservableSet::standard(&system.basis);
    let h_eff = system.effective_hamiltonian();
    let mut times = Vec::new();
    let mut full = Vec::new();
    let mut effective = Vec::new();
    let mut max_norm_error = 0.0f64;
    let mut max_top_population = 0.0f64;
    let mut failure = None;
    full_propagate_observed(system, spin_state, duration, checkpoints, |s| {
        times.push(s.time);
        max_norm_error = max_norm_error.max((s.norm() - spin_state.norm()).abs());
        max_top_population = max_top_population.max(s.top_population());
        full.push(obs.expectations_density(&s.reduced_density()));
        match effective_propagate(&h_eff, spin_state, s.time) {
            Ok(psi) => effective.push(obs.expectations_pure(&psi)),
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut deviation = 0.0f64;
    let mut correlator_deviation = 0.0f64;
    for (f, e) in full.iter().zip(&effective) {
        for (k, (a, b)) in f.iter().zip(e).enumerate() {
            let d = (a - b).abs();
            deviation = deviation.max(d);
            if obs.correlator[k] {
                correlator_deviation = correlator_deviation.max(d);
            }
        }
    }
    Ok(Comparison {
        deviation,
        correlator_deviation,
        times,
        observables: obs.names,
        full,
        effective,
        max_norm_error,
        max_top_population,
    })
}

/// Accumulated two-spin phase `(E↑↑ − E↑↓ − E↓↑ + E↓↓) t / 2` of a spin-1/2
/// pair, tracked continuously from the full evolution of the `+x` state.
/// The effective model predicts `2 J₁₂ t`.
pub fn two_spin_phase(system: &TruncatedSystem, duration: f64, checkpoints: usize) -> Result<f64> {
    let spins = system.basis.spins();
    if spins.len() != 2 || !spins.iter().all(|s| s.is_half()) {
        return Err(Error::invalid("sites", "two-spin phase needs two spin-1/2 sites"));
    }
    let psi = x_polarized_state(&system.basis);
    let idx = |a: i32, b: i32| system.basis.index_of(&[a, b]).expect("spin-1/2 pair");
    let (uu, ud, du, dd) = (idx(1, 1), idx(1, -1), idx(-1, 1), idx(-1, -1));
    let mut total = 0.0;
    let mut last = 0.0;
    full_propagate_observed(system, &psi, duration, checkpoints, |s| {
        let rho = s.reduced_density();
        // arg ρ(↑↑,↑↓) − arg ρ(↓↑,↓↓) = −4 J t
        let z = rho[(uu, ud)] * rho[(du, dd)].conj();
        let angle = z.arg();
        let mut delta = angle - last;
        delta -= std::f64::consts::TAU * (delta / std::f64::consts::TAU).round();
        total += delta;
        last = angle;
    })?;
    Ok(-total / 2.0)
}

/// Linear interpolation of the coupling scale `λ: 0 → 1` and the transverse
/// field `B_x: start → end` over `total_time` (units of 1/ε).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSchedule {
    pub total_time: f64,
    pub field_start: f64,
    pub field_end: f64,
    pub steps: usize,
    /// Hold λ at zero (for checks).
    pub frozen: bool,
}

impl RampSchedule {
    pub const DEFAULT_STEP: f64 = 0.05;

    pub fn new(total_time: f64, field_start: f64, field_end: f64) -> Result<Self> {
        if !(total_time.is_finite() && total_time >= 0.0) {
            return Err(Error::invalid("total_time", format!("{total_time}")));
        }
        if !(field_start.is_finite() && field_end.is_finite()) {
            return Err(Error::invalid("field", "must be finite"));
        }
        Ok(RampSchedule {
            total_time,
            field_start,
            field_end,
            steps: (total_time / Self::DEFAULT_STEP).ceil() as usize,
            frozen: false,
        })
    }

    pub fn frozen(mut self) -> Self {
        self.frozen = true;
        self
    }

    /// `(λ, B_x)` at time `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let s = if self.total_time > 0.0 { (t / self.total_time).clamp(0.0, 1.0) } else { 1.0 };
        let lambda = if self.frozen { 0.0 } else { s };
        (lambda, self.field_start + (self.field_end - self.field_start) * s)
    }
}

#[derive(Clone, Debug)]
pub struct RampReport {
    pub final_state: CVector,
    /// Weight of the final state in the ground manifold of `H(T)`, taken
    /// within the spin-flip sector of the initial state when it has one.
    pub fidelity: f64,
    /// Spin-flip parity of the initial state (+1, −1) if it is an eigenstate.
    pub parity: Option<i8>,
    /// Smallest gap above the ground level in that sector along the path.
    pub min_gap: f64,
    /// Set when that gap fell below `CROSSING_GAP`.
    pub crossing_warning: bool,
    pub steps: usize,
}

/// Orthonormal basis of the spin-flip sector with the given parity.
pub fn flip_sector(basis: &SpinBasis, parity: i8) -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut cols: Vec<CVector> = Vec::new();
    for c in 0..basis.dim() {
        let f = basis.flipped(c);
        let mut v = CVector::zeros(basis.dim());
        if c == f {
            if parity < 0 {
                continue;
            }
            v[c] = Complex64::new(1.0, 0.0);
        } else if c < f {
            v[c] = Complex64::new(r, 0.0);
            v[f] = Complex64::new(f64::from(parity) * r, 0.0);
        } else {
            continue;
        }
        cols.push(v);
    }
    CMatrix::from_columns(&cols)
}

fn parity_of(basis: &SpinBasis, psi: &CVector) -> Option<i8> {
    let x = basis.flip_operator();
    let xpsi = &x * psi;
    let scale = psi.norm().max(f64::MIN_POSITIVE);
    if (&xpsi - psi).norm() < 1e-10 * scale {
        Some(1)
    } else if (&xpsi + psi).norm() < 1e-10 * scale {
        Some(-1)
    } else {
        None
    }
}

/// Evolve `initial` under `H(t) = λ(t) H_z − B_x(t) Σ S_x` with midpoint
/// exponentials and report the final ground-state fidelity.
pub fn adiabatic_ramp(hz: &SpinHamiltonian, initial: &CVector, schedule: &RampSchedule) -> Result<RampReport> {
    if initial.len() != hz.dim() {
        return Err(Error::BasisMismatch(format!("state length {} vs {}", initial.len(), hz.dim())));
    }
    let sx = transverse_operator(&hz.basis);
    let h_at = |t: f64| {
        let (lambda, b) = schedule.at(t);
        &hz.matrix * Complex64::new(lambda, 0.0) - &sx * Complex64::new(b, 0.0)
    };
    let parity = parity_of(&hz.basis, initial);
    let sector = match parity {
        Some(p) => flip_sector(&hz.basis, p),
        None => CMatrix::identity(hz.dim(), hz.dim()),
    };
    let sector_spectrum = |h: &CMatrix| {
        let (energies, vecs) = eigh(&(sector.adjoint() * h * &sector));
        Spectrum {
            energies,
            states: &sector * vecs,
        }
    };
    let gap = |s: &Spectrum| if s.energies.len() < 2 { f64::INFINITY } else { s.energies[1] - s.energies[0] };

    let steps = if schedule.total_time > 0.0 { schedule.steps.max(1) } else { 0 };
    let mut psi = initial.clone();
    let mut min_gap = gap(&sector_spectrum(&h_at(0.0)));
    if steps > 0 {
        let dt = schedule.total_time / steps as f64;
        for k in 0..steps {
            let s = sector_spectrum(&h_at((k as f64 + 0.5) * dt));
            min_gap = min_gap.min(gap(&s));
            // the sector is invariant, so its spectral decomposition suffices
            let mut coeffs = s.states.adjoint() * &psi;
            for (c, e) in coeffs.iter_mut().zip(&s.energies) {
                *c *= Complex64::from_polar(1.0, -e * dt);
            }
            let outside = &psi - &s.states * (s.states.adjoint() * &psi);
            psi = &s.states * coeffs + outside;
        }
    }
    let final_spectrum = sector_spectrum(&h_at(schedule.total_time));
    min_gap = min_gap.min(gap(&final_spectrum));
    let manifold = ground_manifold(&final_spectrum, default_tolerance(final_spectrum.energies[0]));
    let fidelity = manifold.states.column_iter().map(|v| v.dotc(&psi).norm_sqr()).sum();
    Ok(RampReport {
        final_state: psi,
        fidelity,
        parity,
        min_gap,
        crossing_warning: min_gap < CROSSING_GAP,
        steps,
    })
}

/// Two spin-1/2 ions sharing one mode at unit frequency with `b = 1/√2`,
/// Rabi frequency set from `ratio = Ω / |ω − ω_n|`.
pub fn two_spin_scenario(drive: f64, ratio: f64, n_max: usize) -> Result<TruncatedSystem> {
    let basis = SpinBasis::new(vec![Spin::HALF, Spin::HALF])?;
    let omega = ratio * (drive - 1.0).abs();
    TruncatedSystem::new(basis, vec![1.0], DMatrix::from_element(2, 1, omega), drive, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::{coupling_set, FieldDrive};
    use crate::hamiltonian::{build_effective_z, build_transverse_ising};
    use crate::readout::prepare_initial_state;
    use crate::CouplingSet;

    fn norm_close(a: &CVector, b: &CVector) -> f64 {
        (a - b).norm()
    }

    #[test]
    fn zero_gradient_is_identity() {
        let s = two_spin_scenario(0.5, 0.0, 4).unwrap();
        let psi = x_polarized_state(&s.basis);
        let out = full_propagate(&s, &psi, 10.0).unwrap();
        assert!((out.reduced_density() - &psi * psi.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn sigma_z_is_conserved() {
        let basis = SpinBasis::new(vec![Spin::HALF]).unwrap();
        let s = TruncatedSystem::new(basis.clone(), vec![1.0], DMatrix::from_element(1, 1, 0.02), 0.6, 5).unwrap();
        let psi = CVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let sz = basis.embed(&[(0, &coupling_component(Spin::HALF, Axis::Z))]);
        let before = psi.dotc(&(&sz * &psi)).re;
        let mut worst = 0.0f64;
        full_propagate_observed(&s, &psi, 50.0, 10, |st| {
            let after = (st.reduced_density() * &sz).trace().re;
            worst = worst.max((after - before).abs());
            assert!((st.norm() - 1.0).abs() < 1e-8);
        })
        .unwrap();
        assert!(worst < 1e-10);
    }

    #[test]
    fn effective_matches_coupling_module() {
        // two equal ions, both modes kept: H_eff in ω_z units equals ε·H_z up to a constant
        let config = CrystalConfig::from_names(&["Ca", "Ca"], crate::crystal::default_trap()).unwrap();
        let eps = 1e-3;
        let s = TruncatedSystem::from_crystal(&config, &[0, 1], 0.7, eps, 4).unwrap();
        let modes = ModeData::axial(&config).unwrap();
        let set = coupling_set(&modes, &config, &FieldDrive::axial(1.0, 0.7).unwrap()).unwrap();
        let hz = build_effective_z(&set, &s.basis).unwrap();
        let a = s.effective_hamiltonian().matrix;
        let b = hz.matrix * Complex64::new(eps, 0.0);
        let shift = (a.trace() - b.trace()) / Complex64::new(4.0, 0.0);
        let diff = a - b - CMatrix::identity(4, 4) * shift;
        assert!(diff.norm() < 1e-15);
        assert!((s.pair_coupling().unwrap() - eps * set.pair(0, 1)).abs() < 1e-15);
    }

    #[test]
    fn effective_propagation_basics() {
        let basis = SpinBasis::new(vec![Spin::HALF, Spin::new(3.0).unwrap(), Spin::HALF]).unwrap();
        let hz = build_effective_z(&CouplingSet::three_site(0.4, -0.3, -0.35), &basis).unwrap();
        let psi = prepare_initial_state(&basis).unwrap();
        assert!(norm_close(&effective_propagate(&hz, &psi, 0.0).unwrap(), &psi) < 1e-14);
        let t = 1.7;
        let out = effective_propagate(&hz, &psi, t).unwrap();
        for c in 0..basis.dim() {
            let expect = psi[c] * Complex64::from_polar(1.0, -hz.matrix[(c, c)].re * t);
            assert!((out[c] - expect).norm() < 1e-12);
        }
        let x = basis.flip_operator();
        let h = build_transverse_ising(&hz, 0.3);
        let out = effective_propagate(&h, &psi, 3.0).unwrap();
        assert!((&x * &psi - &psi).norm() < 1e-12);
        assert!((&x * &out - &out).norm() < 1e-10);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn guard_refuses() {
        let s = two_spin_scenario(1.01, 0.02, 4).unwrap();
        let psi = x_polarized_state(&s.basis);
        assert!(matches!(compare_effective(&s, &psi, 1.0, 2), Err(Error::GuardedResonance { .. })));
    }

    #[test]
    fn cutoff_too_small_is_reported() {
        let s = two_spin_scenario(0.5, 2.0, 2).unwrap();
        let psi = x_polarized_state(&s.basis);
        assert!(matches!(full_propagate(&s, &psi, 20.0), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn construction_limits() {
        let b = SpinBasis::new(vec![Spin::HALF, Spin::HALF]).unwrap();
        let r = DMatrix::from_element(2, 1, 0.01);
        assert!(TruncatedSystem::new(b.clone(), vec![1.0], r.clone(), 0.5, 1).is_err());
        assert!(TruncatedSystem::new(b.clone(), vec![1.0], r.clone(), 0.5, 9).is_err());
        assert!(TruncatedSystem::new(b.clone(), vec![1.0, 2.0, 3.0], DMatrix::zeros(2, 3), 0.5, 4).is_err());
        let b3 = SpinBasis::new(vec![Spin::HALF; 3]).unwrap();
        assert!(TruncatedSystem::new(b3, vec![1.0], DMatrix::zeros(3, 1), 0.5, 4).is_err());
    }

    #[test]
    fn short_window_comparison_and_cutoff_convergence() {
        let s = two_spin_scenario(0.5, 0.05, 4).unwrap();
        let psi = x_polarized_state(&s.basis);
        let t = 0.25 * s.coupling_period().unwrap();
        let c4 = compare_effective(&s, &psi, t, 8).unwrap();
        let c6 = compare_effective(&s.with_cutoff(6).unwrap(), &psi, t, 8).unwrap();
        assert!(c4.max_norm_error < 1e-8);
        assert!((c4.deviation - c6.deviation).abs() < 0.05 * c4.deviation.max(1e-12));
        let half = compare_effective(&s.scaled(0.5), &psi, t, 8).unwrap();
        assert!(half.deviation < c4.deviation);
    }

    fn ramp_setup() -> (SpinHamiltonian, CVector) {
        let basis = SpinBasis::new(vec![Spin::HALF, Spin::new(3.0).unwrap(), Spin::HALF]).unwrap();
        let hz = build_effective_z(&CouplingSet::three_site(0.4, -0.3, -0.35), &basis).unwrap();
        let psi = prepare_initial_state(&basis).unwrap();
        (hz, psi)
    }

    #[test]
    fn frozen_ramp_keeps_ground_state() {
        let (hz, psi) = ramp_setup();
        for t in [0.5, 4.0] {
            let r = adiabatic_ramp(&hz, &psi, &RampSchedule::new(t, 5.0, 0.5).unwrap().frozen()).unwrap();
            assert!((r.fidelity - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sudden_ramp_is_overlap() {
        let (hz, psi) = ramp_setup();
        let r = adiabatic_ramp(&hz, &psi, &RampSchedule::new(0.0, 5.0, 0.1).unwrap()).unwrap();
        let even = flip_sector(&hz.basis, 1);
        let (vals, vecs) = eigh(&(even.adjoint() * build_transverse_ising(&hz, 0.1).matrix * &even));
        assert!(vals[1] - vals[0] > 1e-6);
        let overlap = (&even * vecs.column(0)).dotc(&psi).norm_sqr();
        assert!((r.fidelity - overlap).abs() < 1e-12);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn longer_ramps_do_better() {
        let (hz, psi) = ramp_setup();
        let f: Vec<f64> = [10.0, 20.0, 40.0]
            .iter()
            .map(|&t| adiabatic_ramp(&hz, &psi, &RampSchedule::new(t, 5.0, 0.1).unwrap()).unwrap().fidelity)
            .collect();
        assert!(f[0] <= f[1] + 1e-9 && f[1] <= f[2] + 1e-9, "{f:?}");
        assert!(!adiabatic_ramp(&hz, &psi, &RampSchedule::new(40.0, 5.0, 0.1).unwrap()).unwrap().crossing_warning);
    }

    #[test]
    fn x_state_is_flip_even() {
        let basis = SpinBasis::new(vec![Spin::HALF, Spin::new(3.0).unwrap(), Spin::HALF]).unwrap();
        let psi = x_polarized_state(&basis);
        let x = basis.flip_operator();
        assert!((&x * &psi - &psi).norm() < 1e-12);
        assert_eq!(parity_of(&basis, &psi), Some(1));
        let even = flip_sector(&basis, 1);
        let odd = flip_sector(&basis, -1);
        assert_eq!(even.ncols() + odd.ncols(), basis.dim());
        assert!((even.adjoint() * &odd).norm() < 1e-14);
    }
}

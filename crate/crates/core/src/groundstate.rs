//! Exact diagonalization and ground-state observables.

use std::fmt;

use rayon::prelude::*;

use crate::couplings::{coupling_set_guarded, resonance_guard, CouplingSet, FieldDrive, DEFAULT_GUARD_BAND};
use crate::crystal::CrystalConfig;
use crate::hamiltonian::{build_effective_z, build_transverse_ising, format_configuration, SpinBasis, SpinHamiltonian};
use crate::linalg::{eigh, CMatrix, CVector};
use crate::modes::ModeData;
use crate::{Error, Result};

/// Relative tolerance for grouping levels into a degenerate manifold.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Full spectrum, energies ascending, eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub states: CMatrix,
}

pub fn diagonalize(h: &SpinHamiltonian) -> Spectrum {
    let (energies, states) = eigh(&h.matrix);
    Spectrum { energies, states }
}

/// `DEGENERACY_TOLERANCE · max(1, |E₀|)`.
pub fn default_tolerance(ground_energy: f64) -> f64 {
    DEGENERACY_TOLERANCE * ground_energy.abs().max(1.0)
}

/// Orthonormal states within `tol` of the ground energy.
#[derive(Clone, Debug)]
pub struct Manifold {
    pub energy: f64,
    pub states: CMatrix,
}

impl Manifold {
    pub fn degeneracy(&self) -> usize {
        self.states.ncols()
    }

    /// A single state as a one-dimensional manifold.
    pub fn from_state(state: &CVector) -> Self {
        Manifold {
            energy: f64::NAN,
            states: CMatrix::from_columns(std::slice::from_ref(state)),
        }
    }

    /// `(1/d) Tr(P_manifold P_indices)`.
    fn weight(&self, indices: &[usize]) -> f64 {
        let d = self.degeneracy() as f64;
        let total: f64 = self
            .states
            .column_iter()
            .map(|col| indices.iter().map(|&i| col[i].norm_sqr()).sum::<f64>())
            .sum();
        total / d
    }
}

pub fn ground_manifold(spectrum: &Spectrum, tol: f64) -> Manifold {
    let e0 = spectrum.energies[0];
    let d = spectrum.energies.iter().take_while(|&&e| e - e0 <= tol).count();
    Manifold {
        energy: e0,
        states: spectrum.states.columns(0, d).into_owned(),
    }
}

/// A named set of basis configurations (each as `2m` per site).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigSet {
    pub name: String,
    pub configs: Vec<Vec<i32>>,
}

impl ConfigSet {
    pub fn new(name: impl Into<String>, configs: Vec<Vec<i32>>) -> Self {
        ConfigSet {
            name: name.into(),
            configs,
        }
    }

    pub fn from_labels(name: impl Into<String>, basis: &SpinBasis, labels: &[&str]) -> Result<Self> {
        let configs = labels.iter().map(|l| basis.parse_label(l)).collect::<Result<_>>()?;
        Ok(Self::new(name, configs))
    }

    /// Ferrimagnetic pair: light spins ↑ with heavy spins at −k, and the flip.
    pub fn ferrimagnetic(basis: &SpinBasis, k: i32) -> Self {
        Self::new(format!("f{k}"), aligned_pair(basis, 1, -2 * k))
    }

    /// Ferromagnetic pair: light spins ↑ with heavy spins at +k, and the flip.
    pub fn ferromagnetic(basis: &SpinBasis, k: i32) -> Self {
        Self::new(format!("fm{k}"), aligned_pair(basis, 1, 2 * k))
    }

    /// Antiferromagnetic light pair (↑↓ or ↓↑) with every heavy spin at +k or
    /// every heavy spin at −k. Needs exactly two spin-1/2 sites.
    pub fn antiferromagnetic(basis: &SpinBasis, k: i32) -> Option<Self> {
        let light = basis.light_sites();
        if light.len() != 2 {
            return None;
        }
        let mut configs = Vec::new();
        for first in [1, -1] {
            for heavy in if k == 0 { vec![0] } else { vec![2 * k, -2 * k] } {
                let mut c: Vec<i32> = basis.spins().iter().map(|s| if s.is_half() { 0 } else { heavy }).collect();
                c[light[0]] = first;
                c[light[1]] = -first;
                configs.push(c);
            }
        }
        Some(Self::new(format!("a{k}"), configs))
    }

    /// The standard sets: fm3, f1, f2, f3 and, with two spin-1/2 sites, a3, a0.
    /// Sets whose heavy projection exceeds a site's spin are skipped.
    pub fn standard(basis: &SpinBasis) -> Vec<Self> {
        let mut sets = vec![
            Self::ferromagnetic(basis, 3),
            Self::ferrimagnetic(basis, 1),
            Self::ferrimagnetic(basis, 2),
            Self::ferrimagnetic(basis, 3),
        ];
        sets.extend(Self::antiferromagnetic(basis, 3));
        sets.extend(Self::antiferromagnetic(basis, 0));
        sets.retain(|s| s.indices(basis).is_ok());
        sets
    }

    /// Look up a standard set by name (`fm3`, `f1`, `a0`, ...).
    pub fn named(basis: &SpinBasis, name: &str) -> Result<Self> {
        let parse_k = |rest: &str| rest.parse::<i32>().map_err(|_| Error::UnknownLabel(name.to_string()));
        let set = if let Some(rest) = name.strip_prefix("fm") {
            Self::ferromagnetic(basis, parse_k(rest)?)
        } else if let Some(rest) = name.strip_prefix('f') {
            Self::ferrimagnetic(basis, parse_k(rest)?)
        } else if let Some(rest) = name.strip_prefix('a') {
            Self::antiferromagnetic(basis, parse_k(rest)?)
                .ok_or_else(|| Error::UnknownLabel(format!("{name}: needs exactly two spin-1/2 sites")))?
        } else {
            return Err(Error::UnknownLabel(name.to_string()));
        };
        set.indices(basis)?;
        Ok(set)
    }

    /// Global spin flip of every configuration.
    pub fn flipped(&self) -> Self {
        Self::new(
            format!("flip({})", self.name),
            self.configs.iter().map(|c| c.iter().map(|m| -m).collect()).collect(),
        )
    }

    /// Basis indices; errors on configurations that do not exist in `basis`.
    pub fn indices(&self, basis: &SpinBasis) -> Result<Vec<usize>> {
        self.configs
            .iter()
            .map(|c| {
                basis
                    .index_of(c)
                    .ok_or_else(|| Error::UnknownLabel(format!("{}: {}", self.name, format_configuration(basis.spins(), c))))
            })
            .collect()
    }
}

fn aligned_pair(basis: &SpinBasis, light: i32, heavy: i32) -> Vec<Vec<i32>> {
    let up: Vec<i32> = basis
        .spins()
        .iter()
        .map(|s| if s.is_half() { light } else { heavy })
        .collect();
    let down = up.iter().map(|m| -m).collect();
    vec![up, down]
}

/// Populations of each set in a (possibly degenerate) manifold.
///
/// Uses `(1/d) Tr(P_manifold P_set)`, which does not depend on how the
/// manifold basis was chosen.
pub fn populations(manifold: &Manifold, basis: &SpinBasis, sets: &[ConfigSet]) -> Result<Vec<f64>> {
    if manifold.states.nrows() != basis.dim() {
        return Err(Error::BasisMismatch(format!(
            "manifold dimension {} vs basis {}",
            manifold.states.nrows(),
            basis.dim()
        )));
    }
    sets.iter()
        .map(|set| Ok(manifold.weight(&set.indices(basis)?)))
        .collect()
}

/// A signed sum of set populations, e.g. `f1-f2+f3-a3`.
#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub terms: Vec<(f64, ConfigSet)>,
}

impl Observable {
    pub fn parse(expr: &str, basis: &SpinBasis) -> Result<Self> {
        let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
        let mut terms = Vec::new();
        let mut sign = 1.0;
        let mut current = String::new();
        let mut flush = |sign: f64, current: &mut String| -> Result<()> {
            if current.is_empty() {
                return Err(Error::UnknownLabel(format!("empty term in `{expr}`")));
            }
            let name = current.strip_prefix("P_").unwrap_or(current).replace(',', "");
            terms.push((sign, ConfigSet::named(basis, &name)?));
            current.clear();
            Ok(())
        };
        for (i, c) in compact.chars().enumerate() {
            match c {
                '+' | '-' if i > 0 => {
                    flush(sign, &mut current)?;
                    sign = if c == '-' { -1.0 } else { 1.0 };
                }
                '-' => sign = -1.0,
                '+' => sign = 1.0,
                _ => current.push(c),
            }
        }
        flush(sign, &mut current)?;
        Ok(Observable {
            name: compact,
            terms,
        })
    }

    pub fn evaluate(&self, manifold: &Manifold, basis: &SpinBasis) -> Result<f64> {
        let sets: Vec<ConfigSet> = self.terms.iter().map(|(_, s)| s.clone()).collect();
        let pops = populations(manifold, basis, &sets)?;
        Ok(self.terms.iter().zip(pops).map(|((w, _), p)| w * p).sum())
    }
}

/// Coupling-sign regions of the {light, heavy, light} chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Region {
    /// J, J13 < 0 and A < 0: ferromagnetic.
    I,
    /// J, J13 > 0 and A > 0: frustrated ferrimagnet.
    II,
    /// J > 0, J13 < 0, A < 0: ferrimagnetic without frustration.
    III,
    /// J < 0, J13 > 0, A > 0: antiferromagnetic light pair, heavy spin at m = 0.
    IV,
    Other,
}

impl Region {
    pub fn from_signs(j: f64, j13: f64, a: f64) -> Self {
        let s = |x: f64| if x > 0.0 { 1 } else if x < 0.0 { -1 } else { 0 };
        match (s(j), s(j13), s(a)) {
            (-1, -1, -1) => Region::I,
            (1, 1, 1) => Region::II,
            (1, -1, -1) => Region::III,
            (-1, 1, 1) => Region::IV,
            _ => Region::Other,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::Other => "other",
        };
        f.write_str(s)
    }
}

/// Region label plus whether it came from the chain-averaged heuristic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseClass {
    pub region: Region,
    pub heuristic: bool,
}

/// Classify by the signs of (J, J13, A).
///
/// Three-site {light, heavy, light} chains are classified exactly. Chains
/// of five or more sites use the mean nearest-neighbour coupling, the mean
/// next-nearest coupling and the mean anisotropy, flagged as heuristic.
pub fn classify_phase(couplings: &CouplingSet) -> Result<PhaseClass> {
    let n = couplings.n_sites();
    if n == 3 && couplings.light_sites == [0, 2] && couplings.heavy_sites == [1] {
        let j = 0.5 * (couplings.pair(0, 1) + couplings.pair(1, 2));
        return Ok(PhaseClass {
            region: Region::from_signs(j, couplings.pair(0, 2), couplings.anisotropy[0]),
            heuristic: false,
        });
    }
    if n >= 5 && !couplings.heavy_sites.is_empty() {
        let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        let nn = mean((0..n - 1).map(|i| couplings.pair(i, i + 1)).collect());
        let nnn = mean((0..n - 2).map(|i| couplings.pair(i, i + 2)).collect());
        let a = mean(couplings.anisotropy.clone());
        return Ok(PhaseClass {
            region: Region::from_signs(nn, nnn, a),
            heuristic: true,
        });
    }
    Err(Error::CrystalShape(format!(
        "cannot classify chain with light sites {:?} and heavy sites {:?}",
        couplings.light_sites, couplings.heavy_sites
    )))
}

/// Everything reported about a ground state.
#[derive(Clone, Debug)]
pub struct GroundStateReport {
    pub energies: Vec<f64>,
    pub ground_degeneracy: usize,
    pub manifold: Manifold,
    pub populations: Vec<(String, f64)>,
    pub phase: Option<PhaseClass>,
    /// Name of the most populated standard set.
    pub dominant: Option<(String, f64)>,
}

/// Diagonalize `h` and report the standard populations and phase label.
pub fn analyze(h: &SpinHamiltonian, couplings: Option<&CouplingSet>) -> Result<GroundStateReport> {
    let spectrum = diagonalize(h);
    let manifold = ground_manifold(&spectrum, default_tolerance(spectrum.energies[0]));
    let sets = ConfigSet::standard(&h.basis);
    let pops = populations(&manifold, &h.basis, &sets)?;
    let populations: Vec<(String, f64)> = sets.iter().map(|s| s.name.clone()).zip(pops).collect();
    let dominant = populations
        .iter()
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let phase = couplings.map(classify_phase).transpose()?;
    Ok(GroundStateReport {
        energies: spectrum.energies,
        ground_degeneracy: manifold.degeneracy(),
        manifold,
        populations,
        phase,
        dominant,
    })
}

/// Effective axial-drive couplings of a crystal at `omega` (units of ω_z).
pub fn axial_couplings(config: &CrystalConfig, modes: &ModeData, omega: f64, guard_band: f64) -> Result<CouplingSet> {
    coupling_set_guarded(modes, config, &FieldDrive::axial(1.0, omega)?, guard_band)
}

/// Level-crossing conditions of the {light, heavy, light} chain in region II.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CrossingKind {
    /// ψ_f1 ↔ ψ_f2 at A/J = 2/3.
    F1F2,
    /// ψ_f2 ↔ ψ_f3 at A/J = 2/5.
    F2F3,
    /// ψ_f3 ↔ ψ_a3 at J13 = 3J.
    F3A3,
}

impl CrossingKind {
    pub const ALL: [CrossingKind; 3] = [CrossingKind::F1F2, CrossingKind::F2F3, CrossingKind::F3A3];

    /// Zero of this function marks the crossing.
    pub fn condition(self, c: &CouplingSet) -> f64 {
        let j = c.pair(0, 1);
        match self {
            CrossingKind::F1F2 => c.anisotropy[0] - 2.0 / 3.0 * j,
            CrossingKind::F2F3 => c.anisotropy[0] - 2.0 / 5.0 * j,
            CrossingKind::F3A3 => c.pair(0, 2) - 3.0 * j,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CrossingKind::F1F2 => "f1-f2",
            CrossingKind::F2F3 => "f2-f3",
            CrossingKind::F3A3 => "f3-a3",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub kind: CrossingKind,
    pub omega: f64,
}

fn require_light_heavy_light(config: &CrystalConfig) -> Result<()> {
    if config.len() != 3 || config.light_sites() != [0, 2] || config.heavy_sites() != [1] {
        return Err(Error::CrystalShape("expected a {spin-1/2, spin>1/2, spin-1/2} chain".into()));
    }
    Ok(())
}

/// Window between the two lowest axial modes (minus guard bands), where
/// region II lies.
pub fn region_two_window(config: &CrystalConfig) -> Result<(f64, f64)> {
    let f = ModeData::axial(config)?.frequencies();
    if f.len() < 2 {
        return Err(Error::CrystalShape("need at least two ions".into()));
    }
    Ok((f[0] + DEFAULT_GUARD_BAND, f[1] - DEFAULT_GUARD_BAND))
}

/// Bisect every sign change of `f` over a grid on `[lo, hi]`, skipping
/// brackets that contain a mode resonance (poles, not roots).
fn sign_change_roots<F>(modes: &ModeData, lo: f64, hi: f64, steps: usize, guard_band: f64, f: F) -> Vec<f64>
where
    F: Fn(f64) -> Option<f64>,
{
    let freqs = modes.frequencies();
    let grid: Vec<f64> = (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&w| f(w)).collect();
    let mut roots = Vec::new();
    for k in 0..steps {
        let (a, b) = (grid[k], grid[k + 1]);
        let (Some(fa), Some(fb)) = (values[k], values[k + 1]) else {
            continue;
        };
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() || freqs.iter().any(|&wn| wn > a - guard_band && wn < b + guard_band) {
            continue;
        }
        let (mut x0, mut x1, mut f0) = (a, b, fa);
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if mid <= x0 || mid >= x1 {
                break;
            }
            match f(mid) {
                Some(fm) if fm.signum() == f0.signum() => {
                    x0 = mid;
                    f0 = fm;
                }
                Some(_) => x1 = mid,
                None => break,
            }
        }
        roots.push(0.5 * (x0 + x1));
    }
    roots
}

/// Locate the three region-II level crossings by bisection on their analytic
/// conditions over `[lo, hi]`.
pub fn level_crossings(config: &CrystalConfig, lo: f64, hi: f64, steps: usize) -> Result<Vec<Crossing>> {
    require_light_heavy_light(config)?;
    // the f1/f2/f3/a3 states need m = 1, 2, 3 on the heavy site
    let heavy = config.spins()[1];
    if !heavy.twice().is_multiple_of(2) || heavy.twice() < 6 {
        return Err(Error::CrystalShape(format!("crossings need an integer heavy spin of at least 3, found {heavy}")));
    }
    if lo.is_nan() || hi.is_nan() || lo >= hi || steps == 0 {
        return Err(Error::invalid("range", format!("[{lo}, {hi}] with {steps} steps")));
    }
    let modes = ModeData::axial(config)?;
    CrossingKind::ALL
        .iter()
        .map(|&kind| {
            let roots = sign_change_roots(&modes, lo, hi, steps, DEFAULT_GUARD_BAND, |w| {
                axial_couplings(config, &modes, w, DEFAULT_GUARD_BAND)
                    .ok()
                    .map(|c| kind.condition(&c))
            });
            roots
                .first()
                .map(|&omega| Crossing { kind, omega })
                .ok_or(Error::NoSignChange {
                    condition: kind.name(),
                    lo,
                    hi,
                })
        })
        .collect()
}

/// Zeros of J, J13 and A over `[lo, hi]` (resonance poles excluded), sorted.
/// These separate the regions I–IV.
pub fn region_boundaries(config: &CrystalConfig, lo: f64, hi: f64, steps: usize) -> Result<Vec<(&'static str, f64)>> {
    require_light_heavy_light(config)?;
    let modes = ModeData::axial(config)?;
    let mut out = Vec::new();
    type Pick = (&'static str, fn(&CouplingSet) -> f64);
    let pick: [Pick; 3] = [
        ("J", |c| c.pair(0, 1)),
        ("J13", |c| c.pair(0, 2)),
        ("A", |c| c.anisotropy[0]),
    ];
    for (name, g) in pick {
        for root in sign_change_roots(&modes, lo, hi, steps, DEFAULT_GUARD_BAND, |w| {
            axial_couplings(config, &modes, w, DEFAULT_GUARD_BAND).ok().map(|c| g(&c))
        }) {
            out.push((name, root));
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}

/// Observable values on an (ω, B_x) grid.
#[derive(Clone, Debug)]
pub struct PhaseDiagram {
    pub omegas: Vec<f64>,
    pub fields: Vec<f64>,
    pub observables: Vec<String>,
    /// Indexed `[omega][field][observable]`; NaN at guarded points.
    pub values: Vec<Vec<Vec<f64>>>,
    pub guarded: Vec<bool>,
    pub regions: Vec<Option<PhaseClass>>,
}

impl PhaseDiagram {
    pub fn value(&self, omega_index: usize, field_index: usize, observable: usize) -> f64 {
        self.values[omega_index][field_index][observable]
    }
}

/// Ground-state observables over an (ω, B_x/ε) grid. Grid points inside a
/// guard band become NaN rows flagged as guarded. Output order follows the
/// grid regardless of evaluation order.
pub fn phase_diagram(
    config: &CrystalConfig,
    omegas: &[f64],
    fields: &[f64],
    observables: &[String],
    guard_band: f64,
) -> Result<PhaseDiagram> {
    let modes = ModeData::axial(config)?;
    let basis = SpinBasis::new(config.spins())?;
    let parsed = observables
        .iter()
        .map(|o| Observable::parse(o, &basis))
        .collect::<Result<Vec<_>>>()?;

    // values[b][obs], guarded, phase at this ω
    type Row = (Vec<Vec<f64>>, bool, Option<PhaseClass>);
    let rows: Vec<Result<Row>> = omegas
        .par_iter()
        .map(|&omega| {
            if !resonance_guard(omega, &modes, guard_band).pass {
                return Ok((vec![vec![f64::NAN; parsed.len()]; fields.len()], true, None));
            }
            let couplings = axial_couplings(config, &modes, omega, guard_band)?;
            let region = classify_phase(&couplings).ok();
            let hz = build_effective_z(&couplings, &basis)?;
            let row = fields
                .iter()
                .map(|&b| {
                    let h = build_transverse_ising(&hz, b);
                    let spectrum = diagonalize(&h);
                    let manifold = ground_manifold(&spectrum, default_tolerance(spectrum.energies[0]));
                    parsed.iter().map(|o| o.evaluate(&manifold, &basis)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((row, false, region))
        })
        .collect();

    let mut values = Vec::with_capacity(omegas.len());
    let mut guarded = Vec::with_capacity(omegas.len());
    let mut regions = Vec::with_capacity(omegas.len());
    for r in rows {
        let (v, g, reg) = r?;
        values.push(v);
        guarded.push(g);
        regions.push(reg);
    }
    Ok(PhaseDiagram {
        omegas: omegas.to_vec(),
        fields: fields.to_vec(),
        observables: parsed.into_iter().map(|o| o.name).collect(),
        values,
        guarded,
        regions,
    })
}

/// Ground-state report of the transverse Ising model for a crystal at one
/// (ω, B_x/ε) point.
pub fn ground_state_at(config: &CrystalConfig, omega: f64, field: f64, guard_band: f64) -> Result<(CouplingSet, GroundStateReport)> {
    let modes = ModeData::axial(config)?;
    let couplings = axial_couplings(config, &modes, omega, guard_band)?;
    let basis = SpinBasis::new(config.spins())?;
    let h = build_transverse_ising(&build_effective_z(&couplings, &basis)?, field);
    let report = analyze(&h, Some(&couplings))?;
    Ok((couplings, report))
}

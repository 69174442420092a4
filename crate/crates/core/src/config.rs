//! TOML run configuration.
//!
//! All frequencies are ratios to ω_z except in the `[readout]` block, which
//! is SI. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::couplings::DEFAULT_GUARD_BAND;
use crate::crystal::{default_trap, CrystalConfig, Species, TrapParams};
use crate::modes::Axis;
use crate::{Error, Result};

/// A chain site: a preset name or an explicit species.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeciesSpec {
    Name(String),
    Custom(Species),
}

impl SpeciesSpec {
    fn resolve(&self) -> Result<Species> {
        match self {
            SpeciesSpec::Name(n) => Species::preset(n).ok_or_else(|| Error::Config(format!("species: unknown preset `{n}`"))),
            SpeciesSpec::Custom(s) => Species::new(s.name.clone(), s.mass, s.spin, s.g_factor),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Grids for `couplings` and `phase-diagram`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_points: usize,
    pub field_min: f64,
    pub field_max: f64,
    pub field_points: usize,
    pub field_spacing: Spacing,
    pub observables: Vec<String>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            omega_min: 0.5,
            omega_max: 3.0,
            omega_points: 251,
            field_min: 0.01,
            field_max: 5.0,
            field_points: 50,
            field_spacing: Spacing::Linear,
            observables: vec!["fm3".into(), "f1-f2+f3-a3".into(), "f3".into(), "a0".into()],
        }
    }
}

impl SweepConfig {
    pub fn omegas(&self) -> Vec<f64> {
        grid(self.omega_min, self.omega_max, self.omega_points, Spacing::Linear)
    }

    pub fn fields(&self) -> Vec<f64> {
        grid(self.field_min, self.field_max, self.field_points, self.field_spacing)
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0 && self.omega_min <= self.omega_max && self.omega_points > 0) {
            return Err(Error::Config("sweep.omega: need 0 < omega_min <= omega_max and omega_points > 0".into()));
        }
        if !(self.field_min >= 0.0 && self.field_min <= self.field_max && self.field_points > 0) {
            return Err(Error::Config("sweep.field: need 0 <= field_min <= field_max and field_points > 0".into()));
        }
        if self.field_spacing == Spacing::Log && self.field_min <= 0.0 {
            return Err(Error::Config("sweep.field_spacing: log spacing needs field_min > 0".into()));
        }
        Ok(())
    }
}

/// `points` values from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let t = |k: usize| k as f64 / (points - 1) as f64;
    match spacing {
        Spacing::Linear => (0..points).map(|k| lo + (hi - lo) * t(k)).collect(),
        Spacing::Log => (0..points).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * t(k)).exp()).collect(),
    }
}

/// SI parameters of the readout stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReadoutConfig {
    /// Static gradient, T/m.
    pub gradient: f64,
    /// Axial trap frequency ω_z / 2π, Hz.
    pub omega_z_hz: f64,
    pub probe: usize,
    pub configuration: String,
    /// Configurations to sort into distinguishability classes.
    pub compare: Vec<String>,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        ReadoutConfig {
            gradient: 20.0,
            omega_z_hz: 1e5,
            probe: 0,
            configuration: "up,3,up".into(),
            compare: vec![],
        }
    }
}

/// Spin-phonon validation and ramp parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    /// Drive frequency for the two-spin check, units of ω_z.
    pub drive: f64,
    /// Ω / |ω − ω_n|.
    pub rabi_ratio: f64,
    pub n_max: usize,
    /// Duration in coupling periods 2π/|J₁₂|.
    pub periods: f64,
    pub checkpoints: usize,
    /// Regression bound on the correlator deviation.
    pub max_deviation: f64,
    /// Minimum reduction when the gradient is halved.
    pub min_halving_gain: f64,
    /// Ramp length in units of 1/ε (0 skips the ramp).
    pub ramp_time: f64,
    pub ramp_field_start: f64,
    pub ramp_field_end: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            drive: 0.3,
            rabi_ratio: 0.02,
            n_max: 4,
            periods: 1.0,
            checkpoints: 40,
            max_deviation: 0.1,
            min_halving_gain: 1.8,
            ramp_time: 100.0,
            ramp_field_start: 5.0,
            ramp_field_end: 0.01,
        }
    }
}

/// Complete run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Chain written as concatenated species names, e.g. `CaMnCa`.
    pub preset: Option<String>,
    /// Explicit chain; overrides `preset`.
    pub species: Option<Vec<SpeciesSpec>>,
    /// Drive frequency ω / ω_z.
    pub omega_over_omegaz: f64,
    /// ω_z / ω_r0 of the reference species.
    pub alpha: f64,
    /// Transverse field B_x / ε for `ground-state`.
    pub transverse_field: f64,
    pub axis: Axis,
    pub guard_band: f64,
    pub output_dir: PathBuf,
    /// Reserved; no computation is random.
    pub seed: u64,
    pub sweep: SweepConfig,
    pub readout: ReadoutConfig,
    pub dynamics: DynamicsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preset: Some("CaMnCa".into()),
            species: None,
            omega_over_omegaz: 1.8,
            alpha: default_trap().alpha,
            transverse_field: 0.01,
            axis: Axis::Z,
            guard_band: DEFAULT_GUARD_BAND,
            output_dir: PathBuf::from("ionspin-out"),
            seed: 0,
            sweep: SweepConfig::default(),
            readout: ReadoutConfig::default(),
            dynamics: DynamicsConfig::default(),
        }
    }
}

/// Split `CaMnCa` into `["Ca", "Mn", "Ca"]` at capital letters.
pub fn split_preset(preset: &str) -> Result<Vec<String>> {
    let mut names: Vec<String> = Vec::new();
    for c in preset.chars() {
        if c.is_ascii_uppercase() || names.is_empty() {
            names.push(String::new());
        }
        names.last_mut().expect("pushed above").push(c);
    }
    if names.is_empty() {
        return Err(Error::Config("preset: empty".into()));
    }
    Ok(names)
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().replace('\n', " ")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_over_omegaz.is_finite() && self.omega_over_omegaz > 0.0) {
            return Err(Error::Config(format!("omega_over_omegaz: {} must be positive", self.omega_over_omegaz)));
        }
        if !(self.guard_band.is_finite() && self.guard_band >= 0.0) {
            return Err(Error::Config(format!("guard_band: {} must be non-negative", self.guard_band)));
        }
        if !(self.transverse_field.is_finite() && self.transverse_field >= 0.0) {
            return Err(Error::Config(format!("transverse_field: {} must be non-negative", self.transverse_field)));
        }
        if !(self.readout.gradient >= 0.0 && self.readout.omega_z_hz > 0.0) {
            return Err(Error::Config("readout: need gradient >= 0 and omega_z_hz > 0".into()));
        }
        let d = &self.dynamics;
        if !(d.drive > 0.0 && d.rabi_ratio >= 0.0 && d.periods >= 0.0 && d.checkpoints > 0 && d.ramp_time >= 0.0) {
            return Err(Error::Config("dynamics: drive > 0, rabi_ratio >= 0, periods >= 0, checkpoints > 0, ramp_time >= 0".into()));
        }
        self.sweep.validate()?;
        self.crystal().map(|_| ())
    }

    /// Species names or custom entries in chain order.
    pub fn species_list(&self) -> Result<Vec<Species>> {
        let specs: Vec<SpeciesSpec> = match (&self.species, &self.preset) {
            (Some(list), _) => list.clone(),
            (None, Some(p)) => split_preset(p)?.into_iter().map(SpeciesSpec::Name).collect(),
            (None, None) => return Err(Error::Config("either `preset` or `species` is required".into())),
        };
        if specs.is_empty() {
            return Err(Error::Config("species: empty chain".into()));
        }
        specs.iter().map(SpeciesSpec::resolve).collect()
    }

    /// Crystal with ω_z = 1 (dimensionless) and the configured α.
    pub fn crystal(&self) -> Result<CrystalConfig> {
        let trap = TrapParams::new(1.0, self.alpha).map_err(|e| Error::Config(format!("alpha: {e}")))?;
        CrystalConfig::new(self.species_list()?, trap)
    }

    /// Crystal with the SI trap frequency of the `[readout]` block.
    pub fn readout_crystal(&self) -> Result<CrystalConfig> {
        let omega_z = std::f64::consts::TAU * self.readout.omega_z_hz;
        let trap = TrapParams::new(omega_z, self.alpha).map_err(|e| Error::Config(format!("alpha: {e}")))?;
        CrystalConfig::new(self.species_list()?, trap)
    }
}

/// Read and validate a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

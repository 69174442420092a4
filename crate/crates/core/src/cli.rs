//! Command-line front end: config resolution, subcommands, CSV and manifest output.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_config, split_preset, RunConfig, SpeciesSpec};
use crate::couplings::coupling_sweep;
use crate::dynamics::{adiabatic_ramp, compare_effective, two_spin_phase, two_spin_scenario, x_polarized_state, RampSchedule};
use crate::groundstate::{classify_phase, ground_state_at, level_crossings, phase_diagram, region_two_window, axial_couplings};
use crate::hamiltonian::{build_effective_z, parse_configuration, SpinBasis};
use crate::modes::{Axis, ChainModes, ModeData};
use crate::readout::{distinguishability, prepare_initial_state, shift_report, ReadoutSetup};
use crate::{CouplingSet, CrystalConfig, Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "ionspin", version, about = "Mixed-species ion crystal spin simulator")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config file).
    #[arg(short, long, global = true, env = "IONSPIN_OUT_DIR")]
    pub output_dir: Option<PathBuf>,
    /// Worker threads for sweeps (default: available processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Chain as concatenated species names, e.g. CaMnCa.
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// Drive frequency ω/ω_z.
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// ω_z / ω_r0.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Resonance exclusion half-width, units of ω_z.
    #[arg(long, global = true)]
    pub guard_band: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Equilibrium positions and normal modes.
    Modes,
    /// Effective couplings over a drive-frequency grid.
    Couplings {
        #[arg(long, value_parser = parse_axis)]
        axis: Option<Axis>,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        omega_points: Option<usize>,
    },
    /// Ground state of the transverse Ising model at one point.
    GroundState {
        /// Transverse field B_x/ε.
        #[arg(long)]
        field: Option<f64>,
    },
    /// Ground-state observables over an (ω, B_x) grid.
    PhaseDiagram {
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
        #[arg(long)]
        omega_points: Option<usize>,
        #[arg(long)]
        field_min: Option<f64>,
        #[arg(long)]
        field_max: Option<f64>,
        #[arg(long)]
        field_points: Option<usize>,
        /// Comma-separated, e.g. `f3,f1-f2+f3-a3`.
        #[arg(long, value_delimiter = ',')]
        observables: Option<Vec<String>>,
    },
    /// Static-gradient displacement and resonance shifts.
    Readout {
        /// Spin configuration, e.g. `up,3,up`.
        #[arg(long)]
        state: Option<String>,
        /// Gradient in T/m.
        #[arg(long)]
        gradient: Option<f64>,
        /// ω_z/2π in Hz.
        #[arg(long)]
        omega_z_hz: Option<f64>,
        #[arg(long)]
        probe: Option<usize>,
        /// Configurations to classify, separated by `;`.
        #[arg(long, value_delimiter = ';')]
        compare: Option<Vec<String>>,
    },
    /// Full spin-phonon evolution against the effective model.
    ValidateDynamics {
        #[arg(long)]
        drive: Option<f64>,
        #[arg(long)]
        rabi_ratio: Option<f64>,
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        periods: Option<f64>,
        #[arg(long)]
        ramp_time: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Modes => "modes",
            Command::Couplings { .. } => "couplings",
            Command::GroundState { .. } => "ground-state",
            Command::PhaseDiagram { .. } => "phase-diagram",
            Command::Readout { .. } => "readout",
            Command::ValidateDynamics { .. } => "validate-dynamics",
        }
    }
}

fn parse_axis(s: &str) -> std::result::Result<Axis, String> {
    match s {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        _ => Err(format!("axis must be x, y or z, got `{s}`")),
    }
}

/// Files written by a run and the process exit code.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
    /// Human-readable summary lines (also printed by the binary).
    pub lines: Vec<String>,
}

/// Merge config file, flags and environment into one resolved config.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &cli.preset {
        cfg.species = Some(split_preset(p)?.into_iter().map(SpeciesSpec::Name).collect());
        cfg.preset = Some(p.clone());
    }
    set(&mut cfg.omega_over_omegaz, cli.omega);
    set(&mut cfg.alpha, cli.alpha);
    set(&mut cfg.guard_band, cli.guard_band);
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    match cli.command.clone() {
        Command::Modes => {}
        Command::Couplings {
            axis,
            omega_min,
            omega_max,
            omega_points,
        } => {
            set(&mut cfg.axis, axis);
            set(&mut cfg.sweep.omega_min, omega_min);
            set(&mut cfg.sweep.omega_max, omega_max);
            set(&mut cfg.sweep.omega_points, omega_points);
        }
        Command::GroundState { field } => set(&mut cfg.transverse_field, field),
        Command::PhaseDiagram {
            omega_min,
            omega_max,
            omega_points,
            field_min,
            field_max,
            field_points,
            observables,
        } => {
            set(&mut cfg.sweep.omega_min, omega_min);
            set(&mut cfg.sweep.omega_max, omega_max);
            set(&mut cfg.sweep.omega_points, omega_points);
            set(&mut cfg.sweep.field_min, field_min);
            set(&mut cfg.sweep.field_max, field_max);
            set(&mut cfg.sweep.field_points, field_points);
            set(&mut cfg.sweep.observables, observables);
        }
        Command::Readout {
            state,
            gradient,
            omega_z_hz,
            probe,
            compare,
        } => {
            set(&mut cfg.readout.configuration, state);
            set(&mut cfg.readout.gradient, gradient);
            set(&mut cfg.readout.omega_z_hz, omega_z_hz);
            set(&mut cfg.readout.probe, probe);
            set(&mut cfg.readout.compare, compare);
        }
        Command::ValidateDynamics {
            drive,
            rabi_ratio,
            n_max,
            periods,
            ramp_time,
        } => {
            set(&mut cfg.dynamics.drive, drive);
            set(&mut cfg.dynamics.rabi_ratio, rabi_ratio);
            set(&mut cfg.dynamics.n_max, n_max);
            set(&mut cfg.dynamics.periods, periods);
            set(&mut cfg.dynamics.ramp_time, ramp_time);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// CSV with a leading `# ionspin <version>; <units>` comment row.
    fn csv(&mut self, name: &str, units: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.dir.join(name);
        let mut file = File::create(&path)?;
        writeln!(file, "# ionspin {VERSION}; {units}")?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(path);
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    timestamp_unix: u64,
    files: Vec<String>,
    config: &'a RunConfig,
}

fn write_manifest(out: &mut Output, command: &'static str, cfg: &RunConfig) -> Result<()> {
    let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = Manifest {
        tool: "ionspin",
        version: VERSION,
        command,
        timestamp_unix,
        files: out
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect(),
        config: cfg,
    };
    let text = toml::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    let path = out.dir.join("manifest.toml");
    std::fs::write(&path, text)?;
    out.files.push(path);
    Ok(())
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:?}")
    }
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve_config(cli)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config("threads: must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("threads: {e}")))?;
    pool.install(|| dispatch(&cli.command, &cfg))
}

/// Execute one subcommand with a resolved config.
pub fn dispatch(command: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Output::new(&cfg.output_dir)?;
    let mut lines = Vec::new();
    let mut exit_code = 0;
    match command {
        Command::Modes => modes(cfg, &mut out, &mut lines)?,
        Command::Couplings { .. } => couplings(cfg, &mut out, &mut lines)?,
        Command::GroundState { .. } => ground_state(cfg, &mut out, &mut lines)?,
        Command::PhaseDiagram { .. } => phase(cfg, &mut out, &mut lines)?,
        Command::Readout { .. } => readout(cfg, &mut out, &mut lines)?,
        Command::ValidateDynamics { .. } => {
            if !validate_dynamics(cfg, &mut out, &mut lines)? {
                exit_code = 4;
            }
        }
    }
    write_manifest(&mut out, command.name(), cfg)?;
    Ok(Outcome {
        files: out.files,
        exit_code,
        lines,
    })
}

fn mode_rows(m: &ModeData) -> (Vec<String>, Vec<Vec<String>>) {
    let n = m.eigenvectors.nrows();
    let mut header = vec!["mode".to_string(), "eigenvalue".into(), "frequency".into()];
    header.extend((0..n).map(|i| format!("b_{i}")));
    let freqs = m.frequencies();
    let rows = (0..m.len())
        .map(|k| {
            let mut r = vec![k.to_string(), fmt(m.eigenvalues[k]), fmt(freqs[k])];
            r.extend((0..n).map(|i| fmt(m.vector_entry(i, k))));
            r
        })
        .collect();
    (header, rows)
}

fn modes(cfg: &RunConfig, out: &mut Output, lines: &mut Vec<String>) -> Result<()> {
    let crystal = cfg.crystal()?;
    let u = crystal.equilibrium_positions()?;
    let modes = ChainModes::compute(&crystal)?;
    let rows: Vec<Vec<String>> = u
        .iter()
        .enumerate()
        .map(|(i, x)| vec![i.to_string(), crystal.species[i].name.clone(), fmt(*x)])
        .collect();
    out.csv(
        "positions.csv",
        "positions in units of the Coulomb length",
        &["ion".into(), "species".into(), "position".into()],
        &rows,
    )?;
    let (h, r) = mode_rows(&modes.axial);
    out.csv("modes_axial.csv", "frequencies in units of omega_z", &h, &r)?;
    let (h, r) = mode_rows(&modes.radial_x);
    out.csv(
        "modes_radial.csv",
        &format!("frequencies in units of omega_z; alpha = {}; x and y degenerate", cfg.alpha),
        &h,
        &r,
    )?;
    lines.push(format!("axial frequencies: {:?}", modes.axial.frequencies()));
    lines.push(format!("radial frequencies: {:?}", modes.radial_x.frequencies()));
    Ok(())
}

/// Column names and values for a coupling set: `J_i_j` (i < j) then `A_k`.
fn coupling_columns(config: &CrystalConfig) -> Vec<String> {
    let n = config.len();
    let mut cols = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            cols.push(format!("J_{i}_{j}"));
        }
    }
    cols.extend(config.heavy_sites().iter().map(|k| format!("A_{k}")));
    cols
}

fn coupling_values(set: &CouplingSet) -> Vec<f64> {
    let n = set.n_sites();
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push(set.pair(i, j));
        }
    }
    v.extend(set.anisotropy.iter().copied());
    v
}

fn couplings(cfg: &RunConfig, out: &mut Output, lines: &mut Vec<String>) -> Result<()> {
    let crystal = cfg.crystal()?;
    let modes = ChainModes::compute(&crystal)?;
    let mode_data = modes.along(cfg.axis);
    let omegas = cfg.sweep.omegas();
    let sweep = coupling_sweep(mode_data, &crystal, 1.0, &omegas, cfg.guard_band);
    let cols = coupling_columns(&crystal);
    let mut header = vec!["omega".to_string(), "guarded".into(), "region".into()];
    header.extend(cols.iter().cloned());
    let mut guarded = 0;
    let rows: Vec<Vec<String>> = sweep
        .iter()
        .map(|p| {
            let mut r = vec![fmt(p.frequency)];
            match &p.couplings {
                Some(set) => {
                    r.push("false".into());
                    r.push(classify_phase(set).map(|c| c.region.to_string()).unwrap_or_default());
                    r.extend(coupling_values(set).into_iter().map(fmt));
                }
                None => {
                    guarded += 1;
                    r.push("true".into());
                    r.push(String::new());
                    r.extend(cols.iter().map(|_| String::new()));
                }
            }
            r
        })
        .collect();
    let name = format!("couplings_{}.csv", cfg.axis.as_char());
    out.csv(
        &name,
        "couplings in units of epsilon; omega in units of omega_z (radial axes: detuning)",
        &header,
        &rows,
    )?;
    lines.push(format!("{} points, {guarded} guarded", rows.len()));
    Ok(())
}

fn ground_state(cfg: &RunConfig, out: &mut Output, lines: &mut Vec<String>) -> Result<()> {
    let crystal = cfg.crystal()?;
    let (set, report) = ground_state_at(&crystal, cfg.omega_over_omegaz, cfg.transverse_field, cfg.guard_band)?;
    let mut rows = vec![
        vec!["ground_energy".into(), fmt(report.energies[0])],
        vec!["degeneracy".into(), report.ground_degeneracy.to_string()],
    ];
    if let Some(p) = report.phase {
        rows.push(vec!["region".into(), p.region.to_string()]);
        rows.push(vec!["region_heuristic".into(), p.heuristic.to_string()]);
    }
    if let Some((name, p)) = &report.dominant {
        rows.push(vec!["dominant".into(), name.clone()]);
        lines.push(format!("dominant set {name} with population {p:.6}"));
    }
    for (name, value) in coupling_columns(&crystal).into_iter().zip(coupling_values(&set)) {
        rows.push(vec![name, fmt(value)]);
    }
    for (name, p) in &report.populations {
        rows.push(vec![format!("P_{name}"), fmt(*p)]);
    }
    out.csv(
        "ground_state.csv",
        &format!(
            "energies and couplings in units of epsilon; omega = {} omega_z; B_x = {} epsilon",
            cfg.omega_over_omegaz, cfg.transverse_field
        ),
        &["quantity".into(), "value".into()],
        &rows,
    )?;
    lines.push(format!(
        "E0 = {:.10}, degeneracy {}, region {}",
        report.energies[0],
        report.ground_degeneracy,
        report.phase.map(|p| p.region.to_string()).unwrap_or_else(|| "n/a".into())
    ));

    if let Ok((lo, hi)) = region_two_window(&crystal) {
        if let Ok(crossings) = level_crossings(&crystal, lo, hi, 400) {
            let rows: Vec<Vec<String>> = crossings.iter().map(|c| vec![c.kind.name().into(), fmt(c.omega)]).collect();
            for c in &crossings {
                lines.push(format!("crossing {} at omega = {:.4}", c.kind.name(), c.omega));
            }
            out.csv(
                "crossings.csv",
                "omega in units of omega_z",
                &["crossing".into(), "omega".into()],
                &rows,
            )?;
        }
    }
    Ok(())
}

fn phase(cfg: &RunConfig, out: &mut Output, lines: &mut Vec<String>) -> Result<()> {
    let crystal = cfg.crystal()?;
    let d = phase_diagram(
        &crystal,
        &cfg.sweep.omegas(),
        &cfg.sweep.fields(),
        &cfg.sweep.observables,
        cfg.guard_band,
    )?;
    let mut header = vec!["omega".to_string(), "field".into(), "guarded".into(), "region".into()];
    header.extend(d.observables.iter().cloned());
    let mut rows = Vec::new();
    for (i, &w) in d.omegas.iter().enumerate() {
        for (j, &b) in d.fields.iter().enumerate() {
            let mut r = vec![fmt(w), fmt(b), d.guarded[i].to_string()];
            r.push(d.regions[i].map(|c| c.region.to_string()).unwrap_or_default());
            r.extend((0..d.observables.len()).map(|k| fmt(d.value(i, j, k))));
            rows.push(r);
        }
    }
    out.csv(
        "phase_diagram.csv",
        "omega in units of omega_z; field is B_x in units of epsilon; observables are ground-manifold populations",
        &header,
        &rows,
    )?;
    lines.push(format!(
        "{} x {} grid, {} guarded frequencies",
        d.omegas.len(),
        d.fields.len(),
        d.guarded.iter().filter(|g| **g).count()
    ));
    Ok(())
}

fn readout(cfg: &RunConfig, out: &mut Output, lines: &mut Vec<String>) -> Result<()> {
    let crystal = cfg.readout_crystal()?;
    let setup = ReadoutSetup::for_crystal(&crystal, cfg.readout.gradient, cfg.readout.probe)?;
    let state = parse_configuration(&cfg.readout.configuration)?;
    let report = shift_report(&setup, &state)?;
    let hz = report.splittings_hz();
    let rows: Vec<Vec<String>> = (0..crystal.len())
        .map(|i| {
            vec![
                i.to_string(),
                crystal.species[i].name.clone(),
                fmt(f64::from(state[i]) / 2.0),
                fmt(report.displacements[i] * 1e9),
                fmt(report.splittings[i]),
                fmt(hz[i]),
            ]
        })
        .collect();
    out.csv(
        "readout.csv",
        &format!(
            "SI: displacement in nm, splitting in rad/s and Hz; b = {} T/m; omega_z = 2pi x {} Hz",
            cfg.readout.gradient, cfg.readout.omega_z_hz
        ),
        &[
            "ion".into(),
            "species".into(),
            "m".into(),
            "displacement_nm".into(),
            "splitting_rad_s".into(),
            "splitting_hz".into(),
        ],
        &rows,
    )?;
    let p = cfg.readout.probe;
    lines.push(format!(
        "probe ion {p}: d_z = {:.3} nm, delta omega = {:.4e} rad/s ({:.4e} Hz)",
        report.displacements[p] * 1e9,
        report.splittings[p],
        hz[p]
    ));
    if !cfg.readout.compare.is_empty() {
        let configs = cfg
            .readout
            .compare
            .iter()
            .map(|s| parse_configuration(s))
            .collect::<Result<Vec<_>>>()?;
        let classes = distinguishability(&setup, &configs)?;
        let mut rows = Vec::new();
        for (k, class) in classes.iter().enumerate() {
            for &i in class {
                let d = crate::readout::spin_dependent_shift(&setup, &configs[i])?[p];
                rows.push(vec![k.to_string(), cfg.readout.compare[i].clone(), fmt(d * 1e9)]);
            }
            let members: Vec<&str> = class.iter().map(|&i| cfg.readout.compare[i].as_str()).collect();
            lines.push(format!("class {k}: {}", members.join(" | ")));
        }
        out.csv(
            "readout_classes.csv",
            "SI: probe displacement in nm",
            &["class".into(), "configuration".into(), "probe_displacement_nm".into()],
            &rows,
        )?;
    }
    Ok(())
}

fn validate_dynamics(cfg: &RunConfig, out: &mut Output, lines: &mut Vec<String>) -> Result<bool> {
    let d = &cfg.dynamics;
    let system = two_spin_scenario(d.drive, d.rabi_ratio, d.n_max)?;
    let psi = x_polarized_state(&system.basis);
    let duration = d.periods * system.coupling_period()?;
    let base = compare_effective(&system, &psi, duration, d.checkpoints)?;
    let half = compare_effective(&system.scaled(0.5), &psi, duration, d.checkpoints)?;
    let finer = compare_effective(&system.with_cutoff((d.n_max + 2).min(8))?, &psi, duration, d.checkpoints)?;
    let phase = two_spin_phase(&system, duration, d.checkpoints.max(8) * 5)?;
    let predicted = 2.0 * system.pair_coupling()? * duration;

    let gain = base.correlator_deviation / half.correlator_deviation;
    let cutoff_change = (finer.correlator_deviation - base.correlator_deviation).abs() / base.correlator_deviation;
    let phase_error = ((phase - predicted) / predicted).abs();
    let checks: Vec<(&str, f64, f64, bool)> = vec![
        ("correlator_deviation", base.correlator_deviation, d.max_deviation, base.correlator_deviation <= d.max_deviation),
        ("halving_gain", gain, d.min_halving_gain, gain >= d.min_halving_gain),
        ("cutoff_change", cutoff_change, 0.05, cutoff_change < 0.05),
        ("two_spin_phase_error", phase_error, 0.1, phase_error <= 0.1),
        ("norm_error", base.max_norm_error, 1e-8, base.max_norm_error <= 1e-8),
    ];
    let mut rows: Vec<Vec<String>> = vec![
        vec!["rabi_ratio".into(), fmt(system.rabi_ratio()), String::new(), String::new()],
        vec!["duration".into(), fmt(duration), String::new(), String::new()],
        vec!["deviation_all".into(), fmt(base.deviation), String::new(), String::new()],
        vec!["deviation_half_gradient".into(), fmt(half.correlator_deviation), String::new(), String::new()],
        vec!["two_spin_phase".into(), fmt(phase), fmt(predicted), String::new()],
    ];
    let mut all_pass = true;
    for (name, value, bound, pass) in &checks {
        rows.push(vec![name.to_string(), fmt(*value), fmt(*bound), pass.to_string()]);
        lines.push(format!("{} {name} = {value:.4e} (bound {bound})", if *pass { "PASS" } else { "FAIL" }));
        all_pass &= pass;
    }

    if d.ramp_time > 0.0 {
        let crystal = cfg.crystal()?;
        let basis = SpinBasis::new(crystal.spins())?;
        if let Ok(start) = prepare_initial_state(&basis) {
            let modes = ModeData::axial(&crystal)?;
            let set = axial_couplings(&crystal, &modes, cfg.omega_over_omegaz, cfg.guard_band)?;
            let hz = build_effective_z(&set, &basis)?;
            let schedule = RampSchedule::new(d.ramp_time, d.ramp_field_start, d.ramp_field_end)?;
            let r = adiabatic_ramp(&hz, &start, &schedule)?;
            rows.push(vec!["ramp_fidelity".into(), fmt(r.fidelity), String::new(), String::new()]);
            rows.push(vec!["ramp_min_gap".into(), fmt(r.min_gap), fmt(crate::dynamics::CROSSING_GAP), (!r.crossing_warning).to_string()]);
            lines.push(format!(
                "ramp T = {} / epsilon: fidelity {:.6}, min gap {:.3e}{}",
                d.ramp_time,
                r.fidelity,
                r.min_gap,
                if r.crossing_warning { " (WARNING: passes a level crossing)" } else { "" }
            ));
        }
    }
    out.csv(
        "dynamics.csv",
        "time in units of 1/omega_z (ramp: 1/epsilon); deviations are absolute differences of spin expectation values",
        &["parameter".into(), "value".into(), "bound".into(), "pass".into()],
        &rows,
    )?;
    Ok(all_pass)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
                eprintln!("error kind=usage code=2: {first}");
                return 2;
            }
            print!("{e}");
            return 0;
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            for l in &outcome.lines {
                println!("{l}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error kind={} code={}: {}", e.kind(), e.exit_code(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

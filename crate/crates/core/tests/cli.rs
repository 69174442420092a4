use std::fs;
use std::path::Path;
use std::process::Command;

use ionspin::cli::main_with_args;
use ionspin::config::RunConfig;

fn run(dir: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["ionspin".to_string(), "-o".to_string(), dir.display().to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    main_with_args(full)
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn modes_writes_three_row_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["modes"]), 0);
    assert_eq!(data_rows(&dir.path().join("modes_axial.csv")).len(), 3);
    assert_eq!(data_rows(&dir.path().join("modes_radial.csv")).len(), 3);
    assert!(dir.path().join("manifest.toml").exists());
}

#[test]
fn every_csv_starts_with_version_comment() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["modes"]), 0);
    assert_eq!(run(dir.path(), &["ground-state", "--field", "0.01"]), 0);
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            let first = fs::read_to_string(&path).unwrap().lines().next().unwrap().to_string();
            assert!(first.starts_with("# ionspin "), "{}: {first}", path.display());
        }
    }
}

#[test]
fn identical_config_gives_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["phase-diagram", "--omega-min", "0.8", "--omega-max", "2.0", "--omega-points", "13", "--field-points", "7"];
    assert_eq!(run(a.path(), &args), 0);
    assert_eq!(run(b.path(), &[&["--threads", "3"], &args[..]].concat()), 0);
    let read = |d: &Path| fs::read(d.join("phase_diagram.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(data_rows(&a.path().join("phase_diagram.csv")).len(), 13 * 7);
}

#[test]
fn guarded_resonance_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--omega", "0.9596", "ground-state"]), 3);
}

#[test]
fn readout_reports_fifty_nanometre_shift() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["readout", "--state", "up,3,up", "--gradient", "20"]), 0);
    let text = fs::read_to_string(dir.path().join("readout.csv")).unwrap();
    let d = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .find_map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0] == "0").then(|| cols[3].parse::<f64>().unwrap())
        })
        .unwrap();
    assert!((d - 50.0).abs() < 2.5, "{d}");
}

#[test]
fn minimal_config_resolves_defaults() {
    let cfg = RunConfig::from_toml_str("preset = \"CaMnCa\"\nomega_over_omegaz = 1.8\n").unwrap();
    assert_eq!(cfg, RunConfig { omega_over_omegaz: 1.8, ..RunConfig::default() });
    let back = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn unknown_key_is_named_in_the_error() {
    let err = RunConfig::from_toml_str("omega_x_typo = 1.0\n").unwrap_err();
    assert!(err.to_string().contains("omega_x_typo"), "{err}");
}

#[test]
fn explicit_five_site_pattern_is_accepted() {
    let cfg = RunConfig::from_toml_str("species = [\"Ca\", \"Mn\", \"Ca\", \"Mn\", \"Ca\"]\n").unwrap();
    let crystal = cfg.crystal().unwrap();
    assert_eq!(crystal.len(), 5);
    assert_eq!(crystal.heavy_sites(), vec![1, 3]);
}

#[test]
fn binary_reports_single_line_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "omega_x_typo = 2\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ionspin"))
        .args(["-c", cfg.to_str().unwrap(), "modes"])
        .env("IONSPIN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.trim_end().lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error kind=config code=2"), "{stderr}");
}

#[test]
fn output_dir_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ionspin"))
        .arg("modes")
        .env("IONSPIN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("positions.csv").exists());
}

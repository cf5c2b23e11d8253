use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn apc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apc")).current_dir(dir).env("APC_THREADS", "2").args(args).output().unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "[output]\ndir = \"out\"\n").unwrap();
    dir
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let dir = setup();
    let out = apc(dir.path(), &["frobnicate", "run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn help_exits_cleanly() {
    let dir = setup();
    let out = apc(dir.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep-epsilon"));
}

#[test]
fn calibrate_writes_outputs() {
    let dir = setup();
    let out = apc(dir.path(), &["calibrate", "run.toml"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/mu_c.json")).unwrap()).unwrap();
    assert!(v["mu_c"].as_f64().unwrap() > 0.0);
    assert!(dir.path().join("out/resolved_config.toml").exists());
    let leftovers = fs::read_dir(dir.path().join("out")).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with('.')).count();
    assert_eq!(leftovers, 0);
}

#[test]
fn spectrum_writes_curve() {
    let dir = setup();
    let out = apc(dir.path(), &["spectrum", "run.toml", "spectrum.steps=11", "spectrum.box_length=20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/curve.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("mu,E,dE_dmu"));
    assert!(text.lines().count() >= 2);
}

#[test]
fn bad_values_exit_with_two() {
    let dir = setup();
    let out = apc(dir.path(), &["calibrate", "run.toml", "dynamics.dt=0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dynamics.dt"));
    fs::write(dir.path().join("typo.toml"), "[profile]\nmu_maxx = 1.4\n").unwrap();
    let out = apc(dir.path(), &["calibrate", "typo.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("typo.toml:2") && err.contains("profile.mu_max"), "{err}");
    let out = apc(dir.path(), &["calibrate", "missing.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn static_evolve_writes_trajectory() {
    let dir = setup();
    let out = apc(dir.path(), &["evolve", "run.toml", "evolve.mode=static", "evolve.time=5", "record_stride=1"]);
    assert_eq!(out.status.code(), Some(2), "unknown top-level key");
    let out = apc(dir.path(), &["evolve", "run.toml", "evolve.mode=static", "evolve.time=5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("t,s,norm,region_mass,crit_overlap"));
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("# {"), "{footer}");
}

#[test]
fn resolved_config_reproduces_the_run() {
    let dir = setup();
    let args = ["spectrum", "run.toml", "spectrum.steps=6", "spectrum.box_length=15", "spectrum.mu_lo=0.7"];
    assert_eq!(apc(dir.path(), &args).status.code(), Some(0));
    let first = fs::read_to_string(dir.path().join("out/curve.csv")).unwrap();
    fs::copy(dir.path().join("out/resolved_config.toml"), dir.path().join("again.toml")).unwrap();
    fs::remove_file(dir.path().join("out/curve.csv")).unwrap();
    assert_eq!(apc(dir.path(), &["spectrum", "again.toml"]).status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("out/curve.csv")).unwrap(), first);
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const SMALL_GRID: &str = r#"{
  "wafer_thickness_um": [100, 150, 200, 250],
  "substrate_doping_cm3": [1e16],
  "pyramid_angle_deg": [50, 54.74],
  "rear_contact_thickness_um": [2],
  "arc_thickness_nm": [60, 90],
  "back_reflectivity_frac": [0.8]
}"#;

pub const DESIGN: &str = r#"{
  "wafer_thickness_um": 175,
  "substrate_doping_cm3": 1e16,
  "pyramid_angle_deg": 50,
  "rear_contact_thickness_um": 2,
  "arc_thickness_nm": 75,
  "back_reflectivity_frac": 0.8
}"#;

pub fn gpsurr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpsurr"))
        .args(args)
        .current_dir(dir)
        .env_remove("GPSURR_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

pub fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A temp dir holding `small.csv`, 16 reflectance runs (288 rows).
pub fn small_workspace() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("small.csv");
    ok(&gpsurr(
        dir.path(),
        &["generate", "--out", "small.csv", "--grid", SMALL_GRID, "--seed", "1"],
    ));
    (dir, data)
}

pub fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

pub fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

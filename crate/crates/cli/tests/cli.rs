mod common;

use common::*;
use serde_json::Value;

fn without(mut v: Value, keys: &[&str]) -> Value {
    for k in keys {
        v.as_object_mut().unwrap().remove(*k);
    }
    v
}

#[test]
fn generate_default_reports_full_database() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&gpsurr(dir.path(), &["generate", "--out", "db.csv"]));
    assert!(out.contains("768 reflectance runs (13824 rows)"), "{out}");
    let text = read(dir.path().join("db.csv"));
    assert!(text.starts_with("# oracle_version="));
    assert!(text.contains("# config_hash=") && text.contains("# seed=0"));
}

#[test]
fn generate_is_byte_identical_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        ok(&gpsurr(dir.path(), &["generate", "--out", name, "--grid", SMALL_GRID, "--seed", "5"]));
    }
    assert_eq!(read(dir.path().join("a.csv")), read(dir.path().join("b.csv")));
    ok(&gpsurr(dir.path(), &["generate", "--out", "c.csv", "--grid", SMALL_GRID, "--seed", "6"]));
    assert_ne!(read(dir.path().join("a.csv")), read(dir.path().join("c.csv")));
}

#[test]
fn generation_curves_use_depth_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let grid = r#"{"wafer_thickness_um": [150], "substrate_doping_cm3": [1e16], "pyramid_angle_deg": [50],
        "rear_contact_thickness_um": [2], "arc_thickness_nm": [75], "back_reflectivity_frac": [0.8], "depth_points": 10}"#;
    let out = ok(&gpsurr(dir.path(), &["generate", "--kind", "generation", "--out", "g.csv", "--grid", grid]));
    assert!(out.contains("1 generation runs (10 rows)"), "{out}");
}

#[test]
fn seed_env_var_is_the_default_seed() {
    let dir = tempfile::tempdir().unwrap();
    let st = std::process::Command::new(env!("CARGO_BIN_EXE_gpsurr"))
        .args(["generate", "--out", "s.csv", "--grid", SMALL_GRID])
        .current_dir(dir.path())
        .env("GPSURR_SEED", "17")
        .output()
        .unwrap();
    ok(&st);
    assert!(read(dir.path().join("s.csv")).contains("# seed=17"));
}

#[test]
fn bad_grid_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = gpsurr(dir.path(), &["generate", "--out", "x.csv", "--grid", r#"{"arc_thickness_nm": []}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("arc_thickness_nm"), "{}", stderr(&out));
    let out = gpsurr(dir.path(), &["generate", "--out", "x.csv", "--grid", r#"{"arc_thicknes": [1]}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("arc_thicknes"), "{}", stderr(&out));
}

#[test]
fn exit_codes() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    let code = |args: &[&str]| gpsurr(d, args).status.code();
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["train", "--data", "small.csv", "--out", "m.json", "--model", "svm"]), Some(2));
    assert_eq!(code(&["train", "--data", "missing.csv", "--out", "m.json"]), Some(2));
    assert_eq!(code(&["train", "--data", "small.csv", "--out", "m.json", "--features", "colour"]), Some(2));
    assert_eq!(code(&["train", "--data", "small.csv", "--out", "no/such/dir/m.json"]), Some(2));
    std::fs::write(d.join("junk.csv"), "run_id,value\n1,2\n").unwrap();
    assert_eq!(code(&["train", "--data", "junk.csv", "--out", "m.json"]), Some(3));
    // an infinite step size makes the first MLP epoch non-finite
    assert_eq!(
        code(&["train", "--data", "small.csv", "--out", "m.json", "--model", "mlp", "--step", "inf"]),
        Some(4)
    );
}

#[test]
fn train_writes_model_and_metrics_deterministically() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    let args = |out: &'static str, m: &'static str| {
        vec!["train", "--data", "small.csv", "--out", out, "--metrics", m, "--seed", "3", "--restarts", "0"]
    };
    let stdout = ok(&gpsurr(d, &args("a.json", "a.metrics.json")));
    ok(&gpsurr(d, &args("b.json", "b.metrics.json")));
    let ma = json(d.join("a.metrics.json"));
    assert_eq!(serde_json::from_str::<Value>(&stdout).unwrap(), ma);
    for key in ["r2", "rmse", "mean_ci_width", "train_time", "config_hash", "seed"] {
        assert!(ma.get(key).is_some(), "metrics lack {key}");
    }
    assert_eq!(
        without(ma, &["train_time"]),
        without(json(d.join("b.metrics.json")), &["train_time"])
    );
    let (a, b) = (json(d.join("a.json")), json(d.join("b.json")));
    assert_eq!(a["provenance"]["seed"], "3");
    assert_eq!(without(a, &["created_at"]), without(b, &["created_at"]));
}

#[test]
fn baseline_metrics_have_no_interval_fields() {
    let (dir, _) = small_workspace();
    let out = ok(&gpsurr(
        dir.path(),
        &["train", "--data", "small.csv", "--out", "rf.json", "--model", "rf", "--trees", "10"],
    ));
    let m: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(m["model"], "rf");
    assert!(m.get("mean_ci_width").is_none() && m.get("coverage").is_none());
}

#[test]
fn config_file_values_yield_to_flags() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"seed": 8, "restarts": 0, "train": {"features": ["wafer_thickness_um"], "max_iters": 5}}"#,
    )
    .unwrap();
    let m: Value = serde_json::from_str(&ok(&gpsurr(
        d,
        &["train", "--config", "cfg.json", "--data", "small.csv", "--out", "m.json"],
    )))
    .unwrap();
    assert_eq!(m["seed"], 8);
    assert_eq!(m["features"], serde_json::json!(["wafer_thickness_um", "wavelength_nm"]));
    let m: Value = serde_json::from_str(&ok(&gpsurr(
        d,
        &[
            "train", "--config", "cfg.json", "--data", "small.csv", "--out", "m.json", "--seed", "2",
            "--features", "arc_thickness_nm",
        ],
    )))
    .unwrap();
    assert_eq!(m["seed"], 2);
    assert_eq!(m["features"], serde_json::json!(["arc_thickness_nm", "wavelength_nm"]));
}

#[test]
fn config_file_errors_are_usage_errors() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    std::fs::write(d.join("bad.json"), r#"{"train": {"colour": 1}}"#).unwrap();
    let out = gpsurr(d, &["train", "--config", "bad.json", "--data", "small.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("train.colour"));
    let out = gpsurr(d, &["train", "--config", "none.json", "--data", "small.csv", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
}

fn trained(dir: &std::path::Path) {
    ok(&gpsurr(
        dir,
        &["train", "--data", "small.csv", "--out", "gp.json", "--restarts", "0", "--max-iters", "30"],
    ));
}

#[test]
fn predict_profile_csv_and_json() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    trained(d);
    ok(&gpsurr(
        d,
        &["predict", "--model", "gp.json", "--design", DESIGN, "--out", "p.csv", "--json-out", "p.json", "--truth"],
    ));
    let csv = read(d.join("p.csv"));
    let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "wavelength_nm,mean,variance,ci_lower,ci_upper,oracle");
    assert_eq!(body.len(), 19);
    let j = json(d.join("p.json"));
    assert_eq!(j["model_id"], "gp");
    assert_eq!(j["sweep_values"].as_array().unwrap().len(), 18);
    let first: Vec<f64> = body[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[1], j["means"][0].as_f64().unwrap());
    assert!(first[3] < first[1] && first[1] < first[4]);
}

#[test]
fn predict_with_zero_z_collapses_the_interval() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    trained(d);
    let out = ok(&gpsurr(
        d,
        &["predict", "--model", "gp.json", "--design", DESIGN, "--z", "0", "--start", "400", "--stop", "1000", "--count", "7"],
    ));
    let rows: Vec<Vec<String>> = out
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[6][0], "1000");
    for r in rows {
        assert_eq!(r[3], r[1]);
        assert_eq!(r[4], r[1]);
    }
}

#[test]
fn predict_missing_feature_lists_expected_names() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    trained(d);
    let out = gpsurr(d, &["predict", "--model", "gp.json", "--set", "wafer_thickness_um=150"]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("arc_thickness_nm") && err.contains("expected"), "{err}");
}

#[test]
fn predict_ignores_design_values_the_model_does_not_use() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    ok(&gpsurr(
        d,
        &["train", "--data", "small.csv", "--out", "t.json", "--features", "wafer_thickness_um", "--restarts", "0"],
    ));
    ok(&gpsurr(d, &["predict", "--model", "t.json", "--design", DESIGN]));
    let out = gpsurr(d, &["predict", "--model", "t.json", "--design", DESIGN, "--set", "colour=1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn backpredict_reports_closure_and_flags_out_of_range_requests() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    let out = ok(&gpsurr(
        d,
        &[
            "backpredict", "--data", "small.csv", "--reflectance", "0.3,0.99", "--design", DESIGN,
            "--restarts", "0", "--out", "bp.json", "--model-out", "inv.json",
        ],
    ));
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r, json(d.join("bp.json")));
    let preds = r["predictions"].as_array().unwrap();
    assert_eq!(preds.len(), 2);
    assert_eq!(preds[1]["out_of_range"], true);
    for p in preds {
        assert!(p["mean"].as_f64().unwrap().is_finite());
        assert!(p["ci_upper"].as_f64().unwrap() > p["ci_lower"].as_f64().unwrap());
    }
    let inv = json(d.join("inv.json"));
    assert_eq!(inv["target_name"], "wafer_thickness_um");
    assert!(inv["feature_names"].as_array().unwrap().contains(&Value::from("reflectance")));
}

#[test]
fn backpredict_rejects_non_design_target() {
    let (dir, _) = small_workspace();
    let out = gpsurr(dir.path(), &["backpredict", "--data", "small.csv", "--reflectance", "0.3", "--target", "colour"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_table_variance_only_for_gpr_and_reproducible() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    let args = |out: &'static str, s: &'static str| {
        vec![
            "compare", "--data", "small.csv", "--restarts", "0", "--trees", "10", "--epochs", "20",
            "--out", out, "--summary", s,
        ]
    };
    let stdout = ok(&gpsurr(d, &args("a.csv", "a.json")));
    assert!(stdout.contains("gpr") && stdout.contains("rf") && stdout.contains("mlp"));
    ok(&gpsurr(d, &args("b.csv", "b.json")));
    let table = read(d.join("a.csv"));
    assert_eq!(table, read(d.join("b.csv")));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(table.as_bytes());
    let mut seen = std::collections::BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        seen.insert(rec[0].to_string());
        assert_eq!(rec[0] == *"gpr", !rec[5].is_empty(), "{rec:?}");
    }
    assert_eq!(seen.len(), 3);
    let s = json(d.join("a.json"));
    assert_eq!(s["models"].as_array().unwrap().len(), 3);
}

#[test]
fn serve_requires_models_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = gpsurr(dir.path(), &["serve", "--models-dir", "nowhere"]);
    assert_eq!(out.status.code(), Some(2));
}

fn http_get(port: u16, path: &str) -> Option<String> {
    use std::io::{Read, Write};
    let mut s = std::net::TcpStream::connect(("127.0.0.1", port)).ok()?;
    write!(s, "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").ok()?;
    let mut buf = String::new();
    s.read_to_string(&mut buf).ok()?;
    Some(buf)
}

#[test]
fn serve_answers_health_checks() {
    let (dir, _) = small_workspace();
    let d = dir.path();
    std::fs::create_dir(d.join("models")).unwrap();
    ok(&gpsurr(
        d,
        &["train", "--data", "small.csv", "--out", "models/refl.json", "--restarts", "0", "--max-iters", "5"],
    ));
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = std::process::Command::new(env!("CARGO_BIN_EXE_gpsurr"))
        .args(["serve", "--models-dir", "models", "--port", &port.to_string()])
        .current_dir(d)
        .spawn()
        .unwrap();
    let mut body = None;
    for _ in 0..200 {
        if let Some(r) = http_get(port, "/healthz") {
            if r.starts_with("HTTP/1.1 200") {
                body = Some(r);
                break;
            }
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    let models = http_get(port, "/models");
    child.kill().unwrap();
    child.wait().unwrap();
    let body = body.expect("service became ready");
    assert!(body.contains("\"models_loaded\":1"), "{body}");
    assert!(models.unwrap().contains("\"model_id\":\"refl\""));
}

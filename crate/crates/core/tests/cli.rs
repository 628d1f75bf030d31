use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn rnl_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnl-lab")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> String {
    let out = rnl_lab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty());
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path, body: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body.to_string()).unwrap();
    path
}

fn flagship() -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(data("flagship.json")).unwrap()).unwrap()
}

#[test]
fn predict_reports_conflict() {
    let text = run_ok(&["predict", "--config", data("flagship.json").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["label"], "(a,a)");
    assert!(v["rnl"]["E"].as_f64().unwrap().abs() < 1e-12);
    assert!((v["qm"]["E"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(v["alpha_deg"], 45.0);
}

#[test]
fn sweep_rows_follow_closed_form() {
    let text = run_ok(&["sweep", "--config", data("flagship.json").to_str().unwrap()]);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha_deg,beta_deg,E_rnl,E_qm,E_bb,E_ab"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 91);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!((r[0], r[1]), (i as f64, -(i as f64) + 0.0));
        let (a, b) = (r[0].to_radians(), r[1].to_radians());
        let closed = (2.0 * a).cos() * (2.0 * b).cos() * (2.0 * (a + b)).cos().powi(2);
        assert!((r[2] - closed).abs() < 1e-12, "row {i}");
        assert_eq!(r[3], 1.0);
        assert!((r[4] - (2.0 * a).cos() * (2.0 * b).cos()).abs() < 1e-12);
    }
}

#[test]
fn classify_csv_and_json_agree() {
    let cfg = data("two_before.json");
    let csv = run_ok(&["classify", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert!(csv.starts_with("photon,class,gap_s\n1,before,"));
    let json: serde_json::Value =
        serde_json::from_str(&run_ok(&["classify", "--config", cfg.to_str().unwrap()])).unwrap();
    assert_eq!(json["label"], "(b,b)");
    assert_eq!(json["photon2"]["class"], "before");
    assert!(json["photon2"]["gap_s"].as_f64().unwrap() < 0.0);
}

#[test]
fn simulate_is_deterministic() {
    let cfg = data("two_before.json");
    let a = run_ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    let b = run_ok(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["rnl"]["record"]["N"], 100000);
    assert_eq!(v["rnl"]["record"]["seed"], 7);
    let e_hat = v["rnl"]["estimate"]["E_hat"].as_f64().unwrap();
    let stderr = v["rnl"]["estimate"]["stderr"].as_f64().unwrap();
    assert!((e_hat - 0.5).abs() <= 4.5 * stderr);
    assert!(v["discrimination_sigma"].as_f64().unwrap() > 100.0);
}

#[test]
fn out_flag_writes_file_not_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("f.csv");
    let stdout =
        run_ok(&["feasibility", "--config", data("planner.json").to_str().unwrap(), "--out", target.to_str().unwrap()]);
    assert!(stdout.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert_eq!(written.lines().count(), 1 + 4 * 3);
    assert!(written.starts_with("V_mps,L_m,dt_max_s\n5.0000000000000000e1,1.0000000000000000e4,"));
}

#[test]
fn feasibility_json_carries_margin() {
    let text = run_ok(&["feasibility", "--config", data("planner.json").to_str().unwrap(), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["safety_margin"], 0.2);
    let row = &v["rows"][0];
    let ratio = row["dt_safe_s"].as_f64().unwrap() / row["dt_max_s"].as_f64().unwrap();
    assert!((ratio - 0.8).abs() < 1e-15);
}

#[test]
fn validation_errors_exit_1_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = flagship();
    cfg["geometry"]["splitter2"]["v_mps"] = serde_json::json!(3e8);
    let path = write_config(dir.path(), &cfg);
    let out = rnl_lab(&["predict", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("geometry.splitter2.v_mps") && err.contains("superluminal"), "{err}");
}

#[test]
fn mixed_markings_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = flagship();
    cfg["markings"]["photon2"] = "d".into();
    let path = write_config(dir.path(), &cfg);
    let out = rnl_lab(&["classify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mixed markings"));
}

#[test]
fn missing_sections_and_bad_formats_exit_1() {
    let out = rnl_lab(&["simulate", "--config", data("distinguishable.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = rnl_lab(&["sweep", "--config", data("distinguishable.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = rnl_lab(&["predict", "--config", data("flagship.json").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(1));
    let out = rnl_lab(&["teleport", "--config", data("flagship.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unreadable_config_exits_2() {
    let out = rnl_lab(&["predict", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn distinguishable_setup_compares_against_mixture() {
    let text = run_ok(&["predict", "--config", data("distinguishable.json").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["label"], "(b,b)");
    assert!((v["rnl"]["E"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["rnl"], v["qm"]);
}

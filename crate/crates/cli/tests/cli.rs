use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blindwit"))
}

#[test]
fn flux_sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{ "kind": "flux_sweep", "n_wit": 0, "flux_points": 101 }"#,
    )
    .unwrap();
    let out = bin()
        .args(["flux-sweep", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(dir.path().join("flux_sweep.csv")).unwrap();
    assert!(csv.starts_with("flux_ratio,P_out,dP_norm\n"));
    assert_eq!(csv.lines().count(), 102);
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("flux_sweep.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["rows"], 101);
    assert!(manifest["visibility"].as_f64().is_some());
    assert_eq!(manifest["units"]["gamma"], "1 (unit of energy)");
}

#[test]
fn snapshot_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    std::fs::write(
        &cfg_path,
        r#"{ "kind": "snapshot", "times_over_tau": [0.0] }"#,
    )
    .unwrap();
    let out = bin()
        .args(["snapshot", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("snapshot.csv")).unwrap();
    assert!(csv.starts_with("site,x_over_a,y_over_a,prob,time_over_tau\n"));
    assert_eq!(csv.lines().count(), 36);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");

    // unknown key
    std::fs::write(&cfg_path, r#"{ "kind": "flux_sweep", "bogus": 1 }"#).unwrap();
    let out = bin()
        .args(["flux-sweep", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // kind does not match the verb
    std::fs::write(&cfg_path, r#"{ "kind": "flux_sweep" }"#).unwrap();
    let out = bin()
        .args(["snapshot", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not match"));

    // missing file
    let out = bin()
        .args(["flux-sweep", "--config", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn geometry_dump() {
    let out = bin().arg("geometry").output().unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["sites"].as_array().unwrap().len(), 35);
    assert_eq!(json["edges"].as_array().unwrap().len(), 35);
    assert_eq!(json["output_site"], 27);
}

#[test]
fn validate_passes() {
    let out = bin().arg("validate").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().filter(|l| l.starts_with("PASS ")).count() >= 10);
    assert!(!stdout.contains("FAIL"));
}

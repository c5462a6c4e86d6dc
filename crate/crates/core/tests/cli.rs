use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use qsp_core::experiment::DEFECT_CSV_HEADER;

fn qsp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qsp"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name)
}

#[test]
fn minorized_diagnose_writes_decayed_csv() {
    let out = tempfile::tempdir().unwrap();
    let status = qsp().arg("diagnose").arg(config("minorized.json")).arg("--out").arg(out.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.path().join("defects.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(DEFECT_CSV_HEADER));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 40);
    let last: Vec<f64> = rows[39].split(',').skip(1).take(2).map(|v| v.parse().unwrap()).collect();
    assert!(last.iter().all(|v| *v <= 1e-3), "{last:?}");

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["threshold"], 1e-3);
    assert_eq!(summary["config"]["sample_count"], 16);
    assert_eq!(summary["qsp_certificate"]["k0"], 1);
    assert!(summary["qsp_certificate"]["min_lambda"].as_f64().unwrap() >= 0.3);
    assert!(summary["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true || c["asserted"] == false));
    assert!(summary.get("wall_clock_seconds").is_none());
}

#[test]
fn identity_mix_minorize_reports_no_certificate() {
    let out = tempfile::tempdir().unwrap();
    let res = qsp().arg("minorize").arg(config("identity_mix.json")).arg("--out").arg(out.path()).output().unwrap();
    assert_eq!(res.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&res.stderr).contains("no certificate"));
    let summary = fs::read_to_string(out.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"certificate_note\": \"no certificate\""));
}

#[test]
fn config_errors_exit_two() {
    let res = qsp().arg("diagnose").arg(config("bad_dim.json")).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("dim"));
    let res = qsp().arg("validate").arg("/nonexistent/config.json").output().unwrap();
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn asserted_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("strict.json");
    fs::write(
        &path,
        r#"{"dim": 3, "horizon": 8, "generator": {"preset": "random"}, "seed": 3,
            "diagnostics": ["kc"], "tolerances": {"kc": 0.0}}"#,
    )
    .unwrap();
    let res = qsp().arg("diagnose").arg(&path).output().unwrap();
    // Roundoff in the 8-step products is nonzero, so a zero tolerance trips.
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("FAILED kc_residual_max"));
}

#[test]
fn simulate_without_output_prints_summary() {
    let res = qsp().arg("simulate").arg(config("pair_lift.json")).output().unwrap();
    assert_eq!(res.status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    let x: Vec<f64> = serde_json::from_value(summary["final_state"].clone()).unwrap();
    assert_eq!(x.len(), 3);
    assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn simulate_writes_trajectory() {
    let out = tempfile::tempdir().unwrap();
    let status = qsp().arg("simulate").arg(config("random_type_a.json")).arg("--out").arg(out.path()).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("n,x_0,x_1,x_2,x_3\n"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn lemma_tool() {
    let res =
        qsp().args(["lemma", "--family", "constant", "--c", "0.5", "--a0", "1", "--horizon", "5"]).output().unwrap();
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    let row2: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row2[0], "2");
    assert_eq!(row2[2].parse::<f64>().unwrap(), 0.75);

    let res = qsp().args(["lemma", "--family", "harmonic", "--c", "1", "--horizon", "50"]).output().unwrap();
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("# decay: fails"));

    let res = qsp().args(["lemma", "--family", "custom", "--values", "0.2,1.0"]).output().unwrap();
    assert_eq!(res.status.code(), Some(2));
}

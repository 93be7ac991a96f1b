//! End-to-end tests of the `sdkg` binary: exit codes, artifact layout,
//! determinism and the failure paths.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sdkg"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn quick_config(out: &Path, extra: &str) -> String {
    format!(
        r#"{{
            "params": {{"n": 1, "m": 1.0, "beta": 0.1}},
            "u0": {{"terms": [{{"c": 1.0, "a": 1.0}}]}},
            "u1": {{"terms": [{{"c": 1.0, "a": 1.0}}]}},
            "t_grid": {{"t_min": 10.0, "t_max": 1000.0, "points_per_decade": 6, "samples_per_period": 4}},
            "quadrature": {{"rel_tol": 1e-8, "abs_tol": 1e-12}},
            "outputs": {{"dir": "{}"}}{extra}
        }}"#,
        out.display()
    )
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn simulate_minimal_config_emits_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "scen.json",
        &quick_config(&out, ", \"checks\": [\"energy_identity\", \"reconstruction\"]"),
    );
    let res = run(bin().arg("simulate").arg(&cfg).arg("--svg"));
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("norms.csv").exists());
    assert!(out.join("report.json").exists());
    assert!(out.join("plots/norms.svg").exists());
    assert!(out.join("plots/profile_error.svg").exists());

    // CSV has a header and one row per grid point, full double precision.
    let csv = fs::read_to_string(out.join("norms.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,l2,l2_err,grad,grad_err,ut,ut_err,energy,energy_err,profile_err2,profile_err2_err"
    );
    let first = lines.next().unwrap();
    assert!(first.split(',').count() == 11);
    assert!(first.contains('e'), "scientific notation expected: {first}");
}

#[test]
fn verify_passes_on_sound_scenario_and_reports_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "scen.json",
        &quick_config(&out, ", \"checks\": [\"norm_decay\"]"),
    );
    let res = run(bin().arg("verify").arg(&cfg));
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let records = report["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["name"], "norm_decay");
    assert_eq!(records[0]["status"], "pass");
}

#[test]
fn schema_violations_exit_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = quick_config(&out, "").replace("\"beta\": 0.1", "\"beta\": 1.5");
    let cfg = write_config(dir.path(), "bad.json", &bad);
    let res = run(bin().arg("verify").arg(&cfg));
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("beta"), "stderr should name the field: {err}");

    // Unknown keys are schema errors too.
    let unknown = quick_config(&out, ", \"not_a_key\": 1");
    let cfg = write_config(dir.path(), "unknown.json", &unknown);
    let res = run(bin().arg("verify").arg(&cfg));
    assert_eq!(res.status.code(), Some(2));

    // Unreadable config.
    let res = run(bin().arg("verify").arg(dir.path().join("missing.json")));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn quadrature_failure_exits_3_with_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // A panel budget this small cannot satisfy the tolerance at any t.
    let cfg_body = quick_config(&out, "")
        .replace("\"rel_tol\": 1e-8, \"abs_tol\": 1e-12", "\"rel_tol\": 1e-14, \"abs_tol\": 1e-16, \"max_panels\": 5");
    let cfg = write_config(dir.path(), "scen.json", &cfg_body);
    let res = run(bin().arg("simulate").arg(&cfg));
    assert_eq!(res.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    // The CSV was still flushed (header at minimum).
    let csv = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert!(csv.starts_with("t,l2"));
}

#[test]
fn identical_config_and_seed_give_byte_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    let checks = ", \"checks\": [\"mode_residual\", \"norm_decay\"], \"seed\": 7";
    let cfg1 = write_config(dir.path(), "a.json", &quick_config(&out1, checks));
    let cfg2 = write_config(dir.path(), "b.json", &quick_config(&out2, checks));
    assert!(run(bin().arg("verify").arg(&cfg1)).status.success());
    assert!(run(bin().arg("verify").arg(&cfg2)).status.success());
    let csv1 = fs::read(out1.join("norms.csv")).unwrap();
    let csv2 = fs::read(out2.join("norms.csv")).unwrap();
    assert_eq!(csv1, csv2, "norm series must be byte-identical");
    let rep1 = fs::read_to_string(out1.join("report.json")).unwrap();
    let rep2 = fs::read_to_string(out2.join("report.json")).unwrap();
    assert_eq!(rep1, rep2, "reports must be byte-identical");
}

#[test]
fn injected_certificate_fault_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "scen.json",
        &quick_config(
            &out,
            ", \"checks\": [\"pointwise_decay\"], \"debug\": {\"certificate_c_scale\": 0.5}",
        ),
    );
    let res = run(bin().arg("verify").arg(&cfg));
    assert_eq!(res.status.code(), Some(1));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["records"][0]["status"], "fail");
}

#[test]
fn zero_data_suite_passes_vacuously() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let body = quick_config(&out, "")
        .replace("\"u0\": {\"terms\": [{\"c\": 1.0, \"a\": 1.0}]}", "\"u0\": {\"terms\": []}")
        .replace("\"u1\": {\"terms\": [{\"c\": 1.0, \"a\": 1.0}]}", "\"u1\": {\"terms\": []}");
    let cfg = write_config(dir.path(), "zero.json", &body);
    let res = run(bin().arg("verify").arg(&cfg));
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn compare_massless_emits_paired_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // Velocity-only data over two decades so the growth fit is stable.
    let body = format!(
        r#"{{
            "params": {{"n": 1, "m": 1.0, "beta": 0.1}},
            "u0": {{"terms": []}},
            "u1": {{"terms": [{{"c": 1.0, "a": 1.0}}]}},
            "t_grid": {{"t_min": 100.0, "t_max": 10000.0, "points_per_decade": 8, "samples_per_period": 4}},
            "quadrature": {{"rel_tol": 1e-8, "abs_tol": 1e-12}},
            "outputs": {{"dir": "{}"}}
        }}"#,
        out.display()
    );
    let cfg = write_config(dir.path(), "ml.json", &body);
    let res = run(bin().arg("compare-massless").arg(&cfg));
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    assert!(out.join("norms.csv").exists());
    assert!(out.join("norms_massless.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let names: Vec<&str> = report["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, vec!["massive_rate", "massless_rate"]);

    // Requires a massive base scenario.
    let massless_body = body.replace("\"m\": 1.0", "\"m\": 0.0");
    let cfg = write_config(dir.path(), "ml0.json", &massless_body);
    let res = run(bin().arg("compare-massless").arg(&cfg));
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn probe_appendix_writes_probe_series() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "probe.json", &quick_config(&out, ""));
    let res = run(bin().arg("probe-appendix").arg(&cfg));
    assert_eq!(res.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("probe.csv")).unwrap();
    assert!(csv.starts_with("t,value,error"));
    assert!(csv.lines().count() > 100);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["records"][0]["name"], "appendix_probe");
    assert_eq!(report["records"][0]["status"], "measured");
}

#[test]
fn out_dir_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_out = dir.path().join("from_config");
    let flag_out = dir.path().join("from_flag");
    let cfg = write_config(
        dir.path(),
        "scen.json",
        &quick_config(&cfg_out, ", \"checks\": [\"energy_identity\"]"),
    );
    let res = run(bin().arg("simulate").arg(&cfg).arg("--out-dir").arg(&flag_out));
    assert!(res.status.success());
    assert!(flag_out.join("report.json").exists());
    assert!(!cfg_out.exists());
}

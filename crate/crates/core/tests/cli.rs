use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use algebroid_lab::report::Status;
use algebroid_lab::scenario::ScenarioReport;

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn check(path: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algebroid-lab"))
        .arg("check")
        .arg(path)
        .args(extra)
        .output()
        .expect("binary runs")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn json_reports_are_deterministic() {
    let a = check(&bundled("dual_pair.json"), &["--seed", "0"]);
    let b = check(&bundled("dual_pair.json"), &["--seed", "0"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes_of_bundled_fixtures() {
    for (name, code) in [
        ("dual_pair.json", 0),
        ("nonclosed_gauge.json", 1),
        ("transversality_error.json", 2),
    ] {
        assert_eq!(check(&bundled(name), &[]).status.code(), Some(code), "{name}");
    }
}

#[test]
fn report_round_trips() {
    let out = check(&bundled("nonclosed_gauge.json"), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    let parsed: ScenarioReport = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed.scenario, "nonclosed_gauge");
    assert_eq!(parsed.reports.len(), 3);
    assert_eq!(parsed.reports[1].status, Status::Fail);
    let again = serde_json::to_string_pretty(&parsed).unwrap() + "\n";
    assert_eq!(again, text);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["id", "kind", "status", "residual", "worst_point", "ms"] {
        assert!(value["reports"][0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn empty_check_list_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(&dir, "empty.json", r#"{ "name": "empty", "checks": [] }"#);
    let out = check(&p, &[]);
    assert_eq!(out.status.code(), Some(0));
    let r: ScenarioReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.reports.is_empty());
}

#[test]
fn load_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(check(&missing, &[]).status.code(), Some(2));
    let unresolved = write(
        &dir,
        "unresolved.json",
        r#"{ "name": "u", "checks": [ { "kind": "dirac", "dirac": "nowhere" } ] }"#,
    );
    let out = check(&unresolved, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn text_report_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.txt");
    let out = check(
        &bundled("nonclosed_gauge.json"),
        &["--report", "text", "--out", target.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(target).unwrap();
    assert!(text.starts_with("scenario nonclosed_gauge"));
    assert!(text.contains("fail involutivity"));
}

#[test]
fn command_line_tolerance_overrides_scenario_defaults() {
    // Loose enough that the non-involutive graph (residual 1) passes.
    let out = check(&bundled("nonclosed_gauge.json"), &["--tolerance", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r: ScenarioReport = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r.reports.iter().all(|c| c.tolerance == 2.0));
}

#[test]
fn timings_are_opt_in() {
    let r: ScenarioReport = serde_json::from_slice(&check(&bundled("dual_pair.json"), &[]).stdout).unwrap();
    assert!(r.reports.iter().all(|c| c.ms == 0.0));
    let r: ScenarioReport = serde_json::from_slice(&check(&bundled("dual_pair.json"), &["--timings"]).stdout).unwrap();
    assert!(r.reports.iter().any(|c| c.ms > 0.0));
}

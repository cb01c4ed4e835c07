use std::path::{Path, PathBuf};
use std::process::Command;

use tvspec_cli::{run_scenario, Params, Scenario};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tvspec"))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

#[test]
fn checked_in_scenarios_pass() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let s = Scenario::load(&path).unwrap();
            let r = run_scenario(&s, &Params::default()).unwrap();
            assert!(r.passed, "{}: {:#?}", path.display(), r.sections.iter().filter(|s| !s.passed).collect::<Vec<_>>());
            count += 1;
        }
    }
    assert!(count >= 5);
}

#[test]
fn empty_task_list_gives_a_valid_report() {
    let text = r#"
schema = "tvspec.scenario/1"
name = "nothing"
[space]
family = "coordinate"
class = "all"
[operator]
kind = "identity"
"#;
    let r = run_scenario(&Scenario::parse(text).unwrap(), &Params::default()).unwrap();
    assert!(r.passed && r.sections.is_empty());
    let json: serde_json::Value = serde_json::from_str(&tvspec_cli::emit::to_json(&r)).unwrap();
    assert_eq!(json["schema"], "tvspec.report/1");
}

#[test]
fn run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", scenarios_dir().join("diagonal-half.toml").to_str().unwrap(), "--format", "all", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["report.json", "radius_traces.csv", "neumann_traces.csv", "summary.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(dir.path().join("radius_traces.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("section,kind,n,iterate,lower,upper"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 6);
    // 17 significant digits: one before the point, sixteen after
    let mantissa = row[3].split('e').next().unwrap();
    assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 16);
}

#[test]
fn failed_expectation_sets_exit_status() {
    let out = bin().args(["gallery", "--id", "weighted-shift-rl-zero-rbb-inf", "--depth", "10"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] weighted-shift-rl-zero-rbb-inf"));
    let out = bin().args(["gallery", "--id", "fast-null"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "schema = \"tvspec.scenario/1\"\nname = 3\n").unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let out = bin().args(["gallery", "--id", "no-such-example"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_shows_every_id() {
    let out = bin().arg("list").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    for e in &tvspec_cli::gallery::REGISTRY {
        assert!(text.contains(e.id));
    }
}

#[test]
fn seed_changes_random_examples_only() {
    let a = tvspec_cli::report::run_gallery_ids(&["banach-collapse", "compact-diag-half"], &Params { seed: Some(1), ..Params::default() });
    let b = tvspec_cli::report::run_gallery_ids(&["banach-collapse", "compact-diag-half"], &Params { seed: Some(2), ..Params::default() });
    assert!(a.passed && b.passed);
    assert_ne!(a.sections[0], b.sections[0]);
    assert_eq!(a.sections[1], b.sections[1]);
}

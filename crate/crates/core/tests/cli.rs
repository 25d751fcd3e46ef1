use std::path::Path;
use std::process::{Command, Output};

fn qfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfrac")).args(args).output().expect("qfrac runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn unknown_identity_is_a_configuration_error() {
    let out = tempfile::tempdir().unwrap();
    let o = qfrac(&["run", "--identity", "nosuch", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));
}

#[test]
fn unknown_scenario_is_a_configuration_error() {
    let out = tempfile::tempdir().unwrap();
    let o = qfrac(&["run", "--scenario", "nosuch", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_grid_in_the_ladder_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let o = qfrac(&["run", "--identity", "algebra", "--ladder", "0", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn identity_listing_names_every_registered_identity() {
    let o = qfrac(&["list", "identities"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for id in [
        "algebra",
        "fundamental",
        "prop_3_3_conjugation",
        "prop_3_4_stokes",
        "cor_3_5_cauchy",
        "remark_3_6_caputo_rl",
        "reductions",
    ] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(id)), "{id} missing");
    }
}

#[test]
fn empty_catalog_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = qfrac(&["--scenarios", dir.path().to_str().unwrap(), "list", "scenarios"]);
    assert!(o.status.success());
    assert!(stdout(&o).is_empty());
}

#[test]
fn shipped_catalog_lists_its_scenarios() {
    let o = qfrac(&["list", "scenarios"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for id in ["algebra_triples", "rl_power", "bp_frac_constant", "caputo_smooth"] {
        assert!(text.contains(id), "{id} missing");
    }
}

#[test]
fn conventions_are_listed_as_json() {
    let o = qfrac(&["list", "conventions"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let entries = v.as_array().unwrap();
    assert!(!entries.is_empty());
    for e in entries {
        for key in ["id", "location", "alternative", "implemented"] {
            assert!(e[key].as_str().is_some_and(|s| !s.is_empty()), "{key} missing in {e}");
        }
    }
}

#[test]
fn run_writes_reports_csv_and_summary() {
    let out = tempfile::tempdir().unwrap();
    let o = qfrac(&["run", "--identity", "algebra", "--parallel", "1", "--out", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("PASS"));
    let dir: &Path = out.path();
    let csv = std::fs::read_to_string(dir.join("reports.csv")).unwrap();
    assert!(csv.starts_with("identity_id,scenario_id,grid,residual_abs,residual_rel,order_est,warnings"));
    assert!(csv.contains("algebra,algebra_triples,"));
    assert!(dir.join("summary.txt").is_file());
    let reports: Vec<_> = std::fs::read_dir(dir.join("reports")).unwrap().collect();
    assert!(!reports.is_empty());
}

#[test]
fn failing_tolerance_gives_exit_one() {
    let scenarios = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/stokes_quadratic.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["expect"]["tolerance"] = serde_json::json!(1e-14);
    std::fs::write(scenarios.path().join("tight.json"), v.to_string()).unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = qfrac(&[
        "--scenarios",
        scenarios.path().to_str().unwrap(),
        "run",
        "--ladder",
        "8",
        "--out",
        out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

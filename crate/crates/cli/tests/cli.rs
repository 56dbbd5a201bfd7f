use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use corrclass::io::parse_state;
use corrclass::states::werner;

fn corrclass(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrclass"))
        .args(args)
        .current_dir(dir)
        .env_remove("CORRCLASS_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> Output {
    let out = corrclass(args, dir);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn workdir() -> TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn generated_werner_rereads_exactly() {
    let dir = workdir();
    ok(&["gen", "werner", "0.5", "--out", "w.json"], dir.path());
    let s = parse_state(&std::fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(s.op().matrix(), werner(0.5).unwrap().op().matrix());
}

#[test]
fn generated_cc_depends_only_on_seed() {
    let dir = workdir();
    let a = ok(&["gen", "cc", "--seed", "17", "--dims", "2x3"], dir.path());
    let b = ok(&["gen", "cc", "--dims", "2,3", "--seed", "17"], dir.path());
    let c = ok(&["gen", "cc", "--seed", "18", "--dims", "2x3"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn generated_bell_classifies_with_unit_discord() {
    let dir = workdir();
    ok(&["gen", "bell", "0", "--out", "bell.json"], dir.path());
    let r = json(&ok(&["classify", "bell.json"], dir.path()));
    assert!((r["discord_ba"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!((r["discord_ab"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert_eq!(r["zero_discord"], Value::Bool(false));
}

#[test]
fn cc_decomposition_builds_a_model_tight_on_both_sides() {
    let dir = workdir();
    ok(&["gen", "cc", "--seed", "4", "--dims", "3x2", "--out", "cc.json", "--decomposition-out", "d.json"], dir.path());
    ok(&["lhv", "build", "d.json", "--out", "m.json"], dir.path());
    let audit = json(&ok(&["lhv", "audit", "m.json"], dir.path()));
    assert_eq!(audit["a"]["tight"], Value::Bool(true));
    assert_eq!(audit["b"]["tight"], Value::Bool(true));
    let v = json(&ok(&["lhv", "verify", "m.json", "cc.json", "--samples", "1000"], dir.path()));
    assert_eq!(v["samples"], 1000);
    assert!(v["max_abs_deviation"].as_f64().unwrap() < 1e-10);
}

#[test]
fn asymmetric_model_fails_on_side_a_only() {
    let dir = workdir();
    ok(&["gen", "asym", "--out", "asym.json", "--decomposition-out", "d.json"], dir.path());
    ok(&["lhv", "build", "d.json", "--out", "m.json"], dir.path());
    let audit = json(&ok(&["lhv", "audit", "m.json"], dir.path()));
    assert_eq!(audit["b"]["tight"], Value::Bool(true));
    assert_eq!(audit["a"]["tight"], Value::Bool(false));
    let failing = audit["a"]["failing_subsets"].as_array().unwrap();
    assert!(failing.contains(&serde_json::json!([0])));

    let r = json(&ok(&["classify", "asym.json", "--decomposition", "d.json"], dir.path()));
    assert_eq!(r["lhv"]["built"], Value::Bool(true));
    assert_eq!(r["lhv"]["tight_a"], Value::Bool(false));
    assert_eq!(r["lhv"]["tight_b"], Value::Bool(true));
    assert_eq!(r["zero_discord"], Value::Bool(false));
    assert_eq!(r["classical_b"], Value::Bool(true));
    assert!(r["discord_ba"].as_f64().unwrap() > 0.05);
}

#[test]
fn verify_reports_dimension_mismatch_with_exit_4() {
    let dir = workdir();
    ok(&["gen", "cc", "--dims", "3x2", "--decomposition-out", "d.json", "--out", "cc.json"], dir.path());
    ok(&["gen", "bell", "--out", "bell.json"], dir.path());
    ok(&["lhv", "build", "d.json", "--out", "m.json"], dir.path());
    let out = corrclass(&["lhv", "verify", "m.json", "bell.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(out.stdout.is_empty());
}

#[test]
fn decomposition_of_another_shape_is_exit_4() {
    let dir = workdir();
    ok(&["gen", "cc", "--dims", "3x2", "--decomposition-out", "d.json", "--out", "cc.json"], dir.path());
    ok(&["gen", "werner", "0.1", "--out", "w.json"], dir.path());
    let out = corrclass(&["classify", "w.json", "--decomposition", "d.json"], dir.path());
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn decomposition_of_another_state_is_rejected() {
    let dir = workdir();
    ok(&["gen", "asym", "--out", "asym.json", "--decomposition-out", "d.json"], dir.path());
    ok(&["gen", "werner", "0.1", "--out", "w.json"], dir.path());
    let out = corrclass(&["classify", "w.json", "--decomposition", "d.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not describe"));
}

#[test]
fn non_states_exit_with_3() {
    let dir = workdir();
    let not_psd = r#"{"dims": [1, 2], "matrix": [[[1.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]]}"#;
    let not_hermitian = r#"{"dims": [1, 2], "matrix": [[[0.5, 0], [0.2, 0]], [[0, 0], [0.5, 0]]]}"#;
    let bad_trace = r#"{"dims": [1, 2], "matrix": [[[0.5, 0], [0, 0]], [[0, 0], [0.6, 0]]]}"#;
    for (name, text) in [("psd.json", not_psd), ("herm.json", not_hermitian), ("trace.json", bad_trace)] {
        std::fs::write(dir.path().join(name), text).unwrap();
        let out = corrclass(&["classify", name], dir.path());
        assert_eq!(out.status.code(), Some(3), "{name}");
    }
}

#[test]
fn bad_parameters_exit_with_2() {
    let dir = workdir();
    ok(&["gen", "bell", "--out", "bell.json"], dir.path());
    for args in [
        vec!["gen", "werner", "1.5"],
        vec!["gen", "bell", "4"],
        vec!["gen", "bell", "--decomposition-out", "d.json"],
        vec!["gen", "cc", "--dims", "2by2"],
        vec!["classify", "bell.json", "--samples", "0"],
        vec!["classify", "bell.json", "--grid", "4"],
        vec!["classify", "bell.json", "--tol=-1"],
        vec!["classify", "missing.json"],
        vec!["frobnicate"],
    ] {
        let out = corrclass(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn failed_runs_leave_no_output_file() {
    let dir = workdir();
    std::fs::write(dir.path().join("broken.json"), r#"{"dims": [2, 2], "matrix": [[[1, 0]"#).unwrap();
    let out = corrclass(&["classify", "broken.json", "--out", "report.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(leftovers, vec!["broken.json".to_string()]);
}

#[test]
fn batch_with_one_bad_file_writes_nothing() {
    let dir = workdir();
    ok(&["gen", "bell", "--out", "bell.json"], dir.path());
    std::fs::write(dir.path().join("bad.json"), "{").unwrap();
    let out = corrclass(&["classify", "bell.json", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn batch_reports_follow_argument_order() {
    let dir = workdir();
    ok(&["gen", "bell", "--out", "bell.json"], dir.path());
    ok(&["gen", "werner", "0.3", "--out", "w.json"], dir.path());
    let r = json(&ok(&["classify", "w.json", "bell.json"], dir.path()));
    let inputs: Vec<&str> = r.as_array().unwrap().iter().map(|x| x["input"].as_str().unwrap()).collect();
    assert_eq!(inputs, ["w.json", "bell.json"]);
}

#[test]
fn output_directory_from_environment() {
    let dir = workdir();
    let outdir = dir.path().join("reports");
    std::fs::create_dir(&outdir).unwrap();
    ok(&["gen", "bell", "--out", "bell.json"], dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_corrclass"))
        .args(["classify", "bell.json"])
        .current_dir(dir.path())
        .env("CORRCLASS_OUT_DIR", &outdir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r = read_json(&outdir.join("bell.report.json"));
    assert_eq!(r["entangled"], Value::Bool(true));
}

#[test]
fn report_invariants_hold_across_families() {
    let dir = workdir();
    let mut files = Vec::new();
    for (k, args) in [
        vec!["gen", "bell", "2"],
        vec!["gen", "werner", "0.2"],
        vec!["gen", "werner", "0.9"],
        vec!["gen", "asym"],
        vec!["gen", "cc", "--seed", "1"],
        vec!["gen", "cc", "--seed", "2", "--dims", "2x3"],
        vec!["gen", "cc", "--seed", "3", "--dims", "3x3"],
    ]
    .into_iter()
    .enumerate()
    {
        let name = format!("s{k}.json");
        let mut args = args.clone();
        args.extend(["--out", &name]);
        ok(&args, dir.path());
        files.push(name);
    }
    let mut args = vec!["classify"];
    args.extend(files.iter().map(String::as_str));
    let reports = json(&ok(&args, dir.path()));
    for r in reports.as_array().unwrap() {
        if r["zero_discord"] == Value::Bool(true) {
            assert_eq!(r["lhv"]["built"], Value::Bool(true), "{}", r["input"]);
            assert_eq!(r["lhv"]["tight_a"], Value::Bool(true), "{}", r["input"]);
            assert_eq!(r["lhv"]["tight_b"], Value::Bool(true), "{}", r["input"]);
        }
        if r["entangled"] == Value::Bool(true) {
            assert_eq!(r["lhv"]["built"], Value::Bool(false), "{}", r["input"]);
        }
    }
    let last = &reports[6];
    assert_eq!(last["entangled"], Value::String("inconclusive".into()));
    assert_eq!(last["discord_ba"], Value::Null);
}

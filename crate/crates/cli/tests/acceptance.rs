//! Acceptance check for the command-line contract (criterion 9). Prints one
//! PASS/FAIL line; exits nonzero on failure.
//!
//! The Bell and CC input files are written out by hand here rather than by
//! `corrclass gen`, so the check does not depend on the generator.

use std::path::Path;
use std::process::{Command, ExitCode, Output};

use serde_json::Value;

fn corrclass(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrclass"))
        .args(args)
        .current_dir(dir)
        .env_remove("CORRCLASS_OUT_DIR")
        .output()
        .expect("binary runs")
}

/// Real 4×4 density matrix as a state file.
fn state_file(rho: [[f64; 4]; 4]) -> String {
    let rows: Vec<Vec<[f64; 2]>> = rho.iter().map(|r| r.iter().map(|&x| [x, 0.0]).collect()).collect();
    serde_json::to_string_pretty(&serde_json::json!({ "dims": [2, 2], "matrix": rows })).unwrap()
}

fn outer(v: [f64; 4], w: f64) -> [[f64; 4]; 4] {
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = w * v[i] * v[j];
        }
    }
    m
}

fn add(a: [[f64; 4]; 4], b: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut m = a;
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] += b[i][j];
        }
    }
    m
}

fn check(cond: bool, what: &str, failures: &mut Vec<String>) {
    if !cond {
        failures.push(what.to_string());
    }
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();

    // Φ+ = (|00⟩ + |11⟩)/√2
    let h = std::f64::consts::FRAC_1_SQRT_2;
    std::fs::write(dir.path().join("bell.json"), state_file(outer([h, 0.0, 0.0, h], 1.0))).unwrap();
    // 0.3|0+⟩⟨0+| + 0.2|0−⟩⟨0−| + 0.5|1+⟩⟨1+|, classical in {|0⟩,|1⟩} ⊗ {|+⟩,|−⟩}
    let cc = add(
        add(outer([h, h, 0.0, 0.0], 0.3), outer([h, -h, 0.0, 0.0], 0.2)),
        outer([0.0, 0.0, h, h], 0.5),
    );
    std::fs::write(dir.path().join("cc.json"), state_file(cc)).unwrap();
    let bell_text = std::fs::read_to_string(dir.path().join("bell.json")).unwrap();
    std::fs::write(dir.path().join("truncated.json"), &bell_text[..bell_text.len() * 2 / 3]).unwrap();

    let bell = corrclass(&["classify", "bell.json"], dir.path());
    check(bell.status.code() == Some(0), "bell: exit 0", &mut failures);
    match serde_json::from_slice::<Value>(&bell.stdout) {
        Ok(r) => {
            check(r["entangled"] == Value::Bool(true), "bell: entangled true", &mut failures);
            let d = r["discord_ba"].as_f64().unwrap_or(f64::NAN);
            check((d - 1.0).abs() < 1e-3, "bell: discord_ba ≈ 1", &mut failures);
            check(r["lhv"]["built"] == Value::Bool(false), "bell: lhv.built false", &mut failures);
            let n = r["quasi"]["negativity_sic"].as_f64().unwrap_or(f64::NAN);
            check(n > 0.0, "bell: negativity_sic > 0", &mut failures);
            let c = r["chsh_max"].as_f64().unwrap_or(f64::NAN);
            check((c - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-3, "bell: chsh_max ≈ 2.828", &mut failures);
        }
        Err(e) => failures.push(format!("bell: report is not JSON ({e})")),
    }

    let cc = corrclass(&["classify", "cc.json"], dir.path());
    check(cc.status.code() == Some(0), "cc: exit 0", &mut failures);
    match serde_json::from_slice::<Value>(&cc.stdout) {
        Ok(r) => {
            check(r["zero_discord"] == Value::Bool(true), "cc: zero_discord true", &mut failures);
            check(r["lhv"]["tight_a"] == Value::Bool(true), "cc: tight_a", &mut failures);
            check(r["lhv"]["tight_b"] == Value::Bool(true), "cc: tight_b", &mut failures);
            let dev = r["lhv"]["max_deviation"].as_f64().unwrap_or(f64::NAN);
            check(dev < 1e-10, "cc: max_deviation < 1e-10", &mut failures);
        }
        Err(e) => failures.push(format!("cc: report is not JSON ({e})")),
    }

    let bad = corrclass(&["classify", "truncated.json", "--out", "bad.report.json"], dir.path());
    check(bad.status.code() == Some(2), "truncated: exit 2", &mut failures);
    let stderr = String::from_utf8_lossy(&bad.stderr);
    check(stderr.contains("`matrix`"), "truncated: diagnostic names `matrix`", &mut failures);
    check(bad.stdout.is_empty(), "truncated: nothing on stdout", &mut failures);
    check(!dir.path().join("bad.report.json").exists(), "truncated: no output file", &mut failures);

    for (name, first) in [("bell.json", &bell), ("cc.json", &cc)] {
        for _ in 0..2 {
            let again = corrclass(&["classify", name], dir.path());
            check(again.stdout == first.stdout, &format!("{name}: byte-identical rerun"), &mut failures);
        }
    }

    if failures.is_empty() {
        println!(
            "PASS criterion 9: CLI contract -- Bell/CC flags, truncated file exit 2 naming `matrix`, reruns byte-identical"
        );
        ExitCode::SUCCESS
    } else {
        println!("FAIL criterion 9: CLI contract -- {}", failures.join("; "));
        ExitCode::FAILURE
    }
}

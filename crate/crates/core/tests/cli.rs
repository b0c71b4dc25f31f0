use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke-signs"))
        .args(args)
        .env_remove("HECKE_SIGNS_MAX_LIMIT")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn tau_to_file_with_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tau.csv");
    let out = run(&["tau", "--limit", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,C\n1,1\n2,-24\n"));
    assert!(text.ends_with("10,-115920\n"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("sha256 "));
    assert_eq!(stdout.split_whitespace().nth(1).unwrap().len(), 64);
}

#[test]
fn tau_single_row_to_stdout() {
    let out = run(&["tau", "--limit", "1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,C\n1,1\n");
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("sha256 "));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["tau", "--limit", "0"][..],
        &["density", "--m", "0", "--x", "100", "--form", "delta"],
        &["simulate", "--m", "2", "--samples", "0"],
        &["oscillate", "--limit", "0"],
        &["zeros", "--ap", "1", "--norm", "2", "--weight", "3"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&run(args)), 2, "{args:?}");
    }
}

#[test]
fn ceiling_is_enforced_and_overridable() {
    assert_eq!(code(&run(&["tau", "--limit", "1000001"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_hecke-signs"))
        .args(["tau", "--limit", "20"])
        .env("HECKE_SIGNS_MAX_LIMIT", "10")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn zeros_examples() {
    let cases = [
        ("0", "2", "12", r#"{"kind":"progression","modulus":2}"#),
        ("-24", "2", "12", r#"{"kind":"empty"}"#),
        ("8", "4", "4", r#"{"kind":"progression","modulus":3}"#),
    ];
    for (ap, norm, weight, expected) in cases {
        let out = run(&["zeros", "--ap", ap, "--norm", norm, "--weight", weight]);
        assert_eq!(code(&out), 0);
        assert_eq!(json(&out), serde_json::from_str::<Value>(expected).unwrap());
    }
    // Past the Deligne bound the roots are real and distinct, so nothing vanishes.
    let out = run(&["zeros", "--ap", "100", "--norm", "2", "--weight", "12"]);
    assert_eq!(json(&out), serde_json::from_str::<Value>(r#"{"kind":"empty"}"#).unwrap());
}

#[test]
fn density_reports() {
    let out = run(&["density", "--m", "3", "--x", "20000", "--form", "delta"]);
    let report = json(&out);
    assert_eq!(report["predicted"], 0.5);
    assert_eq!(report["denominator"], 2262);
    assert_eq!(code(&out), if report["pass"] == true { 0 } else { 1 });

    let out = run(&["density", "--m", "2", "--x", "20000", "--form", "weight16", "--sign", "-"]);
    let predicted = json(&out)["predicted"].as_f64().unwrap();
    assert!((predicted - (1.0 / 3.0 + 3f64.sqrt() / (2.0 * std::f64::consts::PI))).abs() < 1e-15);

    // A zero tolerance cannot be met by a finite sample.
    let out = run(&["density", "--m", "2", "--x", "1000", "--form", "delta", "--tolerance", "0"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn density_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("delta.csv");
    std::fs::write(
        &path,
        "# weight=12\np,inertia_degree,ap\n2,1,-24\n3,1,252\n5,1,4830\n7,1,-16744\n",
    )
    .unwrap();
    let out = run(&["density", "--m", "1", "--x", "7", "--form", path.to_str().unwrap()]);
    let report = json(&out);
    assert_eq!(report["numerator"], 2);
    assert_eq!(report["denominator"], 4);

    // Not enough primes in the file.
    let out = run(&["density", "--m", "1", "--x", "11", "--form", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    // Missing file.
    let missing = dir.path().join("absent.csv");
    assert_eq!(code(&run(&["density", "--m", "1", "--x", "7", "--form", missing.to_str().unwrap()])), 3);
}

#[test]
fn oscillate_finds_both_signs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out = run(&["oscillate", "--limit", "100", "--bm-out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["first_positive"], 1);
    assert_eq!(report["first_negative"], 2);
    assert!(report["rankin"]["positive"].as_u64().unwrap() > 0);
    assert!(report["rankin"]["negative"].as_u64().unwrap() > 0);
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("m,b\n1,1\n2,-5184\n"));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn simulate_matches_closed_form() {
    let out = run(&["simulate", "--m", "3", "--samples", "100000"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!(report["seed"], 1729);
    assert_eq!(report["positive"]["predicted"], 0.5);
    assert_eq!(report["tolerance"], 4.0 / 100000f64.sqrt());
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["simulate", "--m", "4", "--samples", "20000", "--seed", "7"][..],
        &["oscillate", "--limit", "60"],
        &["density", "--m", "2", "--x", "5000", "--form", "delta"],
        &["tau", "--limit", "200"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stderr, b.stderr, "{args:?}");
    }
    let a = run(&["simulate", "--m", "4", "--samples", "20000", "--seed", "7"]);
    let b = run(&["simulate", "--m", "4", "--samples", "20000", "--seed", "8"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn json_keys_are_sorted() {
    let out = run(&["simulate", "--m", "2", "--samples", "1000"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let top: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("  \""))
        .map(|l| l.trim().split('"').nth(1).unwrap())
        .collect();
    let mut sorted = top.clone();
    sorted.sort();
    assert_eq!(top, sorted);
}

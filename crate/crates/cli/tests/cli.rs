use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goppa-orbits"))
        .args(args)
        .env_remove("GOPPA_ORBITS_CACHE")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--format", "json", "--no-timing"]);
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

#[test]
fn bound_examples() {
    for (q, n, r, expected) in [("2", "5", "5", 41u64), ("2", "11", "5", 76261), ("2", "3", "7", 201)] {
        let (code, v) = json(&["bound", "--q", q, "--n", n, "--r", r]);
        assert_eq!(code, 0);
        assert_eq!(v["report"]["extended_bound"], expected);
    }
    let (_, v) = json(&["bound", "--q", "2", "--n", "3", "--r", "7"]);
    assert_eq!(v["report"]["case"]["branch"], "table_derived");
    let (_, v) = json(&["bound", "--p", "2", "--t", "1", "--n", "2", "--r", "3"]);
    assert_eq!(v["report"]["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn bound_output_is_exact_for_huge_values() {
    let out = run(&["bound", "--q", "9", "--n", "13", "--r", "13", "--format", "json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    // 9^169 has 162 digits; it must appear as a bare integer
    let line = text.lines().find(|l| l.contains("\"s_size\"")).unwrap();
    let digits = line.trim().trim_start_matches("\"s_size\": ").trim_end_matches(',');
    assert!(digits.len() > 150 && digits.bytes().all(|b| b.is_ascii_digit()), "{line}");
}

#[test]
fn invalid_parameters_exit_2() {
    for args in [
        vec!["bound", "--q", "6", "--n", "3", "--r", "3"],
        vec!["bound", "--q", "2", "--n", "4", "--r", "3"],
        vec!["bound", "--q", "2", "--n", "3", "--r", "2"],
        vec!["code", "--q", "2", "--n", "3", "--r", "3", "--alpha", "1"],
        vec!["bound", "--n", "3", "--r", "3"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_passes_and_reports_capacity() {
    let (code, v) = json(&["verify", "--q", "2", "--n", "3", "--r", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["report"]["pass"], true);
    assert_eq!(v["report"]["extended_orbits"], 5);
    assert!(v["report"].get("stats").is_none());

    let out = run(&["verify", "--q", "2", "--n", "11", "--r", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("requires 2^55 elements"), "{err}");

    let out = run(&["verify", "--q", "2", "--n", "3", "--r", "5", "--budget", "14"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn structured_reports_are_byte_identical() {
    let args = ["verify", "--q", "3", "--n", "2", "--r", "3", "--format", "json", "--no-timing"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["bound", "--q", "4", "--n", "3", "--r", "5", "--format", "json"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn matrices_examples() {
    let (code, v) = json(&["matrices", "--q", "3", "--n", "3", "--k", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["closed_form"]["total"], 2106);
    assert_eq!(v["brute_force"], 2106);
    assert_eq!(v["confirmed"], true);

    let (_, v) = json(&["matrices", "--q", "2", "--n", "3", "--k", "3"]);
    assert_eq!(v["closed_form"]["total"], 56);
    assert_eq!(v["confirmed"], true);

    let (code, v) = json(&["matrices", "--q", "2", "--n", "3", "--k", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["closed_form"]["outcome"], "hypotheses_not_met");
}

#[test]
fn code_writes_matrix_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.txt");
    let alpha = "9";
    let (code, v) = json(&[
        "code", "--q", "2", "--n", "5", "--r", "3", "--alpha", alpha, "--extend", "--witness",
        "frobenius", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["length"], 32);
    assert_eq!(v["extended"]["length"], 33);
    assert_eq!(v["extended"]["zero_sum"], true);
    assert!(v["certificate"]["permutation"].is_array());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "p=2 t=1 n=5 r=3 alpha=9");
    assert_eq!(text.lines().count(), 1 + 15);

    let (code, v) = json(&[
        "code", "--q", "2", "--n", "5", "--r", "3", "--alpha", alpha, "--witness", "affine",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["certificate"]["map"]["kind"], "affine");

    // 2 = x is not in F_32 inside F_{2^15}
    let (code, _) = json(&[
        "code", "--q", "2", "--n", "5", "--r", "3", "--alpha", alpha, "--witness", "affine",
        "--a", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 2);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_goppa-orbits"))
        .args(["verify", "--q", "2", "--n", "3", "--r", "3"])
        .env("GOPPA_ORBITS_CACHE", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(Path::new(&dir.path().join("tower_p2_t1_n3_r3.gpcx")).exists());
}

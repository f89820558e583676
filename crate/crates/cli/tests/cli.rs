use std::process::Command;

use serde_json::Value;
use ucx_cli::{run, EXIT_FAIL, EXIT_OK, EXIT_USAGE};

fn ucx(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ucx").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn table_endpoints() {
    let (code, out, _) = ucx(&["table", "--p", "2", "--eps", "0:2:5"]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["p", "eps", "delta", "route", "cross_check_residual"]);
    assert_eq!(rows.len(), 5);
    assert_eq!(num(&rows[0][2]), 0.0);
    assert_eq!(num(&rows[4][2]), 1.0);
    assert!(rows.iter().all(|r| r[3] == "closed_form"));
}

#[test]
fn table_routes() {
    let (_, out, _) = ucx(&["table", "--p", "1.5", "--eps", "1:1:1"]);
    let (_, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0][2]) - 0.067_122_610_329_016_17).abs() < 1e-10);
    assert_eq!(rows[0][3], "s_star");
    assert!(num(&rows[0][4]) < 1e-8);

    let (_, out, _) = ucx(&["table", "--p", "4", "--eps", "1:1:1"]);
    let (_, rows) = csv_rows(&out);
    assert!((num(&rows[0][2]) - 0.016_005_164_367_284_83).abs() < 1e-12);
    assert_eq!(num(&rows[0][4]), 0.0);
}

#[test]
fn table_usage_errors() {
    for args in [
        &["table", "--p", "0.5"][..],
        &["table", "--p", "2", "--eps", "0:3:4"],
        &["table", "--p", "2", "--eps", "a:b"],
        &["table"],
        &["nonsense", "--p", "2"],
    ] {
        let (code, _, err) = ucx(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty());
    }
}

#[test]
fn json_matches_csv() {
    let (_, csv, _) = ucx(&["table", "--p", "1.7", "--eps", "0.2:1.8:7"]);
    let (_, json, _) = ucx(&["table", "--p", "1.7", "--eps", "0.2:1.8:7", "--format", "json"]);
    let (header, rows) = csv_rows(&csv);
    let parsed: Value = serde_json::from_str(&json).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    for (obj, row) in arr.iter().zip(&rows) {
        let obj = obj.as_object().unwrap();
        assert_eq!(obj.keys().collect::<Vec<_>>(), header.iter().collect::<Vec<_>>());
        for (key, cell) in header.iter().zip(row) {
            match &obj[key] {
                Value::String(s) => assert_eq!(s, cell),
                v => assert_eq!(v.as_f64().unwrap(), num(cell), "{key}"),
            }
        }
    }
}

#[test]
fn verify_passes() {
    let (code, out, _) = ucx(&["verify", "--p", "3", "--grid-n", "10001"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.lines().all(|l| l.contains("pass=true")));
    assert!(out.contains("claim=sharpness_gap_shrinks"));

    let (code, out, _) = ucx(&["verify", "--p", "1.5", "--eps", "1"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("claim=uprime_sign_pattern pass=true"));
}

#[test]
fn verify_requires_epsilon_below_two() {
    let (code, out, err) = ucx(&["verify", "--p", "1.5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("epsilon required for p<2"));
}

#[test]
fn verify_reports_failure_with_exit_one() {
    // the plane at ε = 2 is not a majorant
    let (code, out, _) = ucx(&["verify", "--p", "1.5", "--eps", "2", "--grid-n", "501", "--trials", "100"]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.contains("pass=false"));
}

#[test]
fn verify_table_formats() {
    let (code, out, _) = ucx(&["verify", "--p", "2.5", "--grid-n", "201", "--trials", "200", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["claim", "pass", "worst_value", "worst_arg", "grid"]);
    assert!(rows.iter().all(|r| r[1] == "true"));
}

#[test]
fn envelope_p2_is_exact() {
    let (code, out, _) = ucx(&["envelope", "--p", "2", "--grid-n", "50", "--restarts", "2", "--local-steps", "200"]);
    assert_eq!(code, EXIT_OK);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header.join(","), "x3,envelope,certificate,brute_force");
    assert_eq!(rows.len(), 50);
    for r in rows {
        assert!((num(&r[1]) - (1.0 - num(&r[0]) / 4.0)).abs() < 1e-9);
    }
}

#[test]
fn envelope_p4_is_monotone() {
    let (code, out, _) = ucx(&["envelope", "--p", "4", "--grid-n", "50", "--restarts", "2", "--local-steps", "200"]);
    assert_eq!(code, EXIT_OK);
    let (_, rows) = csv_rows(&out);
    let env: Vec<f64> = rows.iter().map(|r| num(&r[1])).collect();
    assert!(env.windows(2).all(|w| w[1] <= w[0] + 1e-9));
}

#[test]
fn envelope_p_three_halves() {
    let (code, out, _) = ucx(&["envelope", "--p", "1.5", "--eps", "1", "--grid-n", "50", "--restarts", "4"]);
    assert_eq!(code, EXIT_OK);
    let (_, rows) = csv_rows(&out);
    let (_, near_one) = rows
        .iter()
        .map(|r| (num(&r[0]), num(&r[1])))
        .min_by(|a, b| (a.0 - 1.0).abs().total_cmp(&(b.0 - 1.0).abs()))
        .unwrap();
    assert!((near_one - 0.90103).abs() < 5e-3, "{near_one}");
    let (code, _, err) = ucx(&["envelope", "--p", "1.5", "--grid-n", "5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("epsilon required"));
}

#[test]
fn bruteforce_examples() {
    let (code, out, _) = ucx(&["bruteforce", "--p", "4", "--x", "1,1,1", "--seed", "7"]);
    assert_eq!(code, EXIT_OK);
    let witness: ucx_core::bellman::BruteForceResult = out.parse().unwrap();
    assert!((0.93..=0.9375).contains(&witness.value), "{}", witness.value);

    let (code, out, _) = ucx(&["bruteforce", "--p", "3", "--x", "1,1,8"]);
    assert_eq!(code, EXIT_OK);
    let witness: ucx_core::bellman::BruteForceResult = out.parse().unwrap();
    assert!(witness.value <= 1e-6);

    assert_eq!(ucx(&["bruteforce", "--p", "2", "--x", "-1,1,1"]).0, EXIT_USAGE);
    assert_eq!(ucx(&["bruteforce", "--p", "2", "--x", "1,1"]).0, EXIT_USAGE);
    assert_eq!(ucx(&["bruteforce", "--p", "2", "--x", "1,1,9", "--restarts", "2"]).0, EXIT_FAIL);
}

#[test]
fn bruteforce_json() {
    let args = ["bruteforce", "--p", "2.5", "--x", "1,0.5,1", "--restarts", "4", "--local-steps", "300"];
    let (_, text, _) = ucx(&args);
    let (code, json, _) = ucx(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(code, EXIT_OK);
    let witness: ucx_core::bellman::BruteForceResult = text.parse().unwrap();
    let rows: Value = serde_json::from_str(&json).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), witness.witness.atoms().len());
    assert_eq!(rows[0]["value"].as_f64().unwrap(), witness.value);
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("ucx-table-{}.csv", std::process::id()));
    let (code, out, _) = ucx(&["table", "--p", "3", "--eps", "0:2:3", "--output", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, ucx(&["table", "--p", "3", "--eps", "0:2:3"]).1);
}

#[test]
fn binary_thread_cap() {
    let bin = env!("CARGO_BIN_EXE_ucx");
    let args = ["bruteforce", "--p", "1.5", "--x", "1,1,1", "--restarts", "6", "--local-steps", "400", "--seed", "4"];
    let capped = Command::new(bin).args(args).env("UCX_THREADS", "1").output().unwrap();
    let free = Command::new(bin).args(args).env_remove("UCX_THREADS").output().unwrap();
    assert!(capped.status.success());
    assert_eq!(capped.stdout, free.stdout);
    let bad = Command::new(bin).args(args).env("UCX_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
}

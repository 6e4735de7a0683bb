use std::process::Command;

use genshift_cli::{run, EXIT_DECIDED, EXIT_INPUT, EXIT_UNKNOWN};
use serde_json::Value;

fn genshift(args: &[&str]) -> genshift_cli::Outcome {
    run(std::iter::once("genshift").chain(args.iter().copied()))
}

#[test]
fn analyze_every_builtin() {
    for name in ["C1", "C2", "C3", "D1", "D2", "D3"] {
        let out = genshift(&["analyze", &format!("builtin:{name}")]);
        assert_eq!(out.code, EXIT_DECIDED, "{name}: {}", out.stderr);
        assert_eq!(out.stdout.contains("DISCREPANCY"), name == "D1", "{name}:\n{}", out.stdout);
    }
}

#[test]
fn analyze_json_shape() {
    let out = genshift(&["analyze", "builtin:D3", "--json"]);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["properties"]["stroboscopical"]["decision"], "Yes");
    assert_eq!(v["properties"]["weak specification"]["decision"], "No");
    assert_eq!(v["continuity"]["decision"], "Yes");
    assert_eq!(v["eventual_image"], "F");
    assert!(v["discrepancy"].is_null());
}

#[test]
fn exhausted_budget_is_unknown() {
    let out = genshift(&["--budget", "1", "analyze", "builtin:C1"]);
    assert_eq!(out.code, EXIT_UNKNOWN);
    assert!(out.stdout.contains("Unknown"));
    assert!(!out.stdout.contains("DISCREPANCY"));
}

#[test]
fn config_errors_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "kind = \"fort\"\nbase = 0\n[index_set]\nkind = \"reals\"\n").unwrap();
    let out = genshift(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("line 4"), "{}", out.stderr);

    let out = genshift(&["analyze", "builtin:C9"]);
    assert_eq!(out.code, EXIT_INPUT);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cycle.toml");
    std::fs::write(
        &path,
        "kind = \"generalized_shift\"\n[index_set]\nkind = \"atoms\"\ncount = 3\n[map]\nrule = \"table\"\nimages = [1, 2, 0]\n",
    )
    .unwrap();
    let out = genshift(&["analyze", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.code, EXIT_DECIDED, "{}", out.stderr);
    let v: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["properties"]["stroboscopical"]["decision"], "Yes");
    assert_eq!(v["properties"]["weak specification"]["decision"], "No");
}

#[test]
fn trace_witness_written_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.json");
    let out = genshift(&["witness", "builtin:C3", "--kind", "trace", "--out", path.to_str().unwrap()]);
    assert_eq!(out.code, EXIT_DECIDED, "{}", out.stderr);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v.is_object());
}

#[test]
fn rho_witnesses() {
    let out = genshift(&["witness", "builtin:C2", "--kind", "rho"]);
    assert_eq!(out.code, EXIT_DECIDED, "{}", out.stderr);
    let out = genshift(&["witness", "builtin:D3", "--kind", "rho", "--prefix", "300"]);
    assert_eq!(out.code, EXIT_DECIDED, "{}", out.stderr);
    // refusals carry the obstruction
    let out = genshift(&["witness", "builtin:C1", "--kind", "rho"]);
    assert_eq!(out.code, EXIT_INPUT);
    assert!(out.stderr.contains("collision"), "{}", out.stderr);
    let out = genshift(&["witness", "builtin:C2", "--kind", "trace"]);
    assert_eq!(out.code, EXIT_INPUT);
}

#[test]
fn table_a() {
    let out = genshift(&["table-a", "--no-builtins"]);
    assert_eq!(out.code, EXIT_DECIDED);
    assert!(!out.stdout.contains("DISCREPANCY"));
    let out = genshift(&["table-a", "--json"]);
    assert_eq!(out.code, EXIT_DECIDED);
    assert!(serde_json::from_str::<Value>(&out.stdout).is_ok());
}

#[test]
fn crosscheck_small() {
    let out = genshift(&["crosscheck", "--atoms", "3"]);
    assert_eq!(out.code, EXIT_DECIDED, "{}", out.stdout);
    assert!(out.stdout.contains("0 disagreements"), "{}", out.stdout);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_genshift");
    let ok = Command::new(bin).args(["analyze", "builtin:C3"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_DECIDED));
    let bad = Command::new(bin).args(["analyze", "/nonexistent.toml"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INPUT));
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_INPUT));
}

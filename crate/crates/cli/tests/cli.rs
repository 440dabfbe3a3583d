use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const Q4: &str = "((a,b),(c,d));\n((a,c),(b,d));\n";

fn parsikern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parsikern")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn score_on_q4() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let chars = file(&dir, "c.tsv", "a\t0\nb\t1\nc\t0\nd\t1\n");
    let out = parsikern(&["score", "-i", s(&pair), "-c", s(&chars)]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "l(T1)=2 l(T2)=1\n");
}

#[test]
fn score_rejects_table_over_declared_states() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let chars = file(&dir, "c.tsv", "a\t0\nb\t1\nc\t2\nd\t1\n");
    let out = parsikern(&["score", "-i", s(&pair), "-c", s(&chars), "--t", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn dmp_on_q4() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let out = parsikern(&["dmp", "-i", s(&pair), "--t", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1\n");
    let json = parsikern(&["--json", "dmp", "-i", s(&pair), "--t", "inf"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["dmp"], 1);
}

#[test]
fn dmp_cap_is_an_error() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let out = parsikern(&["dmp", "-i", s(&pair), "--cap", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn dtbr_methods_agree() {
    let dir = TempDir::new().unwrap();
    let gen = dir.path().join("pair.nwk");
    assert!(parsikern(&["gen", "--n", "8", "--moves", "2", "--seed", "5", "-o", s(&gen)]).status.success());
    let a = parsikern(&["dtbr", "-i", s(&gen), "--method", "hitting"]);
    let b = parsikern(&["dtbr", "-i", s(&gen), "--method", "partition"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn gen_is_deterministic() {
    let a = parsikern(&["gen", "--n", "12", "--moves", "3", "--seed", "9"]);
    let b = parsikern(&["gen", "--n", "12", "--moves", "3", "--seed", "9"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 2);
}

#[test]
fn gen_rejects_tiny_n() {
    assert_eq!(parsikern(&["gen", "--n", "3"]).status.code(), Some(1));
}

#[test]
fn usage_error_exits_two() {
    assert_eq!(parsikern(&["dmp"]).status.code(), Some(2));
    assert_eq!(parsikern(&["dmp", "-i", "x.nwk", "--t", "1"]).status.code(), Some(2));
    assert_eq!(parsikern(&["dmp", "-i", "x.nwk", "--t", "65"]).status.code(), Some(2));
    assert_eq!(parsikern(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn reduce_writes_kernel_and_trace() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "same.nwk", "((a,b),(c,(d,e)));\n((a,b),(c,(d,e)));\n");
    let kernel = dir.path().join("kernel.nwk");
    let trace = dir.path().join("trace.json");
    let out = parsikern(&["reduce", "-i", s(&pair), "-o", s(&kernel), "--trace", s(&trace)]);
    assert!(out.status.success());
    let k = fs::read_to_string(&kernel).unwrap();
    assert_eq!(k.lines().count(), 2);
    let t: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["initial_leaves"], 5);
    assert!(t["final_leaves"].as_u64().unwrap() <= 4);
}

#[test]
fn quartets_lists_q4() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let out = parsikern(&["quartets", "-i", s(&pair)]);
    assert_eq!(stdout(&out), "a,b|c,d\ta,c|b,d\n");
    let greedy = parsikern(&["quartets", "-i", s(&pair), "--leg-disjoint"]);
    assert!(stdout(&greedy).contains("|Q|=1 |Q'|=1 |E'|=4"));
}

#[test]
fn certify_then_verify() {
    let dir = TempDir::new().unwrap();
    let pair = dir.path().join("pair.nwk");
    assert!(parsikern(&["gen", "--n", "14", "--moves", "3", "--seed", "21", "-o", s(&pair)]).status.success());
    let cert = dir.path().join("cert.json");
    assert!(parsikern(&["certify", "-i", s(&pair), "-o", s(&cert), "--seed", "21"]).status.success());
    let out = parsikern(&["verify", "-i", s(&pair), "--cert", s(&cert)]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).ends_with("accepted\n"));
}

#[test]
fn verify_rejects_inflated_bound() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let cert = dir.path().join("cert.json");
    assert!(parsikern(&["certify", "-i", s(&pair), "-o", s(&cert)]).status.success());
    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&cert).unwrap()).unwrap();
    doc["claimed_bound"] = serde_json::json!(2);
    fs::write(&cert, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = parsikern(&["verify", "-i", s(&pair), "--cert", s(&cert)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL\t(iv) parsimony gap"));
}

#[test]
fn verify_rejects_certificate_for_other_trees() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let other = file(&dir, "other.nwk", "((a,b),(c,d));\n((a,d),(b,c));\n");
    let cert = dir.path().join("cert.json");
    assert!(parsikern(&["certify", "-i", s(&pair), "-o", s(&cert)]).status.success());
    assert_eq!(parsikern(&["verify", "-i", s(&other), "--cert", s(&cert)]).status.code(), Some(1));
}

#[test]
fn certify_is_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let pair = dir.path().join("pair.nwk");
    assert!(parsikern(&["gen", "--n", "16", "--moves", "4", "--seed", "3", "-o", s(&pair)]).status.success());
    let a = parsikern(&["--threads", "1", "certify", "-i", s(&pair), "--seed", "3"]);
    let b = parsikern(&["--threads", "4", "certify", "-i", s(&pair), "--seed", "3"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_af_exit_codes() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "q4.nwk", Q4);
    let good = file(&dir, "good.txt", "a,b,c\nd\n");
    let bad = file(&dir, "bad.txt", "a,b,c,d\n");
    let partial = file(&dir, "partial.txt", "a,b\n");
    assert_eq!(parsikern(&["check-af", "-i", s(&pair), "--partition", s(&good)]).status.code(), Some(0));
    assert_eq!(parsikern(&["check-af", "-i", s(&pair), "--partition", s(&bad)]).status.code(), Some(1));
    assert_eq!(parsikern(&["check-af", "-i", s(&pair), "--partition", s(&partial)]).status.code(), Some(1));
}

#[test]
fn parse_errors_report_location() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "bad.nwk", "((a,b),(c,d);\n((a,c),(b,d));\n");
    let out = parsikern(&["dmp", "-i", s(&pair)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("byte"));
}

#[test]
fn mismatched_taxa_is_a_domain_error() {
    let dir = TempDir::new().unwrap();
    let pair = file(&dir, "mm.nwk", "((a,b),(c,d));\n((a,c),(b,e));\n");
    assert_eq!(parsikern(&["dtbr", "-i", s(&pair)]).status.code(), Some(1));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn hexaudit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexaudit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn build_h2(dir: &Path) -> String {
    let p = dir.join("h2.txt");
    let o = hexaudit(&["build", "--q", "2", "--out", p.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "H(2): 63 lines, 63 points\n");
    p.to_str().unwrap().to_string()
}

#[test]
fn build_rejects_non_prime_power() {
    let dir = tempfile::tempdir().unwrap();
    let o = hexaudit(&["build", "--q", "6", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported field order 6"));
}

#[test]
fn audit_report_binds_input() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    let out = dir.path().join("r.json");
    let o = hexaudit(&["audit", "--in", &h2, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    let digest: String = Sha256::digest(fs::read(&h2).unwrap())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    assert_eq!(doc["input_digest"], format!("sha256:{digest}"));
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["report"]["lines"], 63);
    assert_eq!(doc["report"]["all_pass"], true);
    assert_eq!(doc["report"]["histograms"]["2"]["3"], 63);
}

#[test]
fn audit_concurrent_lines_fails_pt() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.txt");
    fs::write(&p, "PGLS 1\nn 3\nq 2\n1 0 0 0,0 1 0 0\n1 0 0 0,0 0 1 0\n").unwrap();
    let o = hexaudit(&["audit", "--in", p.to_str().unwrap(), "--axioms", "pt"]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("Pt  FAIL"), "{s}");
    assert!(s.contains("witness: 0-space"), "{s}");
}

#[test]
fn audit_to_only() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    let o = hexaudit(&["audit", "--in", &h2, "--axioms", "to"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("To  pass  count <= 63  observed 63"));
    assert!(!s.contains("Pt"));
    assert!(!s.contains("dim "));
}

#[test]
fn audit_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    assert_eq!(hexaudit(&["audit", "--in", &h2, "--axioms", "pt,xx"]).status.code(), Some(2));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "PGLS 1\nn 3\nq 2\n1 0 0 0,1 0 0 0\n").unwrap();
    assert_eq!(hexaudit(&["audit", "--in", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(hexaudit(&["audit", "--in", "/nonexistent/file"]).status.code(), Some(2));
    assert_eq!(hexaudit(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn naive_strategy_matches_closure_output() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    let a = hexaudit(&["audit", "--in", &h2, "--axioms", "pt,pl,sd,4d"]);
    let b = hexaudit(&["audit", "--in", &h2, "--axioms", "pt,pl,sd,4d", "--strategy", "naive"]);
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn polygon_on_hexagon() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    let o = hexaudit(&["polygon", "--in", &h2, "--k", "5", "--expect", "none"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "5-gon: none\nincidence graph: girth 12, diameter 6\n");
    let o = hexaudit(&["polygon", "--in", &h2, "--k", "5", "--expect", "found"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hexaudit(&["polygon", "--in", &h2, "--k", "6"]);
    assert!(stdout(&o).starts_with("6-gon: points "));
    assert_eq!(hexaudit(&["polygon", "--in", &h2, "--k", "7"]).status.code(), Some(2));
}

#[test]
fn classify4_q2() {
    let o = hexaudit(&["classify4", "--q", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("PG(6,2): 2667 4-spaces\n"));
    assert!(s.contains("max lines in a 4-space: 9 (bound 12)"));
}

#[test]
fn srg_messages() {
    let o = hexaudit(&["srg", "--q", "3"]);
    assert!(stdout(&o).contains("infeasible: 1+4q=13 not an odd square"));
    let o = hexaudit(&["srg", "--q", "2"]);
    assert!(stdout(&o).contains("eigenvalues 1, -2"));
    assert_eq!(hexaudit(&["srg", "--q", "1"]).status.code(), Some(2));
}

#[test]
fn verify_and_hyperplane() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    let s = stdout(&hexaudit(&["verify", "--in", &h2]));
    assert_eq!(s, "flat: true\nfull: true\norder: (2,2)\nspan dimension: 6\n");
    let s = stdout(&hexaudit(&["hyperplane", "--in", &h2]));
    assert!(s.starts_with("\"Vacuous\"\n"));
}

#[test]
fn search_writes_header_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"n":3,"q":2,"axioms":["Pt","Pl"],"mode":"greedy","seed":9,"budget":500,"target":{"kind":"any"}}"#,
    )
    .unwrap();
    let out = dir.path().join("s.txt");
    let log = dir.path().join("s.json");
    let o = hexaudit(&[
        "search",
        "--spec",
        spec.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# search rng=ChaCha8Rng seed=9 "));
    let ls = hexaudit_core::parse_lineset(&text).unwrap();
    let r = hexaudit_core::audit(&ls, &hexaudit_core::AxiomConfig::parse("pt,pl").unwrap()).unwrap();
    assert!(r.all_pass);
    let doc: serde_json::Value = serde_json::from_slice(&fs::read(&log).unwrap()).unwrap();
    assert_eq!(doc["report"]["rng"], "ChaCha8Rng");
    assert_eq!(doc["report"]["seed"], 9);

    fs::write(&spec, r#"{"n":3,"q":2,"axioms":[],"mode":"greedy","seed":9,"budget":5,"target":{"kind":"any"}}"#).unwrap();
    assert_eq!(hexaudit(&["search", "--spec", spec.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn thread_env_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let h2 = build_h2(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_hexaudit"))
        .env("HEXAUDIT_THREADS", "2")
        .args(["audit", "--in", &h2, "--axioms", "sd"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_hexaudit"))
        .env("HEXAUDIT_THREADS", "zero")
        .args(["srg", "--q", "2"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

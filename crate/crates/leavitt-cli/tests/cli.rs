//! End-to-end tests of the binary: exit-code contract, output formats, and
//! the per-command surfaces.

use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_leavitt"))
}

fn write_doc(content: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().expect("temp file");
    f.write_all(content.as_bytes()).expect("write");
    f
}

fn two_loops() -> NamedTempFile {
    write_doc(
        r#"{"vertices":["v"],"edges":[
            {"id":"e","src":"v","dst":"v"},{"id":"f","src":"v","dst":"v"}]}"#,
    )
}

fn one_loop() -> NamedTempFile {
    write_doc(r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v"}]}"#)
}

fn line3() -> NamedTempFile {
    write_doc(
        r#"{"vertices":["a","b","c"],"edges":[
            {"id":"e1","src":"a","dst":"b"},{"id":"e2","src":"b","dst":"c"}]}"#,
    )
}

fn b_omega() -> NamedTempFile {
    write_doc(r#"{"vertices":["v"],"edges":[{"id":"e","src":"v","dst":"v","mult":"omega"}]}"#)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).to_string()
}

#[test]
fn analyze_reports_json_with_stable_fields() {
    let f = two_loops();
    let out = run(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(json["zStable"]["verdict"], "yes");
    assert_eq!(json["zStable"]["provenance"], "thm-B");
    assert_eq!(json["pure"], true);
    assert_eq!(json["idealCount"], 2);
}

#[test]
fn analyze_line3_is_not_pure() {
    let f = line3();
    let out = run(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["pure"], false);
    assert_eq!(json["zStable"]["verdict"], "no");
    assert_eq!(json["zStable"]["provenance"], "thm-C-necessity");
}

#[test]
fn analyze_broken_input_exits_2() {
    let f = write_doc(r#"{"vertices":["u"],"edges":[{"id":"e","src":"u","dst":"v"}]}"#);
    let out = run(&["analyze", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dangling"));

    let out = run(&["analyze", "/nonexistent/file.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_exit_codes() {
    let f = two_loops();
    let out = run(&["check", f.path().to_str().unwrap(), "condition-k"]);
    assert_eq!(out.status.code(), Some(0));

    let f = one_loop();
    let out = run(&["check", f.path().to_str().unwrap(), "condition-k"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains('v'));

    let f = b_omega();
    let out = run(&["check", f.path().to_str().unwrap(), "z-stable"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("conjecturally-yes"));
    assert!(stderr(&out).contains("conject"));

    let out = run(&["check", f.path().to_str().unwrap(), "row-finite"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn corpus_small_run_passes() {
    let out = run(&["corpus", "--max-vertices", "1", "--max-edges", "2"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("3 labeled multigraphs"));
    assert!(text.contains("all cross-checks passed"));
}

#[test]
fn corpus_rejects_zero_bounds_and_guards() {
    let out = run(&["corpus", "--max-vertices", "0", "--max-edges", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("positive"));

    let out = run(&[
        "corpus",
        "--max-vertices",
        "3",
        "--max-edges",
        "4",
        "--max-graphs",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("resource guard"));
}

#[test]
fn export_dot_variants() {
    let f = write_doc(r#"{"vertices":["u","v"],"edges":[{"id":"e","src":"u","dst":"v"}]}"#);
    let out = run(&["export-dot", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"u\" -> \"v\" [label=\"e\"]"));

    let f = b_omega();
    let out = run(&["export-dot", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("(ω)"));

    let f = write_doc(
        r#"{"vertices":["u","v"],"edges":[],
            "tails":[{"base":"v","preperiod":[],"period":["u"]}]}"#,
    );
    let out = run(&["export-dot", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("⋯"));
}

#[test]
fn lpa_subcommands() {
    let f = two_loops();
    let path = f.path().to_str().unwrap();
    let out = run(&["lpa", path, "nf", "s_[e]·s*_[e]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "p_[v] - s_[f]·s*_[f]");

    let out = run(&["lpa", path, "mul", "s*_[e]", "s_[e]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "p_[v]");

    let out = run(&["lpa", path, "star", "2·s_[e]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "2·s*_[e]");

    let out = run(&["lpa", path, "eq", "s_[e]·s*_[e]", "p_[v] - s_[f]·s*_[f]"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).trim(), "equal");

    let out = run(&["lpa", path, "eq", "p_[v]", "s_[e]·s*_[e]"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["lpa", path, "nf", "s_[zz]"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn centralizer_success_and_failure() {
    let f = write_doc(
        r#"{"vertices":["v","w"],"edges":[
            {"id":"g1","src":"w","dst":"v"},{"id":"g2","src":"w","dst":"v"}]}"#,
    );
    let out = run(&["centralizer", f.path().to_str().unwrap(), "--vertex", "v"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("N = 2 = 2·1 + 3·0"));
    assert!(text.contains("T[0][1] = s_[g1]·s*_[g2]"));

    let f = line3();
    let out = run(&["centralizer", f.path().to_str().unwrap(), "--vertex", "c"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("unique path"));
}

#[test]
fn desingularize_prints_tails() {
    let f = b_omega();
    let out = run(&["desingularize", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["tails"][0]["base"], "v");
    assert_eq!(json["tails"][0]["period"][0], "v");
}

#[test]
fn series_outputs_chain() {
    let f = two_loops();
    let out = run(&["series", f.path().to_str().unwrap(), "--format", "text"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("H_0 = {}"));
    assert!(text.contains("H_1 = {v}"));
    assert!(text.contains("purely infinite"));

    let f = one_loop();
    let out = run(&["series", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Condition (K)"));
}

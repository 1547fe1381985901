use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arbpack::bruteforce::{
    bf_feasible_completion, bf_feasible_decomposition, RootConstraint, SearchBudget,
};
use arbpack_cli::format::{InstanceFile, ResultFile, Status};
use serde_json::Value;
use tempfile::TempDir;

fn arbpack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbpack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

const TOY: &str = r#"{"vertices": ["x", "a", "b"], "arcs": [["x", "a"], ["x", "a"], ["a", "b"], ["x", "b"]], "root": "x", "k": 2}"#;

#[test]
fn check_feasible_toy_exits_zero() {
    let inst = InstanceFile::parse(TOY).unwrap();
    let bf = bf_feasible_completion(&inst.state().unwrap(), SearchBudget::default()).unwrap();
    assert_eq!(bf.decided(), Some(true));

    let dir = TempDir::new().unwrap();
    let p = write(&dir, "toy.json", TOY);
    let out = arbpack(&["check", "--in", s(&p), "--condition", "cond11"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["status"], "ok");
}

#[test]
fn unreachable_vertex_is_the_certificate() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "u.json",
        r#"{"vertices": ["x", "a", "b"], "arcs": [["x", "a"]], "root": "x", "k": 1}"#,
    );
    let out = arbpack(&["check", "--in", s(&p), "--condition", "cond11"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "infeasible");
    assert_eq!(v["certificate"]["family"], serde_json::json!([["b"]]));
    assert!(v["certificate"]["lhs"].as_i64() < v["certificate"]["rhs"].as_i64());
}

#[test]
fn missing_root_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "r.json",
        r#"{"vertices": ["x", "a"], "arcs": [["x", "a"]], "k": 1}"#,
    );
    let out = arbpack(&["check", "--in", s(&p), "--condition", "cond11"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "error");
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", "{\"vertices\": [");
    assert_eq!(
        arbpack(&["check", "--in", s(&p), "--condition", "cond11"])
            .status
            .code(),
        Some(2)
    );
    let p = write(
        &dir,
        "typo.json",
        r#"{"vertices": ["a"], "arcs": [], "rooot": "a"}"#,
    );
    assert_eq!(
        arbpack(&["solve", "--in", s(&p), "--mode", "complete"])
            .status
            .code(),
        Some(2)
    );
    let p = write(&dir, "ok.json", TOY);
    assert_eq!(
        arbpack(&["check", "--in", s(&p), "--condition", "cond99"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        arbpack(&["solve", "--in", s(&p), "--mode", "nope"])
            .status
            .code(),
        Some(2)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        arbpack(&["solve", "--in", s(&missing), "--mode", "complete"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn decompose_path_into_one_branching() {
    let text = r#"{"vertices": ["a", "b", "c"], "arcs": [["a", "b"], ["b", "c"]], "mode": "decompose", "k": 1}"#;
    let d = InstanceFile::parse(text).unwrap().digraph().unwrap();
    let bf =
        bf_feasible_decomposition(&d, &[RootConstraint::any()], SearchBudget::default()).unwrap();
    assert_eq!(bf.decided(), Some(true));

    let dir = TempDir::new().unwrap();
    let p = write(&dir, "path.json", text);
    let out = arbpack(&["solve", "--in", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["branchings"], serde_json::json!([[0, 1]]));
    assert_eq!(v["roots"], serde_json::json!([["a"]]));
}

#[test]
fn pack_exact_infeasible_gives_cond2_certificate() {
    // two spanning arborescences of a path do not exist
    let text = r#"{"vertices": ["a", "b", "c"], "arcs": [["a", "b"], ["b", "c"]], "mode": "pack_exact", "c": [1, 1]}"#;
    let d = InstanceFile::parse(text).unwrap().digraph().unwrap();
    let one = RootConstraint::exactly(1);
    let bf = bf_feasible_decomposition(&d, &[one, one], SearchBudget::default()).unwrap();
    assert_eq!(bf.decided(), Some(false));

    let dir = TempDir::new().unwrap();
    let p = write(&dir, "exact.json", text);
    let out = arbpack(&["solve", "--in", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["certificate"]["condition"], "cond2");
    assert!(v["certificate"]["lhs"].as_i64() > v["certificate"]["rhs"].as_i64());
}

#[test]
fn balance_evens_out_an_unbalanced_decomposition() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "bal.json",
        r#"{"vertices": ["a", "b", "c", "d"], "arcs": [["a", "b"], ["b", "c"], ["c", "d"]],
            "mode": "balance", "k": 2, "branchings": [[0, 1, 2], []]}"#,
    );
    let out = arbpack(&["solve", "--in", s(&p)]);
    assert_eq!(out.status.code(), Some(0));
    let r = ResultFile::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let mut arcs: Vec<usize> = r
        .branchings
        .as_ref()
        .unwrap()
        .iter()
        .map(Vec::len)
        .collect();
    let mut roots: Vec<usize> = r.roots.as_ref().unwrap().iter().map(Vec::len).collect();
    arcs.sort();
    roots.sort();
    // c = k|V| - |E| = 5 roots in total
    assert_eq!(arcs, [1, 2]);
    assert_eq!(roots, [2, 3]);
    let mut all: Vec<usize> = r.branchings.unwrap().concat();
    all.sort();
    assert_eq!(all, [0, 1, 2]);
}

#[test]
fn solve_then_replay_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "toy.json", TOY);
    for mode in ["complete", "pack_spanning", "decompose", "cover"] {
        let first = dir.path().join(format!("{mode}.json"));
        let again = dir.path().join(format!("{mode}-again.json"));
        let out = arbpack(&["solve", "--in", s(&p), "--mode", mode, "--out", s(&first)]);
        assert!(
            out.status.code() != Some(2),
            "{mode}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let out = arbpack(&[
            "replay",
            "--in",
            s(&p),
            "--solution",
            s(&first),
            "--out",
            s(&again),
        ]);
        assert!(
            out.status.code() != Some(2),
            "{mode}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert_eq!(
            fs::read(&first).unwrap(),
            fs::read(&again).unwrap(),
            "{mode}"
        );
    }
}

#[test]
fn instance_and_result_round_trip() {
    let inst = InstanceFile::parse(TOY).unwrap();
    assert_eq!(InstanceFile::parse(&inst.to_json()).unwrap(), inst);
    let r = arbpack_cli::commands::solve(&inst, Some("complete")).unwrap();
    assert_eq!(r.status, Status::Solution);
    let text = r.to_json();
    let back = ResultFile::parse(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), text);
}

#[test]
fn corpus_with_no_instances_passes() {
    let out = arbpack(&["corpus", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn corpus_passes_and_mutation_is_caught() {
    let out = arbpack(&["corpus", "--seed", "1", "--count", "50", "--max-v", "4"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let out = arbpack(&["corpus", "--seed", "1", "--count", "20", "--mutate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn bad_profile_exits_two() {
    assert_eq!(
        arbpack(&["corpus", "--profile", "lumpy"]).status.code(),
        Some(2)
    );
}

#[test]
fn bipartite_cover_instance() {
    let dir = TempDir::new().unwrap();
    // two sides of one element each, demand 1 on {t}
    let p = write(
        &dir,
        "cover.json",
        r#"{"mode": "cover", "S": ["s"], "T": ["t"], "E0": [], "p_T": {"t": 1}, "g": [1]}"#,
    );
    let out = arbpack(&["solve", "--in", s(&p)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(json(&out)["cover"], serde_json::json!([["s", "t"]]));

    let p = write(
        &dir,
        "nocover.json",
        r#"{"mode": "cover", "S": ["s"], "T": ["t"], "E0": [], "p_T": {"t": 1}, "g": [0]}"#,
    );
    let out = arbpack(&["solve", "--in", s(&p)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["certificate"]["condition"], "cond44");
}

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_budgetfd"))
        .args(args)
        .output()
        .expect("spawn budgetfd")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn prove_chain_emits_checkable_proof() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("proof.json");
    let premises = fixture("chain.txt");
    let out = run(&[
        "prove",
        "--premises",
        path(&premises),
        "--goal",
        "{a} |3 {c}",
        "--emit-proof",
        proof.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&proof).unwrap()).unwrap();
    assert_eq!(written["concludes"], "{a} |3 {c}");

    let check = run(&[
        "check-proof",
        "--premises",
        path(&premises),
        "--proof",
        proof.to_str().unwrap(),
        "--goal",
        "{a} |3 {c}",
    ]);
    assert_eq!(code(&check), 0, "{}", stdout(&check));
}

#[test]
fn tampered_proof_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let proof = dir.path().join("proof.json");
    let premises = fixture("chain.txt");
    run(&[
        "prove",
        "--premises",
        path(&premises),
        "--goal",
        "{a} |3 {c}",
        "--emit-proof",
        proof.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&proof)
        .unwrap()
        .replace("{a} |1 {b}", "{a} |0 {b}");
    std::fs::write(&proof, text).unwrap();
    let out = run(&[
        "--json",
        "check-proof",
        "--premises",
        path(&premises),
        "--proof",
        proof.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["valid"], false);
}

#[test]
fn refuted_goal_lists_blocking_purchases() {
    let out = run(&[
        "--json",
        "prove",
        "--premises",
        path(&fixture("one_time_pad.txt")),
        "--goal",
        "{} |4 {b}",
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["entailed"], false);
    assert_eq!(v["min_budget"], "5");
    assert!(!v["blocking"].as_array().unwrap().is_empty());
}

#[test]
fn one_time_pad_min_budget_prints_five() {
    let out = run(&[
        "min-budget",
        "--premises",
        path(&fixture("one_time_pad.txt")),
        "--from",
        "{}",
        "--to",
        "{b}",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).lines().next(), Some("5"));
}

#[test]
fn unreachable_min_budget_is_negative() {
    let out = run(&[
        "min-budget",
        "--premises",
        path(&fixture("chain.txt")),
        "--from",
        "{b}",
        "--to",
        "{a}",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).trim(), "unreachable");
}

#[test]
fn asymmetric_keys_formula_is_invalid_with_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let counter = dir.path().join("cx.json");
    let formula = fixture("asymmetric_keys_formula.txt");
    let out = run(&[
        "--json",
        "valid",
        "--formula",
        path(&formula),
        "--emit-counter",
        counter.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["valid"], false);
    assert!(!v["counterexample"]["hypergraph"]["edges"]
        .as_array()
        .unwrap()
        .is_empty());
    let pkg: Value = serde_json::from_str(&std::fs::read_to_string(&counter).unwrap()).unwrap();
    assert_eq!(pkg["verified"], true);
}

#[test]
fn derived_rule_is_valid() {
    let out = run(&[
        "valid",
        "--attrs",
        "a,b,c,d",
        "--expr",
        "{a} |1 {b} => {c} |2 {d} => {a,c} |3 {b,d}",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "valid");
}

#[test]
fn sat_and_unsat() {
    let sat = run(&["sat", "--attrs", "a,b", "--expr", "{a} |1 {b} & !{b} |0 {a}"]);
    assert_eq!(code(&sat), 0);
    let unsat = run(&["sat", "--attrs", "a,b", "--expr", "{a} |1 {b} & !{a} |2 {b}"]);
    assert_eq!(code(&unsat), 1);
}

#[test]
fn counterexample_with_materialized_model() {
    let out = run(&[
        "--json",
        "counterexample",
        "--attrs",
        "a,b,c",
        "--expr",
        "{a} |4 {b} => {} |4 {b}",
        "--materialize",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["verified"], true);
    assert_eq!(v["materialized"]["formula"], false);
}

#[test]
fn counterexample_from_given_hypergraph() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    std::fs::write(
        &h,
        r#"{"vertices":["a","b"],"edges":[{"in":["a"],"out":["b"],"w":"2"}]}"#,
    )
    .unwrap();
    let hp = h.to_str().unwrap();
    let falsified = run(&[
        "counterexample",
        "--attrs",
        "a,b",
        "--expr",
        "{a} |1 {b}",
        "--hypergraph",
        hp,
    ]);
    assert_eq!(code(&falsified), 0, "{}", stdout(&falsified));
    let holds = run(&[
        "counterexample",
        "--attrs",
        "a,b",
        "--expr",
        "{a} |2 {b}",
        "--hypergraph",
        hp,
    ]);
    assert_eq!(code(&holds), 1);
}

#[test]
fn check_model_on_one_time_pad() {
    let model = fixture("one_time_pad_model.json");
    let out = run(&[
        "check-model",
        "--model",
        path(&model),
        "--expr",
        "{a} |4 {b} => {} |4 {b}",
    ]);
    assert_eq!(code(&out), 1);
    let out = run(&["--json", "check-model", "--model", path(&model), "--expr", "{} |5 {b}"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["atoms"][0]["min_budget"], "5");
}

#[test]
fn mine_csv_finds_zip_to_city() {
    let out = run(&[
        "--json",
        "mine",
        "--csv",
        path(&fixture("orders.csv")),
        "--costs",
        path(&fixture("orders_costs.txt")),
        "--max-lhs",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let atoms: Vec<String> = json(&out)["dependencies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["atom"].as_str().unwrap().to_string())
        .collect();
    assert!(atoms.contains(&"{zip} |0 {city}".to_string()), "{atoms:?}");
    assert!(!atoms.iter().any(|a| a.ends_with("{order}")));
}

#[test]
fn universe_mismatch_is_a_usage_error() {
    let out = run(&[
        "prove",
        "--premises",
        path(&fixture("chain.txt")),
        "--goal",
        "{a} |3 {c}",
        "--attrs",
        "a,c,b",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("universe mismatch"));
}

#[test]
fn missing_universe_is_a_usage_error() {
    let out = run(&["sat", "--expr", "{a} |1 {b}"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn parse_errors_and_bad_flags_exit_two() {
    assert_eq!(code(&run(&["sat", "--attrs", "a", "--expr", "{a} |"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(
        code(&run(&[
            "sat",
            "--attrs",
            "a",
            "--expr",
            "{a} |1 {a}",
            "--cap-atoms",
            "0"
        ])),
        2
    );
}

#[test]
fn atom_cap_exits_three() {
    let out = run(&[
        "sat",
        "--attrs",
        "a,b",
        "--expr",
        "{a} |1 {b} & {a} |2 {b} & {a} |3 {b}",
        "--cap-atoms",
        "2",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn json_output_is_deterministic() {
    let args = [
        "--json",
        "valid",
        "--formula",
        path(&fixture("asymmetric_keys_formula.txt")),
    ]
    .map(str::to_string);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

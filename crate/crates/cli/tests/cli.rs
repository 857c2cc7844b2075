use std::path::Path;
use std::process::{Command, Output};

use omega2tl::{holds, parse, PeriodicModel, TimeInstant};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omega2tl"))
        .args(args)
        .env_remove("OMEGA2TL_MAX_CLOSURE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn collapse_example_is_valid() {
    let o = run(&["valid", "[1][w]p0 <-> [w]p0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "valid");
}

#[test]
fn contradiction_is_unsat() {
    let o = run(&["sat", "p0 & !p0"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o).trim(), "UNSAT");
}

#[test]
fn noncompactness_demo_reports_success() {
    let o = run(&["demo-noncompactness", "--n", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("family satisfied by witness at <0,0>: true"));
}

#[test]
fn parse_shows_core_form_and_rejects_garbage() {
    let o = run(&["parse", "g p0"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("desugared:"));
    let bad = run(&["parse", "p0 u"]);
    assert_eq!(code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("missing an operand"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(
        code(&run(&["check", "--model", "/nonexistent/m.json", "p0"])),
        2
    );
    assert_eq!(code(&run(&["sat", "p0 &"])), 2);
}

#[test]
fn witness_file_loads_and_satisfies_the_formula() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.json");
    let formula = "(p0 U p1) & G F p2";
    let o = run(&["sat", "--output", path.to_str().unwrap(), formula]);
    assert_eq!(code(&o), 0);
    let m = PeriodicModel::load(&path).unwrap();
    assert!(holds(&m, TimeInstant::ORIGIN, &parse(formula).unwrap()));

    let check = run(&[
        "check",
        "--model",
        path.to_str().unwrap(),
        "--at",
        "0,0",
        formula,
    ]);
    assert_eq!(code(&check), 0);
    assert_eq!(stdout(&check).trim(), "true");
}

#[test]
fn json_witness_round_trips_through_the_loader() {
    let o = run(&[
        "--json",
        "sat",
        "--workers",
        "2",
        "F !p0 & p0 & [1]p0 & [w]p0",
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"], "SAT");
    let m = PeriodicModel::from_json(&v["witness"].to_string()).unwrap();
    assert!(holds(
        &m,
        TimeInstant::ORIGIN,
        &parse("F !p0 & p0 & [1]p0 & [w]p0").unwrap()
    ));
}

#[test]
fn small_bounds_are_reported_honestly() {
    let phi = "!p0 & [1]!p0 & [1][1]!p0 & [1][1][1]p0 & g(p0 -> [1]p0)";
    let o = run(&["sat", "--max-prefix", "1", "--max-loop", "1", phi]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("UNSAT-WITHIN-BOUNDS"));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn entailment_from_a_theory_file() {
    let dir = tempfile::tempdir().unwrap();
    let theory = write(dir.path(), "t.txt", "# everything p0\nG p0\n\n  # done\n");
    let yes = run(&["entail", "--theory", &theory, "[w][1]p0"]);
    assert_eq!(code(&yes), 0);
    assert_eq!(stdout(&yes).trim(), "entailed");
    let no = run(&["entail", "--theory", &theory, "p1"]);
    assert_eq!(code(&no), 1);
    assert!(stdout(&no).starts_with("not entailed"));
    let broken = write(dir.path(), "bad.txt", "p0\np0 &\n");
    let o = run(&["entail", "--theory", &broken, "p0"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
}

#[test]
fn transition_report_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(
        dir.path(),
        "m.json",
        r#"{"universe": ["p0"], "row_prefix": [{"col_prefix": [], "col_loop": [["p0"]]}],
            "row_loop": [{"col_prefix": [], "col_loop": [[]]}]}"#,
    );
    let o = run(&["transitions", "--model", &model]);
    assert_eq!(code(&o), 1);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tr1_variable_violations"], serde_json::json!([[0, "p0"]]));
    assert_eq!(v["tr2_variable_violations"], serde_json::json!([]));
}

#[test]
fn closure_cap_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_omega2tl"))
        .args(["sat", "p0 U p1"])
        .env("OMEGA2TL_MAX_CLOSURE", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("OMEGA2TL_MAX_CLOSURE"));
}

#[test]
fn selftest_is_deterministic() {
    let a = run(&["selftest", "--seed", "3", "--cases", "20"]);
    let b = run(&["selftest", "--seed", "3", "--cases", "20"]);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));
    assert!(stdout(&a).trim_end().ends_with("selftest: PASS"));
}

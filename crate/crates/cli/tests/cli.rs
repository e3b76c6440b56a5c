use std::path::Path;
use std::process::{Command, Output};

const BASIC: &str = "model basic
var A, B
param x, y, z in [0,1]
table P0(A) { T: x ; F: 1-x }
table P0(B|A) { T|T: y ; F|T: 1-y ; T|F: z ; F|F: 1-z }
query set P(B=T) given { P(A=T) = 1 ; P0(B=T|A=T) = 1 }
expect set = {1.000}
";

/// Loads fine, fails when run: the family ranges over too few atoms.
const FAILING_QUERY: &str = "query family \"bf(A => B)\" over A\n";

fn polylogic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polylogic")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_ok_and_query_error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.model", BASIC);
    let o = polylogic(&["run", &good]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("set = {1.000}"));

    let bad = write(dir.path(), "bad.model", &format!("{BASIC}{FAILING_QUERY}"));
    let o = polylogic(&["run", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("error:"));
}

#[test]
fn load_errors_exit_two_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "broken.model", "model m\nvar A\nparam x in [0,1]\ntable P0(A) { T: x }\nquery P(A=T) + q\n");
    let o = polylogic(&["run", &f]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(polylogic(&["run", "/nonexistent.model"]).status.code(), Some(2));
    assert_eq!(polylogic(&["check", &f]).status.code(), Some(2));
    assert_eq!(polylogic(&["corpus", "nope"]).status.code(), Some(2));
}

#[test]
fn check_validates_without_running() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "m.model", &format!("{BASIC}{FAILING_QUERY}"));
    let o = polylogic(&["check", &f]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ok (2 queries)"));
}

#[test]
fn json_and_text_carry_the_same_facts() {
    let text = stdout(&polylogic(&["corpus", "butter"]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&polylogic(&["corpus", "butter", "--format", "json"]))).unwrap();
    assert_eq!(json["schema"], 1);
    for q in json["queries"].as_array().unwrap() {
        for f in q["facts"].as_array().unwrap() {
            let line = format!("  {} = {}", f["key"].as_str().unwrap(), f["value"].as_str().unwrap());
            assert!(text.contains(&line), "{line}");
        }
    }
}

#[test]
fn corpus_all_has_no_mismatches() {
    let o = polylogic(&["corpus", "all", "--oracle-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("corpus: 18 models, 0 mismatches, all ok"));
}

#[test]
fn flags_shape_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "m.model", BASIC);
    let o = stdout(&polylogic(&["run", &f, "--dump-programs", "--oracle-check", "--grid", "20"]));
    assert!(o.contains("program:"), "{o}");
    assert!(o.contains("oracle set"), "{o}");
    let a = stdout(&polylogic(&["run", &f, "--sequential"]));
    let b = stdout(&polylogic(&["run", &f]));
    assert_eq!(a, b);
    let wide = stdout(&polylogic(&["corpus", "transitivity", "--epsilon", "1/100"]));
    assert!(wide.contains("set = [0.010, 1.000]"), "{wide}");
    assert_eq!(polylogic(&["run", &f, "--epsilon", "abc"]).status.code(), Some(2));
}

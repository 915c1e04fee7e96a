use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn rotsym(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rotsym"));
    c.args(args);
    c
}

fn parse(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn wigner_six_j() {
    let out = rotsym(&["wigner", "6j", "1/2", "1/2", "1", "1/2", "1/2", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = parse(&out);
    assert_eq!(v["value"], "1*sqrt(1/36)");
    assert_eq!(v["decimal"], json!(0.166666666666667));
}

#[test]
fn negative_projections_are_not_flags() {
    let out = rotsym(&["wigner", "3j", "1", "1", "0", "1", "-1", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(parse(&out)["value"], "1*sqrt(1/3)");
}

#[test]
fn invalid_spins_exit_two_with_json() {
    let out = rotsym(&["wigner", "cg", "1/2", "1", "1/2", "1/2", "1", "1/2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(parse(&out)["error"]["code"], 2);
    let out = rotsym(&["wigner", "6j", "x", "1", "1", "1", "1", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = rotsym(&["nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn xmatrix_all_methods_with_checks() {
    let out = rotsym(&["xmatrix", "1/2", "1/2", "--method", "all"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = parse(&out);
    assert_eq!(v["matrix"], json!([["-1/2", "3/2"], ["1/2", "1/2"]]));
    assert_eq!(v["methods"], json!(["trace", "sixj", "closed"]));
    assert_eq!(v["checks"]["involution"], true);
    let out = rotsym(&["xmatrix", "2", "2", "--method", "closed"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn classify_from_stdin() {
    let doc =
        r#"{"pairs":[{"ja":"1/2","jb":"1/2"},{"ja":"1/2","jb":"1/2"}],"family":"00","fidelities":["1","0","0","0"]}"#;
    let mut child = rotsym(&["classify", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(doc.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = parse(&out);
    assert_eq!(v["verdict"], "entangled");
    assert_eq!(v["failing_mask"], "10");
}

#[test]
fn classify_from_file_rejects_unnormalized() {
    let dir = std::env::temp_dir().join(format!("rotsym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("state.json");
    std::fs::write(&path, r#"{"pairs":[{"ja":"1/2","jb":"1/2"}],"fidelities":["1/2","1/4"]}"#).unwrap();
    let out = rotsym(&["classify", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn twirl_is_deterministic_across_thread_counts() {
    let doc = r#"{"pairs":[{"ja":"1/2","jb":"1"}],"matrix":[[1,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0],[0,0,0,0,0,0]]}"#;
    let args = ["twirl", doc, "--samples", "10000", "--seed", "17"];
    let one = rotsym(&args).env("ROTSYM_THREADS", "1").output().unwrap();
    let two = rotsym(&args).env("ROTSYM_THREADS", "2").output().unwrap();
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, two.stdout);
    let v = parse(&one);
    assert_eq!(v["fidelities"], json!(["0", "1"]));
    assert!(v["monte_carlo"]["max_deviation"].as_f64().unwrap() < 0.05);
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let out = rotsym(&["xmatrix", "1/2", "1/2"]).env("ROTSYM_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reduce_uses_one_based_slots() {
    let doc =
        r#"{"pairs":[{"ja":"1/2","jb":"1/2"},{"ja":"1/2","jb":"1/2"}],"family":"00","fidelities":["0","1","0","0"]}"#;
    let out = rotsym(&["reduce", doc, "--slot", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(parse(&out)["fidelities"], json!(["1", "0"]));
}

use std::io::Write;
use std::process::{Command, Stdio};

use serde_json::{json, Value};

fn run_args(req: &Value, args: &[&str]) -> (Value, i32, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ccsym"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    // with --file the child may exit before reading stdin
    let _ = child.stdin.take().unwrap().write_all(req.to_string().as_bytes());
    let out = child.wait_with_output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    (serde_json::from_str(&text).unwrap(), out.status.code().unwrap(), text)
}

fn run(req: Value) -> (Value, i32) {
    let (v, code, _) = run_args(&req, &[]);
    (v, code)
}

fn mono(n: usize, exp: &[i64], coef: &str) -> Value {
    json!({ "n": n, "terms": [{ "exp": exp, "coef": coef }] })
}

#[test]
fn cc_of_t_and_t() {
    let (v, code) = run(json!({ "command": "cc", "n": 1, "tuple": [mono(1, &[1], "1"), mono(1, &[1], "1")] }));
    assert_eq!(code, 0);
    assert_eq!(v["value"], "-1");
    assert_eq!(v["branch_trace"][0]["branch"], "sign");
}

#[test]
fn both_sign_rules_agree() {
    let t = [mono(2, &[1, 2], "1"), mono(2, &[-1, 3], "1"), mono(2, &[2, 1], "1")];
    let a = run(json!({ "command": "cc", "tuple": t, "sign_rule": "vf" })).0;
    let b = run(json!({ "command": "cc", "tuple": t, "sign_rule": "kh" })).0;
    assert_eq!(a["value"], b["value"]);
}

#[test]
fn additive_symbol_of_variables() {
    let (v, code) = run(json!({ "command": "nu", "n": 2, "tuple": [mono(2, &[1, 0], "1"), mono(2, &[0, 1], "1")] }));
    assert_eq!(code, 0);
    assert_eq!(v["value"], 1);
}

#[test]
fn steinberg_suite() {
    let (v, code) = run(json!({ "command": "check", "suite": "steinberg", "n": 1, "seed": 7, "trials": 50 }));
    assert_eq!(code, 0);
    assert_eq!(v["ok"], true);
    assert_eq!(v["passed"], 50);
}

#[test]
fn flags_override_the_request() {
    let req = json!({ "command": "check", "suite": "residue_det", "n": 2, "seed": 1, "trials": 3 });
    let (v, _, _) = run_args(&req, &["--trials", "5", "--seed", "9"]);
    assert_eq!(v["trials"], 5);
    assert_eq!(v["seed"], "9");
}

#[test]
fn responses_are_deterministic() {
    let req = json!({ "command": "check", "suite": "multilinear", "n": 2, "seed": 4, "trials": 5 });
    assert_eq!(run_args(&req, &[]).2, run_args(&req, &[]).2);
    let req = json!({ "command": "phi", "n": 1, "j": [1], "degree": 3, "window": { "lo": [-2], "hi": [2] } });
    let (a, b) = (run_args(&req, &["--json-pretty"]).2, run_args(&req, &["--json-pretty"]).2);
    assert_eq!(a, b);
    assert!(a.contains('\n'));
}

#[test]
fn residue_of_a_form() {
    let ring = json!({ "base": "Q", "nil": [["e", 2]] });
    let form = json!({ "degree": 1, "components": [{ "dt": [1], "series": mono(1, &[-1], "3*e") }] });
    let (v, code) = run(json!({ "command": "res", "ring": ring, "form": form }));
    assert_eq!(code, 0);
    assert_eq!(v["value"], "3*e^1");
}

#[test]
fn unstable_window_is_reported() {
    let f = json!({ "n": 2, "terms": [{ "exp": [0, 0], "coef": "1" }, { "exp": [-1, 1], "coef": "-1" }] });
    let req =
        json!({ "command": "res", "dlog": [f, mono(2, &[1, 0], "1")], "window": { "lo": [-1, -1], "hi": [1, 1] } });
    let (v, code) = run(req.clone());
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "StabilityExhausted");
    let (v, code, _) = run_args(&req, &["--window-doublings", "1"]);
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("StabilityExhausted")));
}

#[test]
fn decompose_round_trips_through_cc_strings() {
    let ring = json!({ "base": "Z", "nil": [["e", 2]] });
    let f = json!({ "n": 1, "terms": [{ "exp": [-1], "coef": "e" }, { "exp": [0], "coef": "1+e" }, { "exp": [1], "coef": "1" }] });
    let (v, code) = run(json!({ "command": "decompose", "ring": ring, "f": f }));
    assert_eq!(code, 0);
    assert_eq!(v["nu"], json!([0]));
    assert_eq!(v["c"], "1");
    // the emitted series are valid inputs
    let (w, code) = run(json!({ "command": "cc", "ring": ring, "tuple": [v["v_minus"], v["v_plus"]] }));
    assert_eq!(code, 0);
    assert!(w["value"].is_string());
}

#[test]
fn tame_and_witt_pair() {
    let (v, _) = run(json!({ "command": "tame", "f": mono(1, &[1], "2"), "g": mono(1, &[0], "3") }));
    assert_eq!(v["value"], "1/3");
    let ring = json!({ "base": "Z", "nil": [["e", 2]] });
    let req = json!({ "command": "witt-pair", "ring": ring, "S": [1, 2, 3], "f": [mono(1, &[1], "1")], "g": { "1": mono(1, &[0], "e") } });
    let (v, code) = run(req);
    assert_eq!(code, 0);
    assert_eq!(v["integral"], true);
    assert_eq!(v["coords"]["1"], "e^1");
}

#[test]
fn phi_evaluation() {
    let ring = json!({ "base": "Z", "nil": [["e", 2]] });
    let (v, code) = run(json!({ "command": "phi", "ring": ring, "n": 1, "j": [1], "g": [mono(1, &[0], "e")] }));
    assert_eq!(code, 0);
    assert_eq!(v["value"], "e^1 + 1");
}

#[test]
fn error_exit_codes() {
    let (v, code) = run(json!({ "command": "nu", "ring": { "base": "Z" }, "tuple": [mono(1, &[1], "2")] }));
    assert_eq!((code, v["error"]["kind"].as_str()), (2, Some("NotInvertible")));
    let (v, code) = run(json!({ "command": "cc", "tuple": "nope" }));
    assert_eq!((code, v["error"]["kind"].as_str()), (1, Some("ParseError")));
    let (v, code) = run(json!({ "command": "check", "suite": "unknown" }));
    assert_eq!((code, v["ok"].as_bool()), (1, Some(false)));
    let ring = json!({ "base": "Q", "nil": [["e", 2]] });
    let other = json!({ "n": 2, "terms": [{ "exp": [0, 0], "coef": "1" }] });
    let (_, code) = run(json!({ "command": "cc", "ring": ring, "n": 1, "tuple": [mono(1, &[1], "1"), other] }));
    assert_eq!(code, 1);
}

#[test]
fn reads_from_a_file() {
    let path = std::env::temp_dir().join(format!("ccsym-cli-test-{}.json", std::process::id()));
    std::fs::write(&path, json!({ "command": "nu", "tuple": [mono(1, &[3], "1")] }).to_string()).unwrap();
    let (v, code, _) = run_args(&json!(null), &["--file", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code, 0);
    assert_eq!(v["value"], 3);
}

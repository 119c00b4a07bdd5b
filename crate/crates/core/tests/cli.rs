use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gflab")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gflab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn strip_elapsed(mut v: Value) -> Value {
    for c in v["checks"].as_array_mut().unwrap() {
        c.as_object_mut().unwrap().remove("elapsed_ms");
    }
    v
}

#[test]
fn qexp_formats() {
    let o = gflab(&["qexp", "theta", "--order", "3", "--format", "text"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "X + 744*X^2 + 750420*X^3 + O(X^4)");
    let v = json(&gflab(&["qexp", "j", "--order", "1"]));
    assert_eq!(v["offset"], "-1");
    assert_eq!(v["coefficients"], serde_json::json!(["1/1", "744/1", "196884/1"]));
    let cache = gflab(&["qexp", "alpha", "--order", "5", "--format", "cache"]);
    assert_eq!(code(&cache), 0);
    let path = scratch("alpha.qseries");
    std::fs::write(&path, &cache.stdout).unwrap();
    let e = json(&gflab(&["eval", "--series", path.to_str().unwrap(), "--place", "p=3", "--x", "3", "--precision", "3"]));
    assert_eq!(e["precision"], "3^3");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&gflab(&["verify", "no-such-suite"])), 2);
    assert_eq!(code(&gflab(&["--nonsense"])), 2);
    assert_eq!(code(&gflab(&["qexp", "zeta"])), 2);
    assert_eq!(code(&gflab(&["eval", "--series", "F", "--x", "1/0"])), 2);
    assert_eq!(code(&gflab(&["verify", "heights", "--prime", "4"])), 2);
    assert_eq!(code(&gflab(&["modpoly", "--level", "4"])), 2);
    assert_eq!(code(&gflab(&["pair", "x0", "--t", "5", "--p", "6"])), 2);
}

#[test]
fn eval_reports_strings() {
    let v = json(&gflab(&["eval", "--series", "F", "--x", "1/10000", "--bits", "128"]));
    assert_eq!(v["certified"], true);
    assert!(v["value"].as_str().unwrap().starts_with("9.598228028536132"));
    let p = json(&gflab(&["eval", "--series", "F", "--place", "p=5", "--x", "0", "--precision", "10"]));
    assert_eq!(p["value"], "1 + O(5^10)");
    // outside the disc at infinity
    assert_eq!(code(&gflab(&["eval", "--series", "F", "--x", "1/1000"])), 1);
}

#[test]
fn suite_reports_are_reproducible() {
    let a = gflab(&["verify", "nonarch-lemmas", "--samples", "20", "--seed", "7"]);
    let b = gflab(&["verify", "nonarch-lemmas", "--samples", "20", "--seed", "7"]);
    assert_eq!(code(&a), 0);
    let (va, vb) = (json(&a), json(&b));
    assert_eq!(strip_elapsed(va.clone()), strip_elapsed(vb));
    assert_eq!(va["suite"], "nonarch-lemmas");
    assert_eq!(va["toolchain"]["seed"], "7");
    assert!(va["checks"][0]["elapsed_ms"].is_string());
    let names: Vec<&str> = va["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(names, sorted);
}

#[test]
fn height_and_ode() {
    let v = json(&gflab(&["height", "--minpoly", "-1,-1,1"]));
    assert!(v["height"].as_str().unwrap().starts_with("2.406059125298"));
    let t = gflab(&["height", "2/3", "--format", "text"]);
    assert!(String::from_utf8_lossy(&t.stdout).starts_with("1.0986122886681"));
    let ode = json(&gflab(&["ode", "guess", "--series", "F", "--max-order", "2", "--max-degree", "4"]));
    assert_eq!(ode["order"], "2");
    let rel = json(&gflab(&["relations", "find", "--series", "F", "--delta", "1", "--xdeg", "10", "--order", "400"]));
    assert_eq!(rel["certified_empty"], true);
}

#[test]
fn pair_build_verify_round_trip() {
    let pair = scratch("pair.json");
    let rel = scratch("rel.json");
    let o = gflab(&["pair", "x0", "--t", "5", "--p", "5", "--out", pair.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let p: Value = serde_json::from_str(&std::fs::read_to_string(&pair).unwrap()).unwrap();
    assert_eq!(p["s1"], "25/17779581");
    assert_eq!(code(&gflab(&["relation", "build", "--pair-file", pair.to_str().unwrap(), "--out", rel.to_str().unwrap()])), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&rel).unwrap()).unwrap();
    assert_eq!(r["p_fin"]["variables"], serde_json::json!(["Y1", "Y2"]));
    let v = gflab(&[
        "relation", "verify", "--rel", rel.to_str().unwrap(), "--pair", pair.to_str().unwrap(), "--places", "inf,p=5", "--precision", "50",
    ]);
    assert_eq!(code(&v), 0);
    let rep = json(&v);
    assert_eq!(rep["passed"], true);
    assert_eq!(rep["places"][1]["vanishing_factors"], serde_json::json!(["-1"]));
    // p = 7 does not divide s1
    let bad = gflab(&["relation", "verify", "--rel", rel.to_str().unwrap(), "--pair", pair.to_str().unwrap(), "--places", "p=7"]);
    assert_eq!(code(&bad), 1);
}

#[test]
fn modpoly_to_file() {
    let out = scratch("phi2.json");
    assert_eq!(code(&gflab(&["modpoly", "--level", "2", "--order", "40", "--out", out.to_str().unwrap()])), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(v.to_string().contains("40773375"));
}

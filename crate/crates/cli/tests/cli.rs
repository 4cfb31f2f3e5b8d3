use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coframe"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn list_text_and_json() {
    let o = run(&["list"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().any(|l| l.starts_with("su2.standard ")));
    let v = json(&run(&["list", "--json"]));
    let arr = v.as_array().unwrap();
    let ids: Vec<&str> = arr.iter().map(|e| e["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert!(arr.iter().all(|e| !e["provenance"].as_str().unwrap().is_empty()));
}

#[test]
fn every_listed_id_verifies() {
    let v = json(&run(&["list", "--json"]));
    for e in v.as_array().unwrap() {
        let id = e["id"].as_str().unwrap();
        let o = run(&["verify", id, "--samples", "20", "--json"]);
        assert_eq!(o.status.code(), Some(0), "{id}: {}", stdout(&o));
    }
}

#[test]
fn verify_standard_structure() {
    let o = run(&["verify", "su2.standard", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["samples"], 200);
    let k = &r["invariant_summaries"]["kappa"];
    assert!((k["min"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((k["max"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn verify_sl2_pde_campaign() {
    let o = run(&["verify", "sl2.pde:C=0", "--samples", "500", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["pass"], true, "{c}");
        if c["name"].as_str().unwrap().starts_with("gfs.") {
            assert!(c["residual"].as_f64().unwrap() < 1e-6);
        }
    }
}

#[test]
fn unknown_id_exits_two() {
    assert_eq!(run(&["verify", "nosuch"]).status.code(), Some(2));
    assert_eq!(run(&["invariants", "nosuch", "--at", "0,0,0"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_one_with_report() {
    let o = run(&["verify", "su2.standard", "--tol", "1e-30", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["verify", "su2.f:u+0.5v", "--samples", "60", "--seed", "42", "--json"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 42);
    let c = run(&["verify", "su2.f:u+0.5v", "--samples", "60", "--seed", "43", "--json"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn fd_mode() {
    let o = run(&["verify", "e2.standard", "--mode", "fd", "--step", "1e-4", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["mode"], "fd");
}

#[test]
fn invariants_at_points() {
    let r = json(&run(&["invariants", "lens:a=0.3", "--at", "0,0,0", "--json"]));
    let k = r["values"][0]["extracted"].as_f64().unwrap();
    assert!((k - 1.0 / (8.0 * 0.3 * 0.3 * 0.3)).abs() < 1e-10);

    let r = json(&run(&["invariants", "su2.trivial", "--at", "0.1,0.2,0.3", "--json"]));
    let vals: Vec<f64> = (0..3).map(|i| r["values"][i]["extracted"].as_f64().unwrap()).collect();
    assert!(vals[0].abs() < 1e-12 && vals[1].abs() < 1e-12 && (vals[2] - 1.0).abs() < 1e-12);

    let r = json(&run(&["invariants", "sl2.pde:C=0", "--at", "1,1,1.5707963", "--json"]));
    assert!((r["values"][0]["extracted"].as_f64().unwrap() + 2.0).abs() < 1e-6);
    assert!(r["values"][1]["extracted"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn rejects_bad_arguments() {
    assert_eq!(run(&["invariants", "sl2.standard", "--at", "0,-1,0"]).status.code(), Some(1));
    assert!(!run(&["verify", "su2.standard", "--samples", "0"]).status.success());
    assert!(!run(&["verify", "su2.standard", "--step", "-1"]).status.success());
    assert!(!run(&["invariants", "su2.standard", "--at", "0,0"]).status.success());
}

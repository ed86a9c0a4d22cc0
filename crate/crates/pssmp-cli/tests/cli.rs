use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn pssmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pssmp")).args(args).output().expect("binary runs")
}

fn result(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    v["result"].clone()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_spec(dir: &Path, text: &str) -> String {
    let p = dir.join("spec.json");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn classify_brownian_is_frechet_with_cramer_root() {
    let out = pssmp(&["classify", "--gallery", "brownian-drift", "--b", "1", "--sigma", "1"]);
    assert_eq!(code(&out), 0);
    let r = result(&out);
    assert_eq!(r["regime"], "frechet");
    assert!((r["gamma"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn classify_killed_drift_is_weibull() {
    let out = pssmp(&["classify", "--gallery", "killed-drift"]);
    assert_eq!(code(&out), 0);
    let r = result(&out);
    assert_eq!(r["regime"], "weibull");
    assert_eq!(r["gamma0"], 1.0);
    assert_eq!(r["t_F"], 1.0);
}

#[test]
fn usage_and_schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(dir.path(), "{\"drift\": \"fast\"}");
    let out = pssmp(&["classify", "--spec", &bad]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
    let broken = write_spec(dir.path(), "{not json");
    assert_eq!(code(&pssmp(&["classify", "--spec", &broken])), 2);
    assert_eq!(code(&pssmp(&["classify", "--gallery", "no-such-example"])), 2);
    assert_eq!(code(&pssmp(&["classify", "--gallery", "rational", "--sigma", "1"])), 2);
    assert_eq!(code(&pssmp(&["simulate", "--gallery", "a", "--n", "10"])), 2);
    assert_eq!(code(&pssmp(&["classify", "--gallery", "a", "--tol", "bogus=1"])), 2);
    assert_eq!(code(&pssmp(&["yaglom", "--gallery", "a"])), 2);
    assert_eq!(code(&pssmp(&["classify"])), 2);
}

#[test]
fn yaglom_weibull_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let o = out_dir.display().to_string();
    let out = pssmp(&["yaglom", "--gallery", "killed-drift", "--t", "0.5,0.8,0.95", "--n", "1000", "--out", &o]);
    assert_eq!(code(&out), 0);
    let r = result(&out);
    assert_eq!(r["reference"], "point mass at 1");
    assert_eq!(r["pass"], true);
    for row in r["rows"].as_array().unwrap() {
        assert!((row["mean"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        assert!(row["variance"].as_f64().unwrap() < 1e-12);
    }
    let manifest: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["version"].as_str().unwrap().starts_with(env!("CARGO_PKG_VERSION")));
    assert_eq!(manifest["config"]["n"], 1000);
    assert_eq!(manifest["config"]["source"]["gallery"], "killed-drift");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"], manifest["config"]);
    let csv = std::fs::read_to_string(out_dir.join("data.csv")).unwrap();
    assert!(csv.starts_with("t,g,accepted,attempts,acceptance,mean,variance,ks\n"));
    assert_eq!(csv.lines().count(), 4);
    assert!(out_dir.join("marginals.csv").exists());
}

#[test]
fn yaglom_brownian_ks_decreases() {
    let out = pssmp(&["yaglom", "--gallery", "brownian-drift", "--t", "2,5,10", "--n", "2000", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    let r = result(&out);
    let ks: Vec<f64> = r["rows"].as_array().unwrap().iter().map(|row| row["ks"].as_f64().unwrap()).collect();
    assert!(ks[0] > ks[2], "{ks:?}");
    assert!(ks[2] < 0.05, "{ks:?}");
}

#[test]
fn yaglom_without_reference_is_diagnostic_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), r#"{"drift": -1.0, "killing": 0.5, "jumps_pos": {"kind": "stable", "c": 0.2, "alpha": 0.5}}"#);
    let out = pssmp(&["yaglom", "--spec", &spec, "--assert-gamma", "0.5", "--t", "1,2", "--n", "200"]);
    assert_eq!(code(&out), 0);
    let r = result(&out);
    assert_eq!(r["reference"], "none");
    assert!(r["pass"].is_null());
    assert_eq!(r["classification"]["via"], "user_asserted_regular_variation");
}

#[test]
fn rare_conditioning_event_exits_4() {
    let out = pssmp(&["yaglom", "--gallery", "brownian-drift", "--t", "20", "--n", "1000", "--tol", "acceptance_floor=0.5", "--tol", "min_attempts=1000"]);
    assert_eq!(code(&out), 4);
}

#[test]
fn factorizations() {
    let a = pssmp(&["verify-factorization", "--gallery", "killed-stable-sub", "--alpha", "0.5", "--n", "10000"]);
    assert_eq!(code(&a), 0);
    let r = result(&a);
    assert_eq!(r["pass"], true);
    assert!(r["ks"].as_f64().unwrap() < 0.03);

    let f = pssmp(&["verify-factorization", "--gallery", "rational", "--delta", "1", "--b", "2", "--n", "10000"]);
    assert_eq!(code(&f), 0);
    let r = result(&f);
    assert_eq!(r["target"], "Pareto(1)");
    assert!(r["ks"].as_f64().unwrap() < 0.04);

    let b = pssmp(&["verify-factorization", "--gallery", "killed-drift", "--factor", "beta:0.5"]);
    assert_eq!(code(&b), 1);
    let r = result(&b);
    assert_eq!(r["pass"], false);
    assert!(r["reason"].as_str().unwrap().starts_with("mass condition"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "4"] {
        let o = dir.path().join(threads).display().to_string();
        let out = pssmp(&["yaglom", "--gallery", "c", "--t", "1,3", "--n", "500", "--seed", "9", "--threads", threads, "--out", &o]);
        assert_eq!(code(&out), 0);
        let read = |f: &str| std::fs::read(dir.path().join(threads).join(f)).unwrap();
        csvs.push((read("data.csv"), read("marginals.csv")));
    }
    assert!(csvs[0] == csvs[1]);
}

#[test]
fn density_tail_residual_simulate_examples() {
    let d = pssmp(&["density", "--gallery", "killed-drift"]);
    assert_eq!(code(&d), 0);
    for m in result(&d)["moments"].as_array().unwrap() {
        assert!(m["rel_err"].as_f64().unwrap() < 1e-2);
    }

    let t = pssmp(&["tail", "--gallery", "a", "--tol", "x_max=1000"]);
    assert_eq!(code(&t), 0);
    assert_eq!(result(&t)["pass"], true);
    assert_eq!(code(&pssmp(&["tail", "--gallery", "c"])), 1);

    let r = pssmp(&["residual", "--gallery", "killed-drift", "--t", "0.5", "--n", "5000", "--mda"]);
    assert_eq!(code(&r), 0);
    let r = result(&r);
    assert_eq!(r["pass"], true);
    assert_eq!(r["mda"]["agrees"], true);

    let s = pssmp(&["simulate", "--gallery", "c", "--n", "5000"]);
    assert_eq!(code(&s), 0);
    assert_eq!(result(&s)["pass"], true);
    let s = pssmp(&["simulate", "--gallery", "d", "--n", "1000"]);
    assert_eq!(result(&s)["source"], "exact");

    let e = pssmp(&["examples", "--self-test", "--n", "5000"]);
    assert_eq!(code(&e), 0);
    let r = result(&e);
    assert_eq!(r["examples"].as_array().unwrap().len(), 9);
    assert_eq!(r["pass"], true);
}

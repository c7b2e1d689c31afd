use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_membership-rd")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn optimal_binary_json() {
    let v = json(&["optimal", "binary", "--eps-k", "0", "--eps-n", "0.0009765625", "--json"]);
    assert!((v["rate"].as_f64().unwrap() - 10.0).abs() < 1e-12);
    assert_eq!(v["mu_k"]["atoms"][0][0].as_f64(), Some(1.0));
}

#[test]
fn optimal_logloss_json() {
    let v = json(&["optimal", "logloss", "--eps-k", "0.1", "--eps-n", "0.2", "--json"]);
    assert!((v["x_star"].as_f64().unwrap() - 0.904837).abs() < 1e-6);
    assert!((v["q_star"].as_f64().unwrap() - 0.085028).abs() < 1e-6);
    // log2(1 / 0.0850279)
    assert!((v["rate"].as_f64().unwrap() - 3.555919).abs() < 1e-6);
}

#[test]
fn optimal_text_uses_six_significant_digits() {
    let out = run(&["optimal", "logloss", "--eps-k", "0.1", "--eps-n", "0.2"]);
    let text = stdout(&out);
    assert_eq!(field(&text, "x_star"), "0.904837");
    assert_eq!(field(&text, "rate_bits_per_key"), "3.55592");
}

#[test]
fn optimal_with_report() {
    let v = json(&["optimal", "binary", "--eps-k", "0.1", "--eps-n", "0.1", "--p", "0.001", "--n", "1000", "--json"]);
    let report = &v["report"];
    let solver = report["solver_rate"].as_f64().unwrap();
    assert!(solver < v["rate"].as_f64().unwrap());
    assert!((report["finite_n_bound_total"].as_f64().unwrap() - (1000.0 * solver - 8000f64.log2() / 2.0)).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let out = run(&["optimal", "binary", "--eps-k", "0.6", "--eps-n", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: trivial_regime: "));

    let out = run(&["optimal", "logloss", "--eps-k", "2", "--eps-n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: logloss_regime: "));

    assert_eq!(run(&["optimal", "binary", "--eps-k", "abc", "--eps-n", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["frontier", "--p", "sweep:1,2", "--eps-k", "0", "--eps-n", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

fn write_keys(dir: &Path, count: usize) -> std::path::PathBuf {
    let path = dir.join("keys.txt");
    let body: String = (0..count).map(|i| format!("user-{i}\n")).collect();
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn filter_build_query_bench() {
    let dir = tempfile::tempdir().unwrap();
    let keys = write_keys(dir.path(), 300);
    let state = dir.path().join("f.bin");
    let (keys_s, state_s) = (keys.to_str().unwrap(), state.to_str().unwrap());

    let out = run(&["filter", "build", "--keys", keys_s, "--eps-k", "0", "--eps-n", "0.5", "--seed", "7", "--out", state_s]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(field(&text, "satisfied_keys"), "300");
    assert_eq!(field(&text, "success"), "true");

    let out = run(&["filter", "query", "--state", state_s, "--elem", "user-42"]);
    assert_eq!(stdout(&out).trim(), "1");

    let v = json(&["filter", "bench", "--state", state_s, "--keys", keys_s, "--trials", "100000", "--json"]);
    let est = &v["estimate"];
    assert_eq!(est["fnr_hat"].as_f64(), Some(0.0));
    let (lo, hi) = (est["fpr_ci"][0].as_f64().unwrap(), est["fpr_ci"][1].as_f64().unwrap());
    assert!(lo <= 0.5 && 0.5 <= hi, "[{lo}, {hi}]");
}

#[test]
fn filter_errors() {
    let dir = tempfile::tempdir().unwrap();
    let keys = write_keys(dir.path(), 5);
    let state = dir.path().join("f.bin");
    let out = run(&["filter", "build", "--keys", keys.to_str().unwrap(), "--eps-k", "0", "--eps-n", "0.25", "--out", state.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: not_reciprocal_prime: "));

    std::fs::write(&state, b"garbage").unwrap();
    let out = run(&["filter", "query", "--state", state.to_str().unwrap(), "--elem", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: bad_state_file: "));
}

#[test]
fn frontier_csv_and_sidecar_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let out = run(&["frontier", "--p", "sweep:0.01,0.5,4,log", "--eps-k", "0.05", "--eps-n", "0.1", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let csv = std::fs::read_to_string(&path).unwrap();
        let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.dists.json"))).unwrap()).unwrap();
        assert_eq!(sidecar["points"].as_array().unwrap().len(), 4);
        outputs.push(csv);
    }
    assert_eq!(outputs[0], outputs[1]);
    let mut lines = outputs[0].lines();
    assert_eq!(lines.next(), Some("p,eps_K,eps_N,rate_bits_per_key,dual_K,dual_N,converged"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn frontier_logloss_json() {
    let v = json(&["frontier", "--p", "0.001", "--eps-k", "0.1", "--eps-n", "0.2", "--metric-k", "logloss", "--metric-n", "logloss", "--json"]);
    let rate = v[0]["rate"].as_f64().unwrap();
    assert!((rate - 3.5481823).abs() < 1e-6);
}

#[test]
fn oracles() {
    let out = run(&["oracle", "tiny", "--u", "4", "--n", "1", "--bits", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("0,1/3,")));
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));

    let out = run(&["oracle", "fpr", "--y", "1,2", "--eps-n", "0.3333333333333333"]);
    assert_eq!(field(&stdout(&out), "fpr"), "1/3");

    let out = run(&["oracle", "tiny", "--u", "8", "--n", "3", "--bits", "3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error: instance_too_large: "));
}

#[test]
fn estimate_kl() {
    let dir = tempfile::tempdir().unwrap();
    let facts = dir.path().join("facts.txt");
    let nonfacts = dir.path().join("nonfacts.txt");
    std::fs::write(&facts, "# fact scores\n0.9\n0.9\n0.8\n0.95\n").unwrap();
    std::fs::write(&nonfacts, "0.1\n0.9\n0.2\n0.8\n0.05\n0.95\n").unwrap();
    let v = json(&["estimate-kl", facts.to_str().unwrap(), nonfacts.to_str().unwrap(), "--bins", "10", "--json"]);
    // fact bins {8: 1/4, 9: 3/4} against non-fact bins {8: 1/6, 9: 2/6}
    let expected = 0.25 * (0.25f64 / (1.0 / 6.0)).log2() + 0.75 * (0.75f64 / (2.0 / 6.0)).log2();
    assert!((v["kl_bits"].as_f64().unwrap() - expected).abs() < 1e-12);
    assert!(v["eps_k_nats"].as_f64().unwrap() > 0.0);

    std::fs::write(&nonfacts, "1.5\n").unwrap();
    let out = run(&["estimate-kl", facts.to_str().unwrap(), nonfacts.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

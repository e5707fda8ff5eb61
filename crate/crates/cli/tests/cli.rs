use std::path::Path;
use std::process::{Command, Output};

fn ccl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccl")).args(args).output().expect("failed to spawn ccl")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(ccl(&["--help"]).status.code(), Some(0));
    assert_eq!(ccl(&["circle", "--help"]).status.code(), Some(0));
    assert_eq!(ccl(&["circle", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(ccl(&["coeffs", "--weight", "14", "--upto", "5", "--out", "x.csv"]).status.code(), Some(1));
}

#[test]
fn circle_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("circle.csv");
    let run = ccl(&["circle", "--Q", "50", "--delta-exp", "1.5", "--out", path(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let got = std::fs::read_to_string(&out).unwrap();
    let want = include_str!("data/circle_q50.csv");
    assert_eq!(got, want);
}

#[test]
fn coeffs_are_exact_integers() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tau.csv");
    assert!(ccl(&["coeffs", "--weight", "12", "--upto", "10", "--out", path(&out)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let a: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(a, ["1", "-24", "252", "-1472", "4830", "-6048", "-16744", "84480", "-113643", "-115920"]);
}

#[test]
fn reports_are_reproducible_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("pair.json");
    std::fs::write(&cfg, r#"{"x": 1500, "h": 30, "sequence": {"kind": "rademacher", "seed": 11}}"#).unwrap();
    let outs: Vec<String> = (0..2)
        .map(|i| {
            let out = dir.path().join(format!("r{i}.json"));
            let run = ccl(&["correlate", "--kind", "pair", "--config", path(&cfg), "--out", path(&out)]);
            assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
            std::fs::read_to_string(&out).unwrap()
        })
        .collect();
    assert_eq!(outs[0], outs[1]);

    let v: serde_json::Value = serde_json::from_str(&outs[0]).unwrap();
    for key in ["config", "results", "provenance"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["provenance"]["seed"], "11");
    assert_eq!(v["config"]["x"], 1500);
    assert!(v["results"]["bound_ratio"].as_f64().unwrap() < 10.0);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"x": 1500, "h": 30, "colour": "red"}"#).unwrap();
    let out = dir.path().join("r.json");
    let run = ccl(&["correlate", "--kind", "pair", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("colour"));
}

#[test]
fn sieve_rows_depend_only_on_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let args = ["sieve", "--kmax", "16", "--M", "8", "--trials", "4", "--seed", seed, "--out", path(&out)];
        assert!(ccl(&args).status.success());
        std::fs::read_to_string(out).unwrap()
    };
    let a = run("a.csv", "5");
    assert_eq!(a, run("b.csv", "5"));
    assert_ne!(a, run("c.csv", "6"));
    assert_eq!(a.lines().count(), 5);
}

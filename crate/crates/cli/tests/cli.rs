use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosonsim")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SAMPLE: [&str; 16] = [
    "sample", "--photons", "3", "--modes", "9", "--x", "1", "--eta", "1", "--k", "3", "--samples", "5", "--seed", "7",
    "--threads=1",
];

#[test]
fn sample_is_byte_identical_across_runs_and_threads() {
    let a = run(&SAMPLE);
    let b = run(&SAMPLE);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let lines: Vec<String> = stdout(&a).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 5);
    for line in &lines {
        let occ: Vec<usize> = serde_json::from_str(line).unwrap();
        assert_eq!(occ.len(), 9);
        assert_eq!(occ.iter().sum::<usize>(), 3);
    }
    let mut threaded = SAMPLE.to_vec();
    threaded[15] = "--threads=4";
    assert_eq!(run(&threaded).stdout, a.stdout);
}

#[test]
fn sample_manifest_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.jsonl");
    let mut args = SAMPLE.to_vec();
    let out = path.to_str().unwrap();
    args.extend(["--out", out]);
    assert!(run(&args).status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(format!("{out}.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "sample");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["args"]["samples"], 5);
}

#[test]
fn bounds_state_max_x() {
    let out = run(&["bounds", "--photons", "90", "--k", "89", "--epsilon", "0.1", "--mode", "state-max-x"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - 0.974737).abs() <= 1e-5, "{value}");
    assert_eq!(v["manifest"]["subcommand"], "bounds");
}

#[test]
fn figures_fig3_has_one_row_per_k() {
    let out = run(&["figures", "--which", "fig3", "--epsilon", "0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert!(lines.next().unwrap().starts_with("k,matched_k,"));
    let ks: Vec<usize> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ks, (1..=89).collect::<Vec<_>>());
}

#[test]
fn generate_round_trips_through_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.json");
    let p = path.to_str().unwrap();
    assert!(run(&["generate", "--haar", "--modes", "4", "--seed", "3", "--out", p]).status.success());
    let out = run(&["exact", "--photons", "2", "--matrix", p, "--x", "0.5", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let total: f64 = text
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["sample", "--photons", "3", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["sample", "--photons", "4", "--modes", "2", "--samples", "1", "--seed", "1"]).status.code(), Some(1));
    assert_eq!(run(&["bounds", "--photons", "5", "--mode", "min-k", "--epsilon", "1.5"]).status.code(), Some(1));
    assert_eq!(run(&["exact", "--photons", "2", "--matrix", "/nonexistent/u.json", "--seed", "1"]).status.code(), Some(2));
    let failing = run(&["validate", "--check", "tvd", "--photons", "2", "--modes", "3", "--samples", "50", "--tolerance", "0.0001", "--seed", "3"]);
    assert_eq!(failing.status.code(), Some(3));
    let passing = run(&["validate", "--check", "bound-respect", "--photons", "3", "--modes", "4", "--x", "0.6", "--eta", "0.7", "--seed", "2"]);
    assert_eq!(passing.status.code(), Some(0));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn omitted_seed_is_reported() {
    let out = run(&["sample", "--photons", "1", "--modes", "2", "--samples", "1"]);
    assert!(out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    let seed: u64 = err.lines().find_map(|l| l.strip_prefix("seed: ")).unwrap().parse().unwrap();
    assert!(err.contains(&format!("\"seed\":{seed}")));
}

#[test]
fn cost_crossover() {
    let out = run(&["cost", "--crossover", "--x", "0.5", "--eta", "0.5"]);
    assert!(out.status.success());
    let row = stdout(&out).lines().nth(2).unwrap().to_owned();
    let n: usize = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((205..=255).contains(&n));
}

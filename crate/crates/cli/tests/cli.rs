use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regret-transfer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A fresh directory under the system temp dir, removed on drop.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        static NEXT: AtomicUsize = AtomicUsize::new(0);
        let dir = std::env::temp_dir().join(format!(
            "regret-transfer-cli-{tag}-{}-{}",
            std::process::id(),
            NEXT.fetch_add(1, Ordering::Relaxed)
        ));
        let _ = fs::remove_dir_all(&dir);
        fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }

    fn arg(&self) -> &str {
        self.0.to_str().unwrap()
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.join(name);
        fs::write(&p, body).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

fn json_lines(text: &str) -> Vec<serde_json::Value> {
    text.lines().map(|l| serde_json::from_str(l).expect("json line")).collect()
}

#[test]
fn metrics_on_one_file() {
    let dir = Scratch::new("m1");
    let f = dir.write("a.csv", "label,score\n0,0.9\n1,0.8\n0,0.1\n");
    let out = run(&["metrics", f.to_str().unwrap(), "--kind", "auc"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lines = json_lines(&stdout(&out));
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["config"]["kind"], "auc");
    assert_eq!(lines[1]["report"]["value"], 0.5);
    assert_eq!(lines[1]["report"]["regret_abs"], 0.5);
}

#[test]
fn metrics_over_a_directory_with_an_undefined_list() {
    let dir = Scratch::new("m2");
    dir.write("a.csv", "label,score\n1,0.9\n0,0.8\n1,0.1\n");
    dir.write("b.csv", "label,score\n0,0.9\n0,0.8\n");
    dir.write("notes.txt", "ignored");
    let out = run(&["metrics", dir.arg(), "--kind", "ndcg", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let lines = json_lines(&stdout(&out));
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["report"]["metric"], "ndcg@2");
    assert!(lines[2]["error"].as_str().unwrap().contains("positive"));
}

#[test]
fn malformed_row_names_file_and_line() {
    let dir = Scratch::new("m3");
    let f = dir.write("bad.csv", "label,score\n1,0.3\n1,high\n");
    let out = run(&["metrics", f.to_str().unwrap(), "--kind", "acc"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.csv"), "{err}");
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn empty_directory_is_not_an_error() {
    let dir = Scratch::new("m4");
    let out = run(&["metrics", dir.arg(), "--kind", "auc"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_lines(&stdout(&out)).len(), 1);
    assert!(!stderr(&out).is_empty());
}

#[test]
fn unknown_metric_is_an_input_error() {
    let dir = Scratch::new("m5");
    let f = dir.write("a.csv", "label,score\n1,0.3\n");
    let out = run(&["metrics", f.to_str().unwrap(), "--kind", "f1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_reports_the_coefficient() {
    let out = run(&["bounds", "--direction", "auc-acc", "--n-pos", "3", "--n-neg", "5", "--delta", "0.25"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let c = v["bound"]["coefficient"].as_f64().unwrap();
    assert!((c - 15.0 / (8.0 * 0.25)).abs() < 1e-12);
    assert_eq!(v["config"]["delta"], 0.25);
}

#[test]
fn upward_truncation_reports_divergence() {
    let out = run(&[
        "bounds", "--direction", "trunc", "--metric", "precision", "--k1", "1", "--k2", "3", "--labels", "1,0,1,0",
        "--reverse",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["transfer"]["divergent"].is_object());
}

#[test]
fn psi_writes_curve_and_config() {
    let dir = Scratch::new("p1");
    let out = run(&["psi", "--source", "auc", "--target", "ndcg", "--labels", "1,0,1,0", "--out", dir.arg()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert!(csv.starts_with("# config:"));
    assert!(csv.lines().nth(1).unwrap() == "epsilon,psi");
    assert!(dir.path().join("config.json").exists());
    assert!(dir.path().join("psi.json").exists());
}

#[test]
fn psi_refuses_large_instances() {
    let labels = vec!["1"; 5].into_iter().chain(vec!["0"; 6]).collect::<Vec<_>>().join(",");
    let out = run(&["psi", "--source", "auc", "--target", "ndcg", "--labels", &labels]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_capacity_limit() {
    let out = run(&["verify", "--n-max", "12"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_passing_group() {
    let dir = Scratch::new("v1");
    let out = run(&["verify", "--n-max", "5", "--directions", "trunc-reverse,auc-ndcg", "--out", dir.arg()]);
    assert_eq!(out.status.code(), Some(0), "{}{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["all_passed"], true);
    assert_eq!(report["config"]["n_max"], 5);
}

#[test]
fn verify_failing_group_exits_one() {
    let out = run(&["verify", "--n-max", "4", "--directions", "ndcg-acc"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

fn simulate(dir: &Scratch, seed: &str, formats: &str) -> Output {
    run(&[
        "simulate", "--n", "200", "--snapshots", "20", "--seed", seed, "--out", dir.arg(), "--format", formats,
    ])
}

#[test]
fn simulate_writes_one_row_per_snapshot() {
    let dir = Scratch::new("s1");
    let out = simulate(&dir, "7", "csv,json,svg");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("snapshots.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# config:"));
    assert_eq!(lines[1], "loss,alpha,r_acc,r_auc,r_ndcg");
    assert_eq!(lines.len(), 2 + 3 * 20);
    let svg = fs::read_to_string(dir.path().join("snapshots.svg")).unwrap();
    assert!(svg.contains("<svg"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["seed"], 7);
}

#[test]
fn simulate_is_reproducible() {
    let (a, b, c) = (Scratch::new("s2"), Scratch::new("s3"), Scratch::new("s4"));
    for (d, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        assert_eq!(simulate(d, seed, "csv").status.code(), Some(0));
    }
    let read = |d: &Scratch| fs::read_to_string(d.path().join("snapshots.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn simulate_rejects_bad_parameters() {
    let dir = Scratch::new("s5");
    let out = run(&["simulate", "--n", "1", "--out", dir.arg()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["simulate", "--tau", "1.5", "--out", dir.arg()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rates_writes_every_direction() {
    let dir = Scratch::new("r1");
    let out = run(&["rates", "--out", dir.arg()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csvs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(csvs, 8);
    let one = fs::read_to_string(dir.path().join("rates_imbalanced_auc-ndcg.csv")).unwrap();
    assert!(one.starts_with("# config:"));
    assert_eq!(one.lines().count(), 2 + 5);
}

#[test]
fn rates_needs_a_real_grid() {
    let dir = Scratch::new("r2");
    let out = run(&["rates", "--grid", "100", "--out", dir.arg()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = Scratch::new("c1");
    let cfg = dir.write("sim.json", r#"{"n": 50, "snapshots": 4, "seed": 3}"#);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--seed", "5", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let written: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(written["n"], 50);
    assert_eq!(written["seed"], 5);
}

#[test]
fn partial_verify_config_is_accepted() {
    let dir = Scratch::new("c2");
    let cfg = dir.write("verify.json", r#"{"n_max": 4, "groups": ["trunc-reverse"], "bounds": {"delta": 0.1}}"#);
    let out = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

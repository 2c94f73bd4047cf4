use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn load(name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(scenario(name)).unwrap()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chua-sync"))
        .args(args)
        .arg("--config")
        .arg(config)
        .output()
        .unwrap()
}

fn run_json(args: &[&str], config: &Path) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all, config);
    let report = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), report)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn check_example1_is_certified() {
    let (code, r) = run_json(&["check"], &scenario("example1.json"));
    assert_eq!(code, 0);
    let c = &r["certificate"];
    assert_eq!(c["hurwitz"], true);
    assert!((c["spectral_abscissa"].as_f64().unwrap() + 0.0748).abs() < 1e-3);
    assert!((c["min_real_part"].as_f64().unwrap() + 56.0643).abs() < 1e-3);
    assert_eq!(c["dimension"], 38);
}

#[test]
fn check_example2_and_below_threshold() {
    let (code, r) = run_json(&["check"], &scenario("example2.json"));
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "certified");

    let dir = TempDir::new().unwrap();
    let mut cfg = load("example2.json");
    cfg["coupling"]["params"]["gain"] = json!(20.0);
    let (code, r) = run_json(&["check"], &write_config(&dir, "k20.json", &cfg));
    assert_eq!(code, 1);
    assert_eq!(r["certificate"]["hurwitz"], false);
}

#[test]
fn check_without_pivot_uses_best_pivot() {
    let dir = TempDir::new().unwrap();
    let mut cfg = load("example1.json");
    cfg["topology"] = json!({ "nodes": 6, "kind": "star", "center": 2 });
    cfg.as_object_mut().unwrap().remove("pivot");
    let (_, best) = run_json(&["check"], &write_config(&dir, "star.json", &cfg));

    cfg["scan"] = json!({ "parameter": "pivot" });
    let path = write_config(&dir, "star_scan.json", &cfg);
    let out = dir.path().join("out");
    let (code, _) = run_json(&["scan", "--out", out.to_str().unwrap()], &path);
    assert_eq!(code, 0);
    let rows = read_csv(&out.join("scan.csv"));
    assert_eq!(
        rows[0],
        ["pivot", "pivot", "k1", "k2", "spectral_abscissa", "hurwitz"]
    );
    assert_eq!(rows.len(), 7);
    let min = rows[1..]
        .iter()
        .map(|r| r[4].parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(
        best["certificate"]["spectral_abscissa"].as_f64().unwrap(),
        min
    );
}

#[test]
fn threshold_example2_closed_form_and_scan() {
    let out = run(&["threshold"], &scenario("example2.json"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("two-node threshold: 21.282"), "{text}");

    let (_, r) = run_json(&["threshold"], &scenario("example2.json"));
    let t = &r["thresholds"];
    let closed = t["two_node"].as_f64().unwrap();
    let scanned = &t["scanned"];
    let res = scanned["resolution"].as_f64().unwrap();
    assert!((scanned["gain"].as_f64().unwrap() - closed).abs() <= res);
    assert_eq!(scanned["verified_at_gain"], true);
    assert_eq!(scanned["verified_below"], true);
}

#[test]
fn threshold_single_node_is_input_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = load("example2.json");
    cfg["topology"] = json!({ "nodes": 1, "kind": "complete" });
    cfg.as_object_mut().unwrap().remove("pivot");
    let (code, r) = run_json(&["threshold"], &write_config(&dir, "one.json", &cfg));
    assert_eq!(code, 2);
    assert_eq!(r["verdict"], "error");
}

#[test]
fn verify_coupling_examples() {
    let (code, _) = run_json(&["verify-coupling"], &scenario("example1.json"));
    assert_eq!(code, 0);

    let dir = TempDir::new().unwrap();
    let mut cfg = load("example1.json");
    cfg["coupling"]["k1"] = json!(3.5);
    let (code, r) = run_json(
        &["verify-coupling"],
        &write_config(&dir, "claim.json", &cfg),
    );
    assert_eq!(code, 1);
    let e = r["coupling"]["violating_input"].as_f64().unwrap();
    // 3e + atan(e) < 3.5e once atan(e) < e / 2
    assert!(e.abs() > 2.0, "{e}");

    cfg["coupling"] = json!({ "name": "linear", "params": { "gain": 2.0 }, "k1": 2.0, "k2": 2.0 });
    let (code, _) = run_json(&["verify-coupling"], &write_config(&dir, "lin.json", &cfg));
    assert_eq!(code, 0);
}

#[test]
fn scan_k_brackets_threshold() {
    let dir = TempDir::new().unwrap();
    let (code, r) = run_json(
        &["scan", "--out", dir.path().to_str().unwrap()],
        &scenario("example2.json"),
    );
    assert_eq!(code, 0);
    let rows = read_csv(&dir.path().join("scan.csv"));
    assert_eq!(rows.len(), 22);
    let verdicts: Vec<(f64, bool)> = rows[1..]
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[5] == "true"))
        .collect();
    for w in verdicts.windows(2) {
        let flips = w[0].1 != w[1].1;
        assert_eq!(flips, w[0].0 < 21.282 && w[1].0 > 21.282, "{w:?}");
    }
    assert_eq!(r["scan"]["first_certified"], 21.5);
    for f in r["files"].as_array().unwrap() {
        assert!(Path::new(f.as_str().unwrap()).exists());
    }
}

#[test]
fn scan_single_sample() {
    let dir = TempDir::new().unwrap();
    let mut cfg = load("example2.json");
    cfg["scan"] = json!({ "parameter": "k", "from": 21.3, "to": 21.3 });
    let path = write_config(&dir, "one.json", &cfg);
    let (code, _) = run_json(&["scan", "--out", dir.path().to_str().unwrap()], &path);
    assert_eq!(code, 0);
    assert_eq!(read_csv(&dir.path().join("scan.csv")).len(), 2);
}

#[test]
fn simulate_writes_files_and_is_reproducible() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = |d: &TempDir| {
        vec![
            "simulate".to_string(),
            "--out".into(),
            d.path().display().to_string(),
            "--t-end".into(),
            "2".into(),
            "--svg".into(),
        ]
    };
    for d in [&a, &b] {
        let args = args(d);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (code, r) = run_json(&args, &scenario("example2.json"));
        assert_eq!(code, 0);
        assert_eq!(r["simulation"]["t_end"], 2.0);
        let files = r["files"].as_array().unwrap();
        assert_eq!(files.len(), 4);
        for f in files {
            assert!(Path::new(f.as_str().unwrap()).exists());
        }
    }
    for name in ["trajectory.csv", "errors.csv", "errors.svg"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let traj = read_csv(&a.path().join("trajectory.csv"));
    assert_eq!(traj[0], ["t", "node", "x1", "x2", "x3"]);
    // 201 samples of 2 nodes
    assert_eq!(traj.len(), 1 + 2 * 201);
    assert_eq!(traj[1][2].len(), "-1.9502867267030388e-1".len());
    let errors = read_csv(&a.path().join("errors.csv"));
    assert_eq!(errors[0], ["t", "node", "norm"]);
    assert_eq!(errors.len(), 1 + 201);
}

#[test]
fn simulate_seed_override_changes_initial_state() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for (d, seed) in [(&a, "1"), (&b, "2")] {
        let out = run(
            &[
                "simulate",
                "--out",
                d.path().to_str().unwrap(),
                "--t-end",
                "0.01",
                "--seed",
                seed,
            ],
            &scenario("example2.json"),
        );
        assert_eq!(out.status.code(), Some(0));
    }
    assert_ne!(
        fs::read(a.path().join("trajectory.csv")).unwrap(),
        fs::read(b.path().join("trajectory.csv")).unwrap()
    );
}

#[test]
fn simulate_example1_synchronizes() {
    let dir = TempDir::new().unwrap();
    let (code, r) = run_json(
        &["simulate", "--out", dir.path().to_str().unwrap()],
        &scenario("example1.json"),
    );
    assert_eq!(code, 0);
    let sim = &r["simulation"];
    assert!(sim["final_max_error"].as_f64().unwrap() < 1e-6);
    assert!(sim["fitted_decay_rate"].as_f64().unwrap() < -0.05);
    let errors = read_csv(&dir.path().join("errors.csv"));
    let last: Vec<&Vec<String>> = errors.iter().rev().take(19).collect();
    assert!(last
        .iter()
        .all(|row| row[0].parse::<f64>().unwrap() == 50.0));
    assert!(last.iter().all(|row| row[2].parse::<f64>().unwrap() < 1e-6));
}

#[test]
fn simulate_identical_initial_conditions() {
    let dir = TempDir::new().unwrap();
    let mut cfg = load("example2.json");
    cfg["sim"]["initial"] = json!([[0.1, 0.2, -0.3], [0.1, 0.2, -0.3]]);
    let path = write_config(&dir, "same.json", &cfg);
    let (code, r) = run_json(
        &[
            "simulate",
            "--out",
            dir.path().to_str().unwrap(),
            "--t-end",
            "5",
        ],
        &path,
    );
    assert_eq!(code, 0);
    assert_eq!(r["simulation"]["final_max_error"], 0.0);
    assert!(r["simulation"]["fitted_decay_rate"].is_null());
    let errors = read_csv(&dir.path().join("errors.csv"));
    assert!(errors[1..]
        .iter()
        .all(|row| row[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn simulate_divergence_is_numerical_failure() {
    let dir = TempDir::new().unwrap();
    let (code, r) = run_json(
        &[
            "simulate",
            "--out",
            dir.path().to_str().unwrap(),
            "--dt",
            "0.5",
            "--t-end",
            "100",
        ],
        &scenario("example1.json"),
    );
    assert_eq!(code, 3);
    assert!(r["error"].as_str().unwrap().contains("diverged"));
}

#[test]
fn input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["check"], &missing).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["check"], &bad).status.code(), Some(2));

    let mut cfg = load("example2.json");
    cfg["params"]["b"] = json!(-2.0);
    assert_eq!(
        run(&["check"], &write_config(&dir, "slopes.json", &cfg))
            .status
            .code(),
        Some(2)
    );

    let mut cfg = load("example2.json");
    cfg["coupling"]["name"] = json!("cubic");
    assert_eq!(
        run(&["check"], &write_config(&dir, "cubic.json", &cfg))
            .status
            .code(),
        Some(2)
    );

    let mut cfg = load("example2.json");
    cfg["pivot"] = json!(7);
    assert_eq!(
        run(&["check"], &write_config(&dir, "pivot.json", &cfg))
            .status
            .code(),
        Some(2)
    );

    let mut cfg = load("example2.json");
    cfg.as_object_mut().unwrap().remove("scan");
    let out = run(
        &["scan", "--out", dir.path().to_str().unwrap()],
        &write_config(&dir, "noscan.json", &cfg),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn asymmetric_topology_warns() {
    let dir = TempDir::new().unwrap();
    let mut cfg = load("example2.json");
    cfg["topology"] = json!({ "matrix": [0, 1, 0, 0] });
    let out = run(&["check"], &write_config(&dir, "dir.json", &cfg));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .contains("warning: topology is not symmetric"));
    assert!(matches!(out.status.code(), Some(0 | 1)));
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn levytail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levytail"))
        .args(args)
        .env_remove("LEVYTAIL_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = levytail(args);
    assert!(
        out.status.success(),
        "levytail {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_values(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, col: usize) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().to_string())
        .collect()
}

fn simulate(dir: &Path, alpha0: &str, n: &str, seed: &str) -> PathBuf {
    ok(&[
        "simulate",
        "--dist",
        "powerlaw",
        "--alpha0",
        alpha0,
        "--rho0",
        "0.5",
        "--n",
        n,
        "--seed",
        seed,
        "--out-dir",
        s(dir),
    ]);
    dir.join("increments.csv")
}

#[test]
fn simulate_writes_one_value_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "1.6", "10000", "7");
    let values = read_values(&file);
    assert_eq!(values.len(), 10_000);
    assert!(values.iter().all(|&x| x >= 0.5));
    let manifest = read_json(&dir.path().join("manifest_simulate.json"));
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["outputs"][0]["file"], "increments.csv");
}

#[test]
fn simulate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    simulate(a.path(), "1.6", "10000", "7");
    simulate(b.path(), "1.6", "10000", "7");
    let ma = read_json(&a.path().join("manifest_simulate.json"));
    let mb = read_json(&b.path().join("manifest_simulate.json"));
    assert_eq!(ma["outputs"], mb["outputs"]);
    assert_eq!(
        std::fs::read(a.path().join("increments.csv")).unwrap(),
        std::fs::read(b.path().join("increments.csv")).unwrap()
    );
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    for args in [
        vec!["simulate", "--alpha0", "-1", "--n", "10", "--out-dir", d],
        vec!["simulate", "--n", "10", "--out-dir", d],
        vec![
            "simulate",
            "--dist",
            "gaussian",
            "--alpha0",
            "1.5",
            "--n",
            "10",
            "--out-dir",
            d,
        ],
        vec![
            "simulate",
            "--alpha0",
            "1.5",
            "--sigma",
            "1",
            "--n",
            "10",
            "--out-dir",
            d,
        ],
        vec![
            "curve",
            "--input",
            "x.csv",
            "--rho",
            "1",
            "--alpha-grid",
            "2:1:0.1",
        ],
        vec!["frobnicate"],
    ] {
        let out = levytail(&args);
        assert_eq!(
            code(&out),
            1,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    assert_eq!(code(&levytail(&["--help"])), 0);
}

#[test]
fn curve_scales_with_data_cutoff_and_level() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "1.6", "10000", "3");
    let scaled = dir.path().join("scaled.csv");
    let doubled: String = read_values(&file)
        .iter()
        .map(|x| format!("{:e}\n", 2.0 * x))
        .collect();
    std::fs::write(&scaled, doubled).unwrap();
    let (base, big) = (dir.path().join("base"), dir.path().join("big"));
    let common = [
        "curve",
        "--increments-given",
        "--no-normalize",
        "--alpha-grid",
        "0.8:3:0.01",
    ];
    let mut a = common.to_vec();
    a.extend([
        "--input",
        s(&file),
        "--rho",
        "0.5",
        "--s",
        "1",
        "--out-dir",
        s(&base),
    ]);
    ok(&a);
    let mut b = common.to_vec();
    b.extend([
        "--input",
        s(&scaled),
        "--rho",
        "1.0",
        "--s",
        "4",
        "--out-dir",
        s(&big),
    ]);
    ok(&b);
    let wa: Vec<f64> = csv_column(&base.join("curve_pos.csv"), 1)
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    let wb: Vec<f64> = csv_column(&big.join("curve_pos.csv"), 1)
        .iter()
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(wa.len(), 221);
    for (x, y) in wa.iter().zip(&wb) {
        assert_eq!(*y, 4.0 * x);
    }
    let sa = read_json(&base.join("curve_pos.json"));
    let sb = read_json(&big.join("curve_pos.json"));
    assert_eq!(sa["alpha_hat"], sb["alpha_hat"]);
    assert_eq!(sa["n_points"], 10_000);
    assert!((sa["alpha_hat"].as_f64().unwrap() - 1.6).abs() < 0.1);
}

#[test]
fn curve_on_headered_series_with_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("series.csv");
    let mut text = String::from("time,level\n");
    let mut level = 0.0;
    for k in 0..400 {
        level += ((k * 37 % 101) as f64 - 50.0) / 10.0;
        if k % 50 == 7 {
            text.push_str(&format!("{k},\n"));
        } else {
            text.push_str(&format!("{k},{level}\n"));
        }
    }
    std::fs::write(&file, text).unwrap();
    let out = ok(&[
        "curve",
        "--input",
        s(&file),
        "--column",
        "level",
        "--rho",
        "0.5",
        "--side",
        "both",
        "--out-dir",
        s(dir.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dropped 8 row(s)"));
    for tag in ["pos", "neg"] {
        let summary = read_json(&dir.path().join(format!("curve_{tag}.json")));
        assert_eq!(summary["normalized"], true);
        assert!(summary["iqr"].as_f64().unwrap() > 0.0);
        assert_eq!(summary["n_increments"], 391);
        let header = std::fs::read_to_string(dir.path().join(format!("curve_{tag}.csv"))).unwrap();
        assert!(header.starts_with("alpha,w_tilde\n"));
    }
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1\n2\nthree\n4\n").unwrap();
    let out = levytail(&[
        "curve",
        "--input",
        s(&bad),
        "--rho",
        "0.5",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
    let missing = dir.path().join("absent.csv");
    let out = levytail(&["sweep", "--input", s(&missing), "--out-dir", s(dir.path())]);
    assert_eq!(code(&out), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn empty_exceedances_are_numeric_failures_for_curve() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "2.0", "500", "1");
    let out_dir = dir.path().join("out");
    let out = levytail(&[
        "curve",
        "--input",
        s(&file),
        "--increments-given",
        "--no-normalize",
        "--rho",
        "1e9",
        "--out-dir",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 3);
    assert!(!out_dir.join("manifest_curve.json").exists());
}

#[test]
fn sweep_recovers_cutoff_and_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "1.6", "100000", "11");
    let out = ok(&[
        "sweep",
        "--input",
        s(&file),
        "--increments-given",
        "--no-normalize",
        "--rho-grid",
        "0.2:0.8:0.05",
        "--alpha-grid",
        "0.5:3:0.01",
        "--out-dir",
        s(dir.path()),
    ]);
    assert!(
        out.stderr.is_empty(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let best = read_json(&dir.path().join("best_pos.json"));
    assert!(
        (best["rho"].as_f64().unwrap() - 0.5).abs() < 0.051,
        "{best}"
    );
    assert!(
        (best["alpha"].as_f64().unwrap() - 1.6).abs() < 0.05,
        "{best}"
    );
    let mb = &best["model_bound"];
    assert!(mb["bound"].as_f64().unwrap() > 0.0);
    assert_eq!(best["flagged_rows"], 0);
    let locus = std::fs::read_to_string(dir.path().join("locus_pos.csv")).unwrap();
    assert!(locus.starts_with("rho,alpha_hat,min_value,n_points,reliable\n"));
    assert_eq!(locus.lines().count(), 14);
    let long = csv_column(&dir.path().join("sweep_pos.csv"), 1);
    assert_eq!(long.len(), 13 * 251);
}

#[test]
fn sweep_flags_sparse_cutoffs() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "1.6", "2000", "4");
    let out = ok(&[
        "sweep",
        "--input",
        s(&file),
        "--increments-given",
        "--no-normalize",
        "--rho-grid",
        "1:1e4:1000",
        "--alpha-grid",
        "0.5:3:0.05",
        "--out-dir",
        s(dir.path()),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let reliable = csv_column(&dir.path().join("locus_pos.csv"), 4);
    let alpha = csv_column(&dir.path().join("locus_pos.csv"), 1);
    assert_eq!(reliable[0], "true");
    assert!(reliable[1..].iter().all(|r| r == "false"));
    assert!(alpha.last().unwrap().is_empty());
}

#[test]
fn convergence_tables_layout() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "convergence",
        "--alpha0",
        "1.4,3",
        "--n-list",
        "100,1000",
        "--m",
        "4",
        "--out-dir",
        s(dir.path()),
    ]);
    let t1 = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    let mut lines = t1.lines();
    assert_eq!(
        lines.next().unwrap(),
        "alpha0,statistic,alpha_hat_n100,w_star_n100,alpha_hat_n1000,w_star_n1000"
    );
    assert_eq!(t1.lines().count(), 5);
    let t2 = std::fs::read_to_string(dir.path().join("table2.csv")).unwrap();
    assert!(t2.starts_with("alpha0,rate,Q_2_3\n"));
    let rate: f64 = t2
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((rate - 10f64.powf(-1.4 / 3.4)).abs() < 1e-15);
    let t3 = std::fs::read_to_string(dir.path().join("table3.csv")).unwrap();
    assert!(t3.starts_with("alpha0,rate,R_2_3\n"));
    assert_eq!(
        csv_column(&dir.path().join("replications.csv"), 0).len(),
        2 * 2 * 4
    );
}

#[test]
fn bound_reports_constants() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "bound",
        "--jump1",
        "stable:1.4",
        "--jump2",
        "stable:1.8",
        "--drift1",
        "0.5",
        "--x1",
        "-0.25",
        "--lambda",
        "2",
        "--coupling",
        "--out-dir",
        s(dir.path()),
    ]);
    let b = read_json(&dir.path().join("bound.json"));
    let (q1, q2) = (b["Q1"].as_f64().unwrap(), b["Q2"].as_f64().unwrap());
    let c0 = b["constants"]["c0"].as_f64().unwrap();
    assert_eq!(c0, 0.5f64.atan());
    let total = q1 * (1.0 / c0).exp() + q2;
    assert!((b["bound"].as_f64().unwrap() - total).abs() <= 1e-14 * total);
    assert!(b["coupling_distance"]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(
        code(&levytail(&[
            "bound",
            "--jump1",
            "stable:2.5",
            "--jump2",
            "stable:1"
        ])),
        1
    );
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "1.8", "3000", "5");
    let run = dir.path().join("run");
    ok(&[
        "sweep",
        "--input",
        s(&file),
        "--increments-given",
        "--side",
        "pos",
        "--alpha-grid",
        "1:3:0.05",
        "--out-dir",
        s(&run),
    ]);
    let manifest = run.join("manifest_sweep.json");
    let replayed = dir.path().join("replayed");
    let out = ok(&[
        "replay",
        "--manifest",
        s(&manifest),
        "--out-dir",
        s(&replayed),
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("bit-identically"));
    for name in ["sweep_pos.csv", "locus_pos.csv", "best_pos.json"] {
        assert_eq!(
            std::fs::read(run.join(name)).unwrap(),
            std::fs::read(replayed.join(name)).unwrap()
        );
    }

    let mut tampered = read_json(&manifest);
    tampered["outputs"][0]["sha256"] = Value::String("00".repeat(32));
    let bad = dir.path().join("tampered.json");
    std::fs::write(&bad, serde_json::to_string(&tampered).unwrap()).unwrap();
    assert_eq!(code(&levytail(&["replay", "--manifest", s(&bad)])), 3);

    let mut values = std::fs::read_to_string(&file).unwrap();
    values.push_str("1.0\n");
    std::fs::write(&file, values).unwrap();
    assert_eq!(code(&levytail(&["replay", "--manifest", s(&manifest)])), 2);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let file = simulate(dir.path(), "1.4", "5000", "8");
    let (one, four) = (dir.path().join("one"), dir.path().join("four"));
    ok(&[
        "--threads",
        "1",
        "curve",
        "--input",
        s(&file),
        "--rho",
        "0.5",
        "--out-dir",
        s(&one),
    ]);
    ok(&[
        "--threads",
        "4",
        "curve",
        "--input",
        s(&file),
        "--rho",
        "0.5",
        "--out-dir",
        s(&four),
    ]);
    assert_eq!(
        std::fs::read(one.join("curve_pos.csv")).unwrap(),
        std::fs::read(four.join("curve_pos.csv")).unwrap()
    );
    let out = Command::new(env!("CARGO_BIN_EXE_levytail"))
        .args([
            "curve",
            "--input",
            s(&file),
            "--rho",
            "0.5",
            "--out-dir",
            s(&one),
        ])
        .env("LEVYTAIL_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 1);
}

#[test]
fn replay_of_simulation_and_bound() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--dist",
        "gaussian",
        "--n",
        "1000",
        "--seed",
        "3",
        "--intensity",
        "2",
        "--out-dir",
        s(dir.path()),
    ]);
    ok(&[
        "bound",
        "--jump1",
        "powerlaw:1.6:0.5:2",
        "--jump2",
        "bounded:1.2:two",
        "--diffusion2",
        "0.3",
        "--out-dir",
        s(dir.path()),
    ]);
    for m in ["manifest_simulate.json", "manifest_bound.json"] {
        let manifest = read_json(&dir.path().join(m));
        assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
        ok(&["replay", "--manifest", s(&dir.path().join(m))]);
    }
    let sim = read_json(&dir.path().join("manifest_simulate.json"));
    assert_eq!(sim["config"]["simulate"]["sigma"].as_f64(), Some(1.0));
    assert_eq!(
        std::fs::read(dir.path().join("path.csv")).unwrap(),
        std::fs::read(dir.path().join("replay/path.csv")).unwrap()
    );
}

/// Two-sided stand-in: a uniform body on (-1.7, 3.2) with Pareto tails of
/// different indices beyond each end.
fn two_sided_series(n: usize) -> String {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut uniform = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    };
    let mut out = String::new();
    for _ in 0..n {
        let (pick, u) = (uniform(), uniform());
        let x = if pick < 0.2 {
            -1.7 * u.powf(-1.0 / 3.15)
        } else if pick < 0.4 {
            3.2 * u.powf(-1.0 / 3.2)
        } else {
            -1.7 + 4.9 * u
        };
        out.push_str(&format!("{x:e}\n"));
    }
    out
}

#[test]
fn analyze_finds_both_tails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("increments.csv");
    std::fs::write(&file, two_sided_series(50_000)).unwrap();
    ok(&[
        "analyze",
        "--input",
        s(&file),
        "--increments-given",
        "--no-normalize",
        "--rho-grid",
        "0.5:6:0.25",
        "--alpha-grid",
        "1:6:0.01",
        "--out-dir",
        s(dir.path()),
    ]);
    let a = read_json(&dir.path().join("analysis.json"));
    let sides = a["sides"].as_array().unwrap();
    assert_eq!(sides.len(), 2);
    for (side, rho0, alpha0) in [(&sides[0], 3.2, 3.2), (&sides[1], 1.7, 3.15)] {
        let rho = side["rho"].as_f64().unwrap();
        let alpha = side["alpha"].as_f64().unwrap();
        assert!(rho >= rho0 - 0.25 && rho <= 2.0 * rho0, "{side}");
        assert!((alpha - alpha0).abs() < 0.25, "{side}");
        assert_eq!(side["rho_data_units"], side["rho"]);
    }
    assert!(dir.path().join("locus_neg.csv").exists());
    assert!(dir.path().join("manifest_analyze.json").exists());
}

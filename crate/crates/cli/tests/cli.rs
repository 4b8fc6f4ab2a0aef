use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_alpha2-dynamo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

fn parse_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sweep_is_deterministic_across_job_counts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let common = ["sweep", "--l", "0,1", "--x0", "0:2:0.25", "--L", "60", "--n", "3000"];
    let oa = bin().args(common).args(["--out", a.path().to_str().unwrap(), "--jobs", "1"]).output().unwrap();
    let ob = bin().args(common).args(["--out", b.path().to_str().unwrap(), "--jobs", "3"]).output().unwrap();
    assert!(oa.status.success() && ob.status.success());
    let (ca, cb) = (fs::read(a.path().join("sweep.csv")).unwrap(), fs::read(b.path().join("sweep.csv")).unwrap());
    assert_eq!(ca, cb);
    assert!(!ca.contains(&b'\r'));
}

#[test]
fn sweep_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--l", "0,1", "--x0", "0:1.2:0.1", "--L", "60", "--n", "3000", "--svg", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = read(dir.path(), "sweep.csv");
    assert!(csv.starts_with("l,x0,lambda,epsilon,branch,localized,residual\n"));
    assert!(!csv.to_lowercase().contains("nan") && !csv.contains("inf"));
    let rows = parse_rows(&csv);
    assert_eq!(rows.len(), 2 * 13);
    for r in &rows {
        assert_eq!(r.len(), 7);
        if r[2].is_empty() {
            assert_eq!(&r[3..], ["", "", "false", ""]);
        } else {
            let (lam, eps): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
            assert!((lam - (0.5 - eps * eps)).abs() < 1e-10);
            assert!(lam > 0.0);
            assert_eq!(r[4], if eps >= 0.0 { "plus" } else { "minus" });
            assert_eq!(r[5], "true");
            assert!(r[2].contains('e'));
        }
    }
    // l = 1 has no bound state near the origin.
    assert!(rows[13][2].is_empty());
    for name in ["sweep_lambda.svg", "sweep_epsilon.svg"] {
        let svg = read(dir.path(), name);
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }
}

#[test]
fn sweep_crosses_zero_at_jordan_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["sweep", "--l", "0", "--x0", "0:4:0.05", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let pts: Vec<(f64, f64)> = parse_rows(&read(dir.path(), "sweep.csv"))
        .iter()
        .filter(|r| !r[3].is_empty())
        .map(|r| (r[1].parse().unwrap(), r[3].parse().unwrap()))
        .collect();
    let crossings: Vec<f64> = pts
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .map(|w| w[0].0 - w[0].1 * (w[1].0 - w[0].0) / (w[1].1 - w[0].1))
        .collect();
    assert_eq!(crossings.len(), 1);
    assert!((crossings[0] - std::f64::consts::FRAC_1_SQRT_2.atanh()).abs() < 1e-2);
}

#[test]
fn reduced_reproduces_level_formula() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["reduced", "--l", "0", "--x0", "0:3:0.05", "--svg", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = read(dir.path(), "reduced.csv");
    assert!(csv.starts_with("l,x0,lambda\n"));
    let rows = parse_rows(&csv);
    assert_eq!(rows.len(), 61);
    assert!(rows[0][2].is_empty());
    for r in &rows[1..] {
        let (x0, lam): (f64, f64) = (r[1].parse().unwrap(), r[2].parse().unwrap());
        assert!((lam - x0.tanh().powi(2)).abs() < 1e-6, "{x0}: {lam}");
    }
    assert!(dir.path().join("reduced_lambda.svg").exists());
}

#[test]
fn perturb_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["perturb", "--delta", "-0.05,0,0.05", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = read(dir.path(), "perturb.csv");
    assert!(csv.starts_with("delta,epsilon_pencil,epsilon_linear,deviation\n"));
    let rows = parse_rows(&csv);
    assert_eq!(rows.len(), 3);
    let dev: f64 = rows[0][3].parse().unwrap();
    assert!(dev.abs() < 5e-4);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("solvability ratio -0.5"));
}

#[test]
fn dirac_check_flags_poles() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["dirac-check", "--x0", "0.5:1.5:0.5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_rows(&read(dir.path(), "dirac.csv"));
    let regular: Vec<&str> = rows.iter().map(|r| r[3].as_str()).collect();
    assert_eq!(regular, ["true", "false", "false"]);
    assert!(rows[0][4].parse::<f64>().unwrap() < 1e-6);
    assert!(rows[1][4].is_empty());
}

#[test]
fn solve_reports_audit() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve", "--l", "1", "--x0", "1.5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("full_residual="));
    assert_eq!(parse_rows(&read(dir.path(), "solve.csv")).len(), 1);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["sweep", "--n", "50"],
        vec!["sweep", "--L", "5"],
        vec!["sweep", "--x0", "0:4:0"],
        vec!["sweep", "--l", "a"],
        vec!["frobnicate"],
        vec!["sweep", "--jobs", "0"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# coarse grid\nL = 60\nn = 3000\nx0 = 0:1:0.5\nl = 2\n").unwrap();
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--l",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = parse_rows(&read(dir.path(), "sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "0"));

    fs::write(&cfg, "n = 10\n").unwrap();
    let out = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_fails_on_coarse_grid() {
    let out = run(&["verify", "--l", "0,1", "--x0", "0:2:0.5", "--L", "30", "--n", "300"]);
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL"));
}

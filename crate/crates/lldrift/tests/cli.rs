use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_lldrift");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn lldrift")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SIMULATE: &str = r#"
seed = 5
[model]
name = "ou_linear"
params = { lambda = 1.0, sigma = 1.0 }
[noise]
alpha = 1.5
[simulate]
n = 10
delta = 0.01
burn_in = 100
"#;

#[test]
fn simulate_writes_n_plus_one_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMULATE);
    let out = dir.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("path.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "i,t,x");
    assert_eq!(lines.len() - 1, 11);
    assert!(stdout(&o).contains("jumps"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMULATE);
    let read = |sub: &str| {
        let out = dir.path().join(sub);
        let o = run(&[
            "simulate",
            "--config",
            &cfg,
            "--set",
            "simulate.n=500",
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out.join("path.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn seed_flag_changes_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMULATE);
    let read = |seed: &str| {
        let out = dir.path().join(seed);
        let o = run(&[
            "simulate",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(out.join("path.csv")).unwrap()
    };
    assert_ne!(read("1"), read("2"));
}

#[test]
fn missing_model_name_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SIMULATE.replace("name = \"ou_linear\"\n", ""));
    let o = run(&["simulate", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.name"), "{}", stderr(&o));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[noise]\nalpha = = 1.5\n");
    let o = run(&["simulate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SIMULATE}\n[estimate]\nbandwidth = 0.3\n"));
    let o = run(&["estimate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bandwidth"), "{}", stderr(&o));
}

#[test]
fn bad_override_is_a_usage_error() {
    let o = run(&["simulate", "--set", "noise.alpha"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("KEY=VALUE"));
}

#[test]
fn schedule_report_prints_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[noise]
alpha = 1.5
[experiment]
kind = "schedule"
kappa = 2.0
schedules = [{ n = 100000, delta = 0.01, h = 0.3 }, { n = 1000000, delta = 0.01, h = 3.0 }]
"#,
    );
    let out = dir.path().join("out");
    let o = run(&["experiment", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("rate*h^2"), "{s}");
    assert!(s.contains("0.6025"), "{s}");
    assert!(s.contains("both") && s.contains("neither"), "{s}");
    assert!(s.contains("scheme (ii) flag"), "{s}");
    assert!(out.join("manifest.json").exists());
}

fn estimate_config(grid: &str, alpha: f64, n: usize, h: f64) -> String {
    format!(
        r#"
seed = 9
[model]
name = "ou_linear"
params = {{ lambda = 1.0, sigma = 1.0 }}
[noise]
alpha = {alpha}
[simulate]
n = {n}
delta = 0.01
burn_in = 1000
[estimate]
grid = {grid}
h = {h}
"#
    )
}

#[test]
fn estimate_writes_one_row_per_method_and_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &estimate_config("[-0.5, 0.0, 100.0]", 1.5, 20_000, 0.3));
    let out = dir.path().join("out");
    let o = run(&["estimate", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("drift_curve.csv")).unwrap();
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["x", "estimate", "method", "h", "degenerate", "denominator"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for method in ["local_linear", "nadaraya_watson"] {
        let mine: Vec<_> = rows.iter().filter(|r| &r[2] == method).collect();
        assert_eq!(mine.len(), 3, "{method}");
        // No observation within h of x = 100.
        assert_eq!(&mine[2][4], "true");
        assert_eq!(&mine[2][1], "");
        assert_eq!(&mine[0][4], "false");
        assert!(mine[0][1].parse::<f64>().unwrap().is_finite());
    }
}

#[test]
fn estimate_recovers_the_linear_drift_slope() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &estimate_config("[-1.0, -0.5, 0.0, 0.5, 1.0]", 1.8, 1_000_000, 1.0),
    );
    let out = dir.path().join("out");
    let o = run(&[
        "estimate",
        "--config",
        &cfg,
        "--set",
        "estimate.methods=[\"local_linear\"]",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_path(out.join("drift_curve.csv")).unwrap();
    let pts: Vec<(f64, f64)> = r
        .records()
        .map(|row| {
            let row = row.unwrap();
            (row[0].parse().unwrap(), row[1].parse().unwrap())
        })
        .collect();
    assert_eq!(pts.len(), 5);
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / 5.0;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / 5.0;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((slope + 1.0).abs() <= 0.1, "slope {slope}");
}

#[test]
fn estimate_reads_a_path_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIMULATE);
    let sim = dir.path().join("sim");
    let o = run(&[
        "simulate",
        "--config",
        &cfg,
        "--set",
        "simulate.n=2000",
        "--out-dir",
        sim.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let path_file = sim.join("path.csv").display().to_string();
    let est = dir.path().join("est");
    let o = run(&[
        "estimate",
        "--config",
        &cfg,
        "--set",
        &format!("estimate.path_file=\"{path_file}\""),
        "--set",
        "estimate.grid=[0.0]",
        "--set",
        "estimate.h=0.5",
        "--out-dir",
        est.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("n = 2000"), "{}", stdout(&o));
}

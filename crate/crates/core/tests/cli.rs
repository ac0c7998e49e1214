use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn okbim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_okbim")).args(args).output().unwrap()
}

const TWO: &str = r#"
name = "pair"
r_inf = 4.0
sigma = 0.47
n = 32
dt = 1e-2
t_end = 0.1
output_every = 3

[[domain]]
kind = "ellipse"
center = [1.8, 0.0]
a = 1.2
b = 0.8

[[domain]]
kind = "perturbed_circle"
center = [-1.8, 0.0]
radius = 1.0
delta = 0.02
mode = 3
"#;

fn write_scenario(dir: &Path, text: &str) -> String {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_series_snapshots_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), TWO);
    let out = tmp.path().join("out");
    let o = okbim(&["run", "--scenario", &scenario, "--out", out.to_str().unwrap(), "-q"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("stop: time"));

    let series = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,J,w_inf,max_abs_V,s_alpha_1,s_alpha_2,area_1,area_2"
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10 / 3 + 1);
    assert!(rows.iter().all(|r| r.len() == 8));
    assert_eq!(rows[0][0], 0.0);
    assert!((rows[3][0] - 0.09).abs() < 1e-12);

    let mut snaps: Vec<_> = fs::read_dir(out.join("snapshots"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    snaps.sort();
    assert_eq!(snaps, ["t_00000.txt", "t_00001.txt", "t_00002.txt", "t_00003.txt"]);
    let snap = fs::read_to_string(out.join("snapshots/t_00000.txt")).unwrap();
    let mut blocks = snap.split("\n\n");
    assert_eq!(blocks.next().unwrap(), "t=0 M=2");
    let curves: Vec<Vec<&str>> = blocks.map(|b| b.lines().collect()).collect();
    assert_eq!(curves.len(), 2);
    for c in &curves {
        assert_eq!(c.len(), 32);
        assert!(c.iter().all(|l| l.split(' ').filter_map(|v| v.parse::<f64>().ok()).count() == 2));
    }

    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    for key in ["stop_reason: time", "t_c:", "wall_time_s:", "gmres_mean_iterations:"] {
        assert!(report.contains(key), "{key} missing from\n{report}");
    }
}

#[test]
fn overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), TWO);
    let out = tmp.path().join("o");
    let o = okbim(&[
        "run", "--scenario", &scenario, "--out", out.to_str().unwrap(), "--n", "64", "--t-end", "0.02", "-q",
    ]);
    assert!(o.status.success());
    let snap = fs::read_to_string(out.join("snapshots/t_00000.txt")).unwrap();
    assert_eq!(snap.split("\n\n").nth(1).unwrap().lines().count(), 64);
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("steps: 2"), "{report}");
}

#[test]
fn sigma_subcommand() {
    let o = okbim(&["sigma"]);
    assert!(o.status.success());
    let v: f64 = String::from_utf8_lossy(&o.stdout).trim().parse().unwrap();
    assert!((v - 2f64.sqrt() / 3.0).abs() < 1e-12);
}

#[test]
fn convergence_time_prints_table() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), TWO);
    let o = okbim(&[
        "convergence-time",
        "--scenario",
        &scenario,
        "--out",
        tmp.path().to_str().unwrap(),
        "--t-end",
        "0.04",
        "--dts",
        "1e-2,5e-3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("dt,max_error\n0.01,"), "{stdout}");
    assert!(tmp.path().join("convergence_time.csv").exists());
}

#[test]
fn bad_configs_fail_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        TWO.replace("n = 32", "n = 30"),
        TWO.replace("dt = 1e-2", "dt = 0"),
        TWO.replace("r_inf = 4.0", "r_inf = 4.0\nviscosity = 1"),
        TWO.replace("[-1.8, 0.0]", "[1.5, 0.0]"),
    ];
    for text in &cases {
        let scenario = write_scenario(tmp.path(), text);
        let o = okbim(&["run", "--scenario", &scenario, "--out", tmp.path().join("x").to_str().unwrap()]);
        assert!(!o.status.success());
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
    let o = okbim(&["run", "--scenario", "no_such_preset"]);
    assert!(!o.status.success());
}

#[test]
fn linear_compare_needs_one_perturbed_circle() {
    let tmp = tempfile::tempdir().unwrap();
    let scenario = write_scenario(tmp.path(), TWO);
    let o = okbim(&["linear-compare", "--scenario", &scenario, "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("perturbed_circle"));
}

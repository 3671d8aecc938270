//! End-to-end tests of the binary: flags, artifacts, exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blockpower"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn gen_fig1(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("fig1.mtx");
    let out = run(&["gen", "--family", "fig1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    path
}

/// Parses the `spectrum:` section of a sidecar into magnitudes.
fn sidecar_spectrum(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut mags = Vec::new();
    let mut in_spectrum = false;
    for line in text.lines() {
        if line == "spectrum:" {
            in_spectrum = true;
            continue;
        }
        if !in_spectrum || line.starts_with("index") {
            continue;
        }
        let (_, mag) = line.split_once(',').expect("index,magnitude");
        mags.push(mag.parse::<f64>().unwrap());
    }
    mags
}

#[test]
fn gen_fig1_writes_matrix_sidecar_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig1.mtx");
    let out = run(&["gen", "--family", "fig1", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("n=5 nnz=10"));
    assert!(path.exists());
    let sidecar = std::fs::read_to_string(dir.path().join("fig1.sidecar.txt")).unwrap();
    assert!(sidecar.contains("family=fig1"));
    // Not reversible: no spectrum section.
    assert!(!sidecar.contains("spectrum:"));
    let manifest = std::fs::read_to_string(dir.path().join("fig1.manifest.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(json["matrix"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn gen_birth_death_spectrum_leads_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bd.mtx");
    let out = run(&[
        "gen", "--family", "birth-death", "--n", "10", "--p", "0.3", "--q", "0.3", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mags = sidecar_spectrum(&dir.path().join("bd.sidecar.txt"));
    assert_eq!(mags.len(), 10);
    assert!((mags[0] - 1.0).abs() <= 1e-10);
}

#[test]
fn gen_clustered_has_three_near_one_modes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cl.mtx");
    let out = run(&[
        "gen", "--family", "clustered", "--m", "3", "--cluster-size", "10", "--eps", "1e-4",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mags = sidecar_spectrum(&dir.path().join("cl.sidecar.txt"));
    assert_eq!(mags.iter().filter(|&&m| m > 0.999).count(), 3);
    assert!(mags[3] <= 0.9);
}

#[test]
fn gen_reversible_prints_top_magnitudes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rr.mtx");
    let out = run(&[
        "gen", "--family", "reversible", "--n", "20", "--seed", "7", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lambda_line = text.lines().find(|l| l.starts_with("top |lambda|:")).unwrap();
    assert_eq!(lambda_line.split_whitespace().count(), 2 + 5);
}

#[test]
fn gen_rejects_invalid_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.mtx");
    // eps must stay below 1/m.
    let out = run(&[
        "gen", "--family", "clustered", "--m", "3", "--cluster-size", "10", "--eps", "0.5",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    // Missing family parameter.
    let out = run(&["gen", "--family", "birth-death", "--n", "10", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solve_fig1_fast_path_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = gen_fig1(dir.path());
    let run_dir = dir.path().join("run");
    let out = run(&[
        "solve", "--matrix", matrix.to_str().unwrap(), "--block-size", "3", "--check-every", "1",
        "--out", run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let history = std::fs::read_to_string(run_dir.join("history.csv")).unwrap();
    assert!(history.starts_with("iteration,matvecs,residual,effective_rank\n"));
    let last = history.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    let iterations: usize = fields[0].parse().unwrap();
    assert!(iterations <= 100);
    // matvec column = s * iterations.
    assert_eq!(fields[1].parse::<usize>().unwrap(), 3 * iterations);

    let dist = std::fs::read_to_string(run_dir.join("distribution.csv")).unwrap();
    let sum: f64 = dist
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.parse::<f64>().unwrap())
        .sum();
    assert!((sum - 1.0).abs() <= 1e-12);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "Converged");
    assert_eq!(manifest["config"]["block_size"], 3);
}

#[test]
fn solve_iteration_cap_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = gen_fig1(dir.path());
    let run_dir = dir.path().join("run");
    let out = run(&[
        "solve", "--matrix", matrix.to_str().unwrap(), "--block-size", "1", "--max-iters", "10",
        "--out", run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["status"], "MaxIterations");
}

#[test]
fn solve_missing_matrix_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve", "--matrix", dir.path().join("absent.mtx").to_str().unwrap(), "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}

#[test]
fn solve_repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = gen_fig1(dir.path());
    let mut histories = Vec::new();
    for name in ["a", "b"] {
        let run_dir = dir.path().join(name);
        let out = run(&[
            "solve", "--matrix", matrix.to_str().unwrap(), "--block-size", "2", "--seed", "3",
            "--max-iters", "500", "--out", run_dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(2));
        histories.push(std::fs::read(run_dir.join("history.csv")).unwrap());
    }
    assert_eq!(histories[0], histories[1]);
}

#[test]
fn solve_dominant_ritz_flag() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = gen_fig1(dir.path());
    let run_dir = dir.path().join("run");
    let out = run(&[
        "solve", "--matrix", matrix.to_str().unwrap(), "--block-size", "3", "--check-every", "1",
        "--extraction", "dominant-ritz", "--out", run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn sweep_fig1_matvec_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = gen_fig1(dir.path());
    let run_dir = dir.path().join("sweep");
    let out = run(&[
        "sweep", "--matrix", matrix.to_str().unwrap(), "--block-sizes", "1,2,3", "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(run_dir.join("sweep.csv")).unwrap();
    let mut matvecs = std::collections::HashMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let s: usize = f[0].parse().unwrap();
        let converged: bool = f[2].parse().unwrap();
        let iterations: usize = f[3].parse().unwrap();
        let mv: usize = f[4].parse().unwrap();
        assert!(converged);
        assert_eq!(mv, s * iterations);
        matvecs.insert(s, mv);
    }
    assert!(matvecs[&3] < matvecs[&2]);
    assert!(matvecs[&2] < matvecs[&1]);
}

#[test]
fn sweep_window_beats_plain_on_clustered_chain() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("cl.mtx");
    let out = run(&[
        "gen", "--family", "clustered", "--m", "3", "--cluster-size", "10", "--eps", "1e-4",
        "--out", matrix.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let run_dir = dir.path().join("sweep");
    let out = run(&[
        "sweep", "--matrix", matrix.to_str().unwrap(), "--block-sizes", "1", "--windows", "1,4",
        "--no-reorth", "--out", run_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(run_dir.join("sweep.csv")).unwrap();
    let mut by_window = std::collections::HashMap::new();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[2], "true");
        by_window.insert(f[1].parse::<usize>().unwrap(), f[4].parse::<usize>().unwrap());
    }
    assert!(by_window[&4] < by_window[&1]);
}

#[test]
fn sweep_empty_block_sizes_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = gen_fig1(dir.path());
    let out = run(&[
        "sweep", "--matrix", matrix.to_str().unwrap(), "--block-sizes", "", "--out",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("solve"));
}

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use fracgibc::cli::{run, Command, RunOptions};

const BASE: &str = "[geometry]\nh = 0.2\n[frequency]\nalpha = 0.5\ns = 1\n";

fn setup(config: &str) -> (tempfile::TempDir, RunOptions) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("study.ini");
    fs::write(&path, config).unwrap();
    let opts = RunOptions { config: path, out: Some(dir.path().join("out")), seed: None };
    (dir, opts)
}

fn binary(args: &[&str]) -> i32 {
    Process::new(env!("CARGO_BIN_EXE_fracgibc")).args(args).output().unwrap().status.code().unwrap()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

#[test]
fn mesh_runs_are_byte_identical() {
    let (dir, opts) = setup(BASE);
    run(Command::Mesh, &opts).unwrap();
    let first = fs::read(dir.path().join("out/mesh.txt")).unwrap();
    let manifest = fs::read(dir.path().join("out/manifest.jsonl")).unwrap();
    run(Command::Mesh, &opts).unwrap();
    assert_eq!(first, fs::read(dir.path().join("out/mesh.txt")).unwrap());
    assert_eq!(manifest, fs::read(dir.path().join("out/manifest.jsonl")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# fracgibc") && text.lines().next().unwrap().contains("config_sha256="));
    let mesh = fracgibc::geometry::read_mesh(text.as_bytes()).unwrap();
    assert!(mesh.num_vertices() > 50);
}

#[test]
fn coercivity_study_margins_are_nonnegative() {
    let (dir, opts) = setup(&format!("{BASE}[study]\nsamples = 10\n"));
    run(Command::StudyCoercivity, &opts).unwrap();
    let rows = data_lines(&dir.path().join("out/coercivity.csv"));
    assert_eq!(rows[0], "alpha,s_re,s_im,sample,margin,bound");
    assert_eq!(rows.len(), 1 + 3 * 7 * 10);
    for row in &rows[1..] {
        let margin: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(margin >= -1e-10, "{row}");
    }
}

#[test]
fn noise_free_impedance_report() {
    let config = "[geometry]\ninner = ellipse 0.5 0.3\nh = 0.1\n[impedance]\neta = 1 0.5 0\ngamma = 2 0 1\n";
    let (dir, opts) = setup(config);
    run(Command::InvertImpedance, &opts).unwrap();
    let report = fs::read_to_string(dir.path().join("out/impedance_report.txt")).unwrap();
    for key in ["eta_relative_linf_error", "gamma_relative_linf_error"] {
        let line = report.lines().find(|l| l.starts_with(key)).unwrap();
        let value: f64 = line.split('=').nth(1).unwrap().trim().parse().unwrap();
        assert!(value <= 1e-2, "{line}");
    }
}

#[test]
fn noisy_inversion_depends_only_on_the_seed() {
    let config = "[geometry]\nh = 0.2\n[flux]\nbasis_size = 8\n[inversion]\nnoise = 0.01\nlambda = discrepancy\ntest = trig 3\n";
    let (dir, mut opts) = setup(config);
    let report = |opts: &RunOptions| {
        run(Command::InvertImpedance, opts).unwrap();
        fs::read_to_string(dir.path().join("out/impedance_report.txt")).unwrap()
    };
    opts.seed = Some(3);
    let a = report(&opts);
    assert_eq!(a, report(&opts));
    opts.seed = Some(4);
    assert_ne!(a, report(&opts));
}

#[test]
fn frequency_and_study_outputs_have_headers() {
    let (dir, opts) = setup(&format!("{BASE}[study]\nh_list = 0.2 0.1\n"));
    run(Command::SolveFreq, &opts).unwrap();
    run(Command::StudyConvergence, &opts).unwrap();
    let summary = data_lines(&dir.path().join("out/frequency_summary.csv"));
    assert_eq!(summary[0], "index,s_re,s_im,graph_norm,stability_ratio");
    let conv = data_lines(&dir.path().join("out/convergence.csv"));
    assert_eq!(conv.len(), 3);
    let manifest = fs::read_to_string(dir.path().join("out/manifest.jsonl")).unwrap();
    let commands: Vec<String> = manifest
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["command"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(commands, ["solve-freq", "study-convergence"]);
}

#[test]
fn exit_codes() {
    let (dir, _) = setup(BASE);
    let out = dir.path().join("bin-out");
    let out = out.to_str().unwrap();
    let good = dir.path().join("study.ini");
    assert_eq!(binary(&["mesh", "--config", good.to_str().unwrap(), "--out", out]), 0);

    let bad = dir.path().join("bad.ini");
    fs::write(&bad, "[frequency]\nalpha = 1.5\n").unwrap();
    assert_eq!(binary(&["mesh", "--config", bad.to_str().unwrap(), "--out", out]), 2);
    fs::write(&bad, "[impedance]\ngamma_min = 0\n").unwrap();
    assert_eq!(binary(&["mesh", "--config", bad.to_str().unwrap(), "--out", out]), 2);

    // three test functions cannot determine six coefficients
    let rank = dir.path().join("rank.ini");
    fs::write(&rank, "[geometry]\nh = 0.2\n[flux]\nbasis_size = 1\n[inversion]\neta_modes = 3\ngamma_modes = 3\ntest = trig 3\n").unwrap();
    assert_eq!(binary(&["invert-impedance", "--config", rank.to_str().unwrap(), "--out", out]), 3);
}

#[test]
fn shipped_config_parses() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/annulus.ini")).unwrap();
    let cfg = fracgibc::cli::parse_config(&text).unwrap();
    assert_eq!(cfg.frequency.s.len(), 2);
    assert_eq!(cfg.impedance.eta_min, 0.5);
    assert_eq!(cfg.impedance.gamma_min, 1.0);
}

//! End-to-end tests of the command-line interface: every subcommand, every
//! exit path, and byte-level determinism of the generated artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};

use compiv::io::write_dataset_csv;
use compiv::iv::IvDataset;
use compiv::simplex::closure;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_compiv"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn compiv")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn simulate(dir: &Path, extra: &[&str]) -> (PathBuf, PathBuf, PathBuf) {
    let mut args = vec!["simulate"];
    args.extend_from_slice(extra);
    args.extend_from_slice(&["--out", "sim"]);
    let out = run(&args, dir);
    assert_exit(&out, 0);
    (
        dir.join("sim.csv"),
        dir.join("sim.interventions.csv"),
        dir.join("sim.truth.json"),
    )
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for sub in [
        None,
        Some("simulate"),
        Some("fit"),
        Some("evaluate"),
        Some("benchmark"),
        Some("diversity-iv"),
        Some("ingest"),
    ] {
        let mut args = Vec::new();
        if let Some(s) = sub {
            args.push(s);
        }
        args.push("--help");
        let out = run(&args, dir.path());
        assert_exit(&out, 0);
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn simulate_is_deterministic_and_well_shaped() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let flags = ["--preset", "A-p3", "--seed", "7", "--n", "60", "--m-interventions", "20"];
    let (data_a, int_a, truth_a) = simulate(dir_a.path(), &flags);
    let (data_b, int_b, truth_b) = simulate(dir_b.path(), &flags);

    let csv = fs::read_to_string(&data_a).unwrap();
    assert!(csv.starts_with("z_1,z_2,x_1,x_2,x_3,y\n"));
    assert_eq!(csv.lines().count(), 61);
    assert_eq!(fs::read_to_string(&int_a).unwrap().lines().count(), 21);

    assert_eq!(fs::read(&data_a).unwrap(), fs::read(&data_b).unwrap());
    assert_eq!(fs::read(&int_a).unwrap(), fs::read(&int_b).unwrap());
    assert_eq!(fs::read(&truth_a).unwrap(), fs::read(&truth_b).unwrap());

    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&truth_a).unwrap()).unwrap();
    assert_eq!(truth["setting"], "a");
    assert_eq!(truth["p"], 3);
}

#[test]
fn simulate_resolves_setting_families_and_env_seeds() {
    let dir_a = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "simulate", "--setting", "a", "--p", "3", "--q", "2", "--n", "40", "--out", "env",
        ])
        .env("COMPIV_SEED", "7")
        .current_dir(dir_a.path())
        .output()
        .unwrap();
    assert_exit(&out, 0);

    let dir_b = tempfile::tempdir().unwrap();
    simulate(dir_b.path(), &["--preset", "A-p3", "--seed", "7", "--n", "40"]);
    assert_eq!(
        fs::read(dir_a.path().join("env.csv")).unwrap(),
        fs::read(dir_b.path().join("sim.csv")).unwrap()
    );

    // A wrong q is caught before anything is written.
    let out = run(
        &["simulate", "--setting", "a", "--p", "3", "--q", "5", "--out", "bad"],
        dir_a.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn simulate_accepts_a_full_parameter_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = compiv::datagen::preset("B-p3").unwrap();
    spec.n = 30;
    spec.m_interventions = 10;
    let path = dir.path().join("spec.json");
    fs::write(&path, serde_json::to_string(&spec).unwrap()).unwrap();
    let (data, _, _) = simulate(dir.path(), &["--params", "spec.json", "--seed", "3"]);
    assert!(fs::read_to_string(data).unwrap().starts_with("z_1,z_2,z_3,x_1,x_2,x_3,y\n"));
}

#[test]
fn unknown_presets_exit_with_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["simulate", "--preset", "C-p9", "--out", "x"], dir.path());
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("preset"));
}

#[test]
fn fit_exercises_every_exit_path() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--preset", "A-p3", "--seed", "5", "--n", "200"]);

    let out = run(
        &["fit", "--method", "2sls-ilr", "--data", "sim.csv", "--out", "fit.json"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["method"], "2sls-ilr");
    assert_eq!(fit["diagnostics"]["f_stats"].as_array().unwrap().len(), 2);

    let out = run(
        &["fit", "--method", "super-lc", "--data", "sim.csv", "--out", "no.json"],
        dir.path(),
    );
    assert_exit(&out, 2);

    // Duplicated instrument column: a rank-deficient design is a numerical
    // failure, not a usage error.
    let n = 50;
    let z1: Vec<f64> = (0..n).map(|i| (i as f64 / n as f64) - 0.5).collect();
    let z = DMatrix::from_fn(n, 2, |i, _| z1[i]);
    let xs: Vec<_> = (0..n)
        .map(|i| {
            let a = 0.2 + 0.6 * (i as f64 / n as f64);
            closure(&[a, 1.0 - a, 0.5]).unwrap()
        })
        .collect();
    let y = DVector::from_fn(n, |i, _| z1[i] * 2.0);
    let ds = IvDataset::new(z, xs, y).unwrap();
    write_dataset_csv(&dir.path().join("collinear.csv"), &ds).unwrap();
    let out = run(
        &["fit", "--method", "2sls-ilr", "--data", "collinear.csv", "--out", "no.json"],
        dir.path(),
    );
    assert_exit(&out, 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("rank"));
}

#[test]
fn evaluate_scores_a_fit_against_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--preset", "A-p3", "--seed", "11", "--n", "300"]);
    let out = run(
        &[
            "fit", "--method", "only-lc", "--data", "sim.csv", "--threshold", "0.65", "--out",
            "fit.json",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let out = run(
        &[
            "evaluate",
            "--fit",
            "fit.json",
            "--truth",
            "sim.truth.json",
            "--interventions",
            "sim.interventions.csv",
            "--out",
            "metrics.json",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert!(m["oos_mse"].as_f64().unwrap() > 0.0);
    assert!(m["beta_mse"].as_f64().unwrap() > 0.0);
    assert_eq!(m["n_interventions"], 250);
}

fn benchmark_config(n: usize, seeds: usize) -> serde_json::Value {
    let mut spec = compiv::datagen::preset("A-p3").unwrap();
    spec.n = n;
    spec.m_interventions = 40;
    serde_json::json!({
        "scenarios": [{"name": "A-p3-small", "spec": spec}],
        "methods": ["2sls-ilr", "only-lc"],
        "n_seeds": seeds,
        "base_seed": 2,
    })
}

#[test]
fn benchmark_emits_reproducible_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bench.json");
    fs::write(&cfg_path, benchmark_config(150, 2).to_string()).unwrap();

    let args = [
        "benchmark", "--config", "bench.json", "--jobs", "2", "--out-csv", "table.csv",
        "--out-jsonl", "records.jsonl", "--out-text", "table.txt",
    ];
    let first = run(&args, dir.path());
    assert_exit(&first, 0);
    let table_a = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let second = run(&args, dir.path());
    assert_exit(&second, 0);
    let table_b = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    assert_eq!(table_a, table_b);

    let lines: Vec<&str> = table_a.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("scenario,method,n_seeds,n_failed,oos_mse_mean"));
    assert!(lines[1].starts_with("A-p3-small,2sls-ilr,2,"));

    for line in fs::read_to_string(dir.path().join("records.jsonl")).unwrap().lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(rec["metrics"]["oos_mse"].as_f64().unwrap() >= 0.0);
    }
    let text = fs::read_to_string(dir.path().join("table.txt")).unwrap();
    assert!(text.contains("\u{b1}"));
    assert!(String::from_utf8_lossy(&first.stdout).contains("A-p3-small"));
}

#[test]
fn benchmark_rejects_malformed_configs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = benchmark_config(100, 2);
    cfg["surprise"] = serde_json::json!(1);
    fs::write(dir.path().join("bad.json"), cfg.to_string()).unwrap();
    let out = run(&["benchmark", "--config", "bad.json"], dir.path());
    assert_exit(&out, 2);

    fs::write(
        dir.path().join("one.json"),
        benchmark_config(100, 1).to_string(),
    )
    .unwrap();
    let out = run(&["benchmark", "--config", "one.json"], dir.path());
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_seeds"));
}

#[test]
fn diversity_commands_fit_scalar_and_kernel_models() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), &["--preset", "A-p3", "--seed", "13", "--n", "120"]);
    let out = run(
        &["diversity-iv", "--data", "sim.csv", "--measure", "simpson", "--out", "d2.json"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d2.json")).unwrap()).unwrap();
    assert_eq!(fit["method"], "diversity-2sls");
    assert_eq!(fit["model"]["kind"], "scalar");

    let out = run(
        &[
            "diversity-iv", "--data", "sim.csv", "--measure", "shannon", "--method", "kiv",
            "--out", "dk.json",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let fit: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dk.json")).unwrap()).unwrap();
    assert_eq!(fit["method"], "diversity-kiv");

    let out = run(
        &["diversity-iv", "--data", "sim.csv", "--measure", "entropy", "--out", "x.json"],
        dir.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn ingest_converts_counts_and_reports_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("counts.csv"),
        "taxon_a,antibiotic,taxon_b,weight,taxon_c\n\
         10,1,0,1.0,5\n3,0,7,2.0,1\n0,1,2,3.0,9\n4,0,4,4.0,2\n",
    )
    .unwrap();
    let out = run(
        &[
            "ingest", "--counts-csv", "counts.csv", "--instrument-col", "antibiotic",
            "--outcome-col", "weight", "--binary", "--out", "real.csv",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let body = fs::read_to_string(dir.path().join("real.csv")).unwrap();
    assert!(body.starts_with("z_1,x_1,x_2,x_3,y\n"));
    let labels: Vec<&str> = body.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(labels, vec!["-1", "-1", "1", "1"]);

    // The binarized dataset feeds straight back into a classification fit.
    let out = run(
        &[
            "fit", "--method", "only-lc", "--data", "real.csv", "--loss", "squared-hinge",
            "--out", "clf.json",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);

    fs::write(dir.path().join("zeros.csv"), "a,b,z,y\n0,0,1,2.0\n").unwrap();
    let out = run(
        &[
            "ingest", "--counts-csv", "zeros.csv", "--instrument-col", "z", "--outcome-col",
            "y", "--out", "no.csv",
        ],
        dir.path(),
    );
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("all-zero"));

    fs::write(dir.path().join("text.csv"), "a,b,z,y\n1,abc,1,2.0\n").unwrap();
    let out = run(
        &[
            "ingest", "--counts-csv", "text.csv", "--instrument-col", "z", "--outcome-col",
            "y", "--out", "no.csv",
        ],
        dir.path(),
    );
    assert_exit(&out, 2);
}

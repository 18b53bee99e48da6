//! End-to-end runs of the `dronesim` commands.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use clap::Parser;
use dronesim::{run, Cli};

fn cli(args: &[&str], out: &Path) -> Cli {
    let mut argv = vec!["dronesim"];
    argv.extend_from_slice(args);
    argv.extend_from_slice(&["--out", out.to_str().unwrap()]);
    Cli::try_parse_from(argv).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Data rows of a CSV (comment lines and header dropped), split on commas.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

/// `(t, gamma) -> coverage` from a coverage sweep file.
fn coverage_table(path: &Path) -> BTreeMap<(i64, i64), f64> {
    rows(path)
        .iter()
        .map(|r| ((num(&r[0]) as i64, num(&r[1]) as i64), num(&r[2])))
        .collect()
}

#[test]
fn coverage_sweep_files() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(&cli(&["coverage", "--plot"], dir.path())).unwrap();
    assert_eq!(outcome.files.len(), 5);
    assert!(outcome.failures.is_empty());

    let text = std::fs::read_to_string(dir.path().join("coverage_model2_noise.csv")).unwrap();
    assert!(text.contains("# lambda0 = 1e-6\n"));
    assert!(text.contains("\nt_s,gamma_db,coverage,rate_nats,method,ci_half_width\n"));

    let m1 = coverage_table(&dir.path().join("coverage_model1_noise.csv"));
    let m2 = coverage_table(&dir.path().join("coverage_model2_noise.csv"));
    let m2_quiet = coverage_table(&dir.path().join("coverage_model2_no-noise.csv"));
    for g in [-5, 0, 5] {
        assert_eq!(m1[&(0, g)], m1[&(200, g)]);
        assert!(m2[&(200, g)] >= m2[&(20, g)] - 1e-6);
        for t in [20, 50, 200] {
            assert!(m2[&(t, g)] > m1[&(t, g)]);
            // Once the serving DBS has moved in, noise matters little.
            assert!((m2_quiet[&(t, g)] - m2[&(t, g)]) / m2_quiet[&(t, g)] < 0.05);
        }
    }
    assert!((m2[&(0, 0)] - 0.3348327453).abs() < 1e-9);
}

#[test]
fn density_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "[sweep]\nt_s = [0.0, 20.0, 200.0]\ndensity_step_m = 5.0\n");
    run(&cli(&["density", "--config", &path], dir.path())).unwrap();
    let lambda0 = 1e-6;
    let at = |t: &str| -> Vec<(f64, f64, String)> {
        rows(&dir.path().join(format!("density_t{t}.csv")))
            .into_iter()
            .map(|r| (num(&r[0]), num(&r[1]), r[2].clone()))
            .collect()
    };
    for (u, l, _) in at("0") {
        assert_eq!(l, if u > 500.0 { lambda0 } else { 0.0 });
    }
    assert!(at("20").iter().filter(|r| r.0 < 250.0).all(|r| r.1 == 0.0));
    let min = at("200").iter().map(|r| r.1 / lambda0).fold(f64::INFINITY, f64::min);
    assert!((min - 0.935905783151025).abs() < 1e-4, "{min}");
}

#[test]
fn rate_sweep_follows_height_and_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "[sweep]\nt_s = [0.0, 100.0]\nheights_m = [100.0, 200.0]\nalphas = [2.5, 3.5]\n",
    );
    let outcome = run(&cli(&["rate", "--config", &path, "--no-noise"], dir.path())).unwrap();
    assert_eq!(outcome.files.len(), 8);
    let rate = |model: &str, h: &str, a: &str| -> Vec<f64> {
        rows(&dir.path().join(format!("rate_{model}_h{h}_a{a}_no-noise.csv")))
            .iter()
            .map(|r| num(&r[3]))
            .collect()
    };
    let m1 = rate("model1", "100", "3.5");
    assert_eq!(m1[0], m1[1]);
    for k in 0..2 {
        assert!(rate("model2", "100", "3.5")[k] > rate("model2", "100", "2.5")[k]);
        assert!(rate("model2", "100", "3.5")[k] > rate("model2", "200", "3.5")[k]);
    }
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "[sweep]\nt_s = [0.0, 50.0]\ngamma_db = [0.0]\n[mc]\nmobility = [\"straight-line\"]\n",
    );
    let args = ["simulate", "--config", &path, "--trials", "300", "--seed", "7", "--trial-log"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run(&cli(&args, &a)).unwrap();
    run(&cli(&args, &b)).unwrap();
    for name in ["simulate_model2_straight-line.csv", "trials_model2_straight-line.csv"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    }
    let log = rows(&a.join("trials_model2_straight-line.csv"));
    assert_eq!(log.len(), 600);
    let sim = rows(&a.join("simulate_model2_straight-line.csv"));
    // Per time: coverage at 0 dB, then the rate row.
    let covered = log.iter().filter(|r| r[1] == "50" && r[4] == "1").count();
    assert_eq!(num(&sim[2][2]), covered as f64 / 300.0);
    assert_eq!(sim[3][4], "monte-carlo");
}

#[test]
fn validate_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "[sweep]\nt_s = [0.0, 50.0]\ngamma_db = [0.0]\n[mc]\nhistogram_points = 200000\n",
    );
    let args = ["validate", "--config", &path, "--trials", "500"];
    let a = dir.path().join("a");
    let outcome = run(&cli(&args, &a)).unwrap();
    assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("validation_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["checks"].as_array().unwrap().len(), 11);

    let b = dir.path().join("b");
    run(&cli(&args, &b)).unwrap();
    assert_eq!(
        std::fs::read(a.join("validation_report.json")).unwrap(),
        std::fs::read(b.join("validation_report.json")).unwrap()
    );

    let c = dir.path().join("c");
    let mut corrupt = args.to_vec();
    corrupt.push("--corrupt-density");
    let outcome = run(&cli(&corrupt, &c)).unwrap();
    assert_eq!(outcome.failures.len(), 1, "{:?}", outcome.failures);
    assert!(outcome.failures[0].contains("density_histogram_t50"));
}

#[test]
fn compare_mobility_orders_rates() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "[sweep]\nt_s = [0.0, 100.0]\n");
    let outcome = run(&cli(&["compare-mobility", "--config", &path, "--trials", "3000", "--plot"], dir.path())).unwrap();
    assert!(outcome.failures.is_empty(), "{:?}", outcome.failures);
    let table = rows(&dir.path().join("compare_mobility.csv"));
    assert_eq!(table.len(), 6);
    for r in &table {
        assert_eq!(r[5], "ok");
        if r[0] == "0" {
            assert_eq!(r[2], r[4]);
        }
    }
    let rw_100 = table.iter().find(|r| r[0] == "100" && r[1] == "random-walk").unwrap();
    assert!(num(&rw_100[2]) > num(&rw_100[4]));

    // A walk that never turns is the straight line.
    let path = write_config(dir.path(), "[sweep]\nt_s = [100.0]\n[mc]\nmobility = [\"rw\"]\nrw_epoch_s = 1e9\n");
    run(&cli(&["compare-mobility", "--config", &path, "--trials", "500"], dir.path())).unwrap();
    let table = rows(&dir.path().join("compare_mobility.csv"));
    assert_eq!(table[0][2], table[0][4]);
}

fn exit_code(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_dronesim"))
        .args(args)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad = write_config(dir.path(), "alpha = 1.5\n");
    assert_eq!(exit_code(&["coverage", "--config", &bad, "--out", out]), 2);
    assert_eq!(exit_code(&["coverage", "--config", "/nonexistent/config.toml", "--out", out]), 2);
    assert_eq!(exit_code(&["simulate", "--trials", "10", "--out", out]), 2);
    assert_eq!(exit_code(&["teleport"]), 2);
    let typo = write_config(dir.path(), "[sweep]\ngama_db = [0.0]\n");
    assert_eq!(exit_code(&["coverage", "--config", &typo, "--out", out]), 2);

    let small = write_config(dir.path(), "[sweep]\nt_s = [0.0]\ngamma_db = [0.0]\n");
    assert_eq!(exit_code(&["coverage", "--config", &small, "--out", out]), 0);
    // Output directory that cannot be created.
    let file = dir.path().join("config.toml");
    let blocked = file.join("sub");
    assert_eq!(exit_code(&["coverage", "--config", &small, "--out", blocked.to_str().unwrap()]), 1);
}

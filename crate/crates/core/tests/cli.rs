mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use tmax::classical::{ks_endpoint, pisarenko_alpha_threshold, KsConfig};
use tmax::MagnitudeSample;

fn tmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmax")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Catalog in the `simple` layout with magnitudes rounded to one decimal,
/// so that tie smoothing has work to do.
fn write_catalog(dir: &Path, seed: u64, reverse: bool) -> PathBuf {
    let s = common::gr(300, 3.9, seed);
    let mut lines: Vec<String> = s
        .values()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let day = 1 + i % 28;
            format!(
                "2010-03-{day:02}T12:00:00,53.{:02},6.{:02},{:.1}",
                11 + i % 38,
                51 + i % 45,
                m
            )
        })
        .collect();
    // one event well outside the Groningen rectangle
    lines.push("2010-04-01T00:00:00,51.0,4.0,3.0".into());
    if reverse {
        lines.reverse();
    }
    let path = dir.join(if reverse { "reversed.csv" } else { "catalog.csv" });
    fs::write(&path, format!("date,lat,lon,mag\n{}\n", lines.join("\n"))).unwrap();
    path
}

fn write_sample(dir: &Path, s: &MagnitudeSample) -> PathBuf {
    let path = dir.join("sample_in.csv");
    let body: Vec<String> = s.values().iter().map(|v| format!("{v:?}")).collect();
    fs::write(&path, format!("magnitude\n{}\n", body.join("\n"))).unwrap();
    path
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn missing_input_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.csv");
    let out = tmax(&["catalog", "--input", p(&missing), "--out-dir", p(tmp.path())]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains(p(&missing)), "{}", stderr(&out));
}

#[test]
fn catalog_summary_and_fixed_seed_determinism() {
    let tmp = TempDir::new().unwrap();
    let cat = write_catalog(tmp.path(), 1, false);
    let run = |name: &str, seed: &str| {
        let dir = tmp.path().join(name);
        let out = tmax(&[
            "catalog",
            "--input",
            p(&cat),
            "--bbox",
            "groningen",
            "--seed",
            seed,
            "--out-dir",
            p(&dir),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        (stdout(&out), read(&dir, "sample.csv"), dir)
    };
    let (text, a, dir) = run("a", "7");
    assert!(text.contains("n = ") && text.contains("t_M = 1.5"), "{text}");
    let (_, b, _) = run("b", "7");
    let (_, c, _) = run("c", "8");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let manifest = read(&dir, "manifest.txt");
    assert!(manifest.contains("seed.smoothing = 7"));
    assert!(manifest.contains("output.") && manifest.contains("sample.csv = sha256:"));
    assert!(manifest.contains("input.") && manifest.contains("catalog.csv = sha256:"));
}

#[test]
fn estimate_single_estimator_gives_one_row() {
    let tmp = TempDir::new().unwrap();
    let cat = write_catalog(tmp.path(), 2, false);
    let out = tmax(&[
        "estimate",
        "--input",
        p(&cat),
        "--estimators",
        "rw",
        "--out-dir",
        p(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(tmp.path(), "estimates.csv");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[1].starts_with("rw,2,"));
    assert!(tmp.path().join("manifest.txt").exists());
}

#[test]
fn estimate_records_failures_in_file() {
    let tmp = TempDir::new().unwrap();
    let cat = write_catalog(tmp.path(), 3, false);
    let out = tmax(&[
        "estimate",
        "--input",
        p(&cat),
        "--k-grid",
        "1,2,125",
        "--out-dir",
        p(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(tmp.path(), "estimates.csv");
    let trgpd: Vec<&str> = text.lines().filter(|l| l.starts_with("trgpd,")).collect();
    assert_eq!(trgpd.len(), 3);
    // k = 1 is below the minimum for a two-parameter fit
    assert!(!trgpd[0].ends_with(','), "{}", trgpd[0]);
    assert!(trgpd[2].ends_with(','), "{}", trgpd[2]);
}

#[test]
fn empty_sample_fails() {
    let tmp = TempDir::new().unwrap();
    let cat = write_catalog(tmp.path(), 4, false);
    let out = tmax(&[
        "estimate",
        "--input",
        p(&cat),
        "--t-min",
        "9",
        "--out-dir",
        p(tmp.path()),
    ]);
    assert!(!out.status.success());
    assert!(!tmp.path().join("estimates.csv").exists());
}

#[test]
fn alpha_outside_unit_interval_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cat = write_catalog(tmp.path(), 5, false);
    for alpha in ["--alpha=0", "--alpha=1", "--alpha=1.5", "--alpha=-0.1"] {
        let out = tmax(&[
            "bounds",
            "--input",
            p(&cat),
            alpha,
            "--k",
            "125",
            "--out-dir",
            p(tmp.path()),
        ]);
        assert!(!out.status.success(), "{alpha}");
        assert!(stderr(&out).contains("alpha"), "{}", stderr(&out));
    }
}

#[test]
fn pisarenko_bound_prints_inf_below_threshold() {
    // pick a simulated sample whose threshold level lies between 0.05 and 0.1
    let (sample, threshold) = (0..500)
        .map(|seed| common::gr(250, 3.75, 70_000 + seed))
        .find_map(|s| {
            let beta = ks_endpoint(&s, &KsConfig::default()).ok()?.beta;
            let a = pisarenko_alpha_threshold(&s, beta);
            (a > 0.055 && a < 0.095).then_some((s, a))
        })
        .expect("no sample with a threshold in range");
    let tmp = TempDir::new().unwrap();
    let input = write_sample(tmp.path(), &sample);
    let run = |alpha: &str| {
        let out = tmax(&[
            "bounds",
            "--sample",
            p(&input),
            "--alpha",
            alpha,
            "--k",
            "125",
            "--out-dir",
            p(tmp.path()),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        stdout(&out)
    };
    assert!(run("0.05").contains("pisarenko = inf"), "threshold {threshold}");
    let finite = run("0.1");
    assert!(
        finite.contains("pisarenko = ") && !finite.contains("pisarenko = inf"),
        "{finite}"
    );
    assert!(read(tmp.path(), "bounds.csv")
        .lines()
        .any(|l| l.starts_with("pisarenko,250,")));
}

#[test]
fn diagnose_is_stable_under_row_permutation() {
    let tmp = TempDir::new().unwrap();
    let a = write_catalog(tmp.path(), 6, false);
    let b = write_catalog(tmp.path(), 6, true);
    let (da, db) = (tmp.path().join("a"), tmp.path().join("b"));
    for (input, dir) in [(&a, &da), (&b, &db)] {
        let out = tmax(&[
            "diagnose",
            "--input",
            p(input),
            "--k-grid",
            "20..200:20",
            "--out-dir",
            p(dir),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in [
        "qq_exponential.csv",
        "qq_pareto.csv",
        "mean_excess.csv",
        "hill.csv",
        "truncation_tests.csv",
    ] {
        assert_eq!(read(&da, name), read(&db, name), "{name}");
    }
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let tmp = TempDir::new().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let out = tmax(&[
            "simulate",
            "--replicates",
            "6",
            "--t-max",
            "3.75,4.5",
            "--k-grid",
            "50,125",
            "--seed",
            "99",
            "--out-dir",
            p(&dir),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        dir
    };
    let (a, b) = (run("a"), run("b"));
    for t in ["3.75", "4.5"] {
        for metric in ["relative_mean", "relative_mse", "coverage"] {
            let name = format!("{metric}_T{t}.csv");
            assert_eq!(read(&a, &name), read(&b, &name), "{name}");
        }
    }
    let header = read(&a, "coverage_T3.75.csv");
    assert!(header.starts_with("estimator,k,T_M,metric_value,replicates_used\n"));
    assert!(read(&a, "manifest.txt").contains("seed.master = 99"));
}

#[test]
fn simulate_single_replicate() {
    let tmp = TempDir::new().unwrap();
    let out = tmax(&[
        "simulate",
        "--replicates",
        "1",
        "--t-max",
        "4",
        "--k-grid",
        "125",
        "--out-dir",
        p(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = read(tmp.path(), "relative_mean_T4.csv");
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.iter().any(|r| r.starts_with("npos,250,4,")));
    assert!(rows.iter().all(|r| r.ends_with(",1") || r.ends_with(",0")), "{text}");
}

//! Monte Carlo consistency and calibration checks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use std::f64::consts::LN_10;

use tmax::classical::{ks_endpoint, KsConfig};
use tmax::diagnostics::{hill, mean_excess};
use tmax::evt::{
    fit_truncated_gpd, fit_truncated_pareto, test_truncation_gpd, test_truncation_pareto, truncation_odds_tgpd,
    truncation_odds_tpareto,
};
use tmax::simulation::{run_study, sample_truncated_gr, StudyConfig, TruncatedGRParams};
use tmax::Estimator;

const BETA: f64 = 2.1203;

/// Practically untruncated: the mass above the endpoint underflows.
const NO_TRUNCATION: f64 = 1000.0;

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// KS distance of p-values from Uniform(0, 1).
fn uniformity_distance(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    common::ks_distance(&p, |x| x.clamp(0.0, 1.0))
}

#[test]
fn mean_excess_of_exponential_is_inverse_rate() {
    let s = common::gr(10_000, NO_TRUNCATION, 77);
    let me = mean_excess(&s).unwrap();
    let k = 5_000;
    let entry = me.entries.iter().find(|e| e.k == k).unwrap();
    let se = (1.0 / BETA) / (k as f64).sqrt();
    assert!(
        (entry.mean_excess - 1.0 / BETA).abs() < 3.0 * se,
        "{}",
        entry.mean_excess
    );
}

#[test]
fn hill_recovers_pareto_index() {
    let xi = 1.8;
    let params = TruncatedGRParams::new(1.5 * LN_10 / xi, 1.5, NO_TRUNCATION).unwrap();
    let e = sample_truncated_gr(&params, 1_000_000, 3).energies();
    let k = 1000;
    let h = hill(&e, k).unwrap();
    assert!((h - xi).abs() < 3.0 * xi / (k as f64).sqrt(), "{h}");
}

#[test]
fn truncated_gpd_on_truncated_exponential_recovers_rate() {
    let (n, k) = (5000, 2500);
    let s = common::gr(n, 4.0, 2017);
    let fit = fit_truncated_gpd(&s, k).unwrap();
    // asymptotic standard errors of the two-parameter fit at xi = 0
    let se_xi = 1.0 / (k as f64).sqrt();
    let se_rate = BETA * (2.0 / k as f64).sqrt();
    assert!(fit.xi.abs() < 3.0 * se_xi, "xi {}", fit.xi);
    assert!(
        (1.0 / fit.sigma - BETA).abs() < 3.0 * se_rate,
        "rate {}",
        1.0 / fit.sigma
    );
}

#[test]
fn gpd_shape_shrinks_towards_zero_with_sample_size() {
    let median_abs_xi = |n: usize| {
        let mut v: Vec<f64> = (0..41)
            .map(|r| fit_truncated_gpd(&common::gr(n, 4.0, 500 + r), n / 2).unwrap().xi.abs())
            .collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let (small, large) = (median_abs_xi(250), median_abs_xi(5000));
    assert!(large < small, "{large} !< {small}");
}

#[test]
fn ks_rate_is_consistent() {
    let n = 10_000;
    let s = common::gr(n, 4.0, 31);
    let r = ks_endpoint(&s, &KsConfig::default()).unwrap();
    let se = BETA / (n as f64).sqrt();
    assert!((r.beta - BETA).abs() < 3.0 * se, "{}", r.beta);
}

fn odds_check(n: usize, k: usize, replicates: u64) -> Vec<String> {
    let params = TruncatedGRParams::new(BETA, 1.5, 3.75).unwrap();
    let truth = params.truncation_odds();
    let (mut gpd, mut pareto) = (Vec::new(), Vec::new());
    for r in 0..replicates {
        let s = sample_truncated_gr(&params, n, 9000 + r);
        if let Ok(fit) = fit_truncated_gpd(&s, k) {
            gpd.push(truncation_odds_tgpd(&fit, &s).value);
        }
        if let Ok(fit) = fit_truncated_pareto(&s.energies(), k) {
            pareto.push(truncation_odds_tpareto(&fit).value);
        }
    }
    let mut failures = Vec::new();
    for (name, v) in [("gpd", gpd), ("pareto", pareto)] {
        let (mean, se) = mean_and_se(&v);
        if (mean - truth).abs() >= 3.0 * se {
            failures.push(format!("{name}: mean {mean:.5} +- {se:.5}, truth {truth:.5}"));
        }
    }
    failures
}

#[test]
fn truncation_odds_means_match_true_odds_at_study_size() {
    let failures = odds_check(250, 125, 1000);
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn truncation_odds_are_consistent() {
    let failures = odds_check(4000, 2000, 150);
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn pareto_truncation_test_is_calibrated_under_the_null() {
    let p: Vec<f64> = (0..2000)
        .map(|r| {
            let e = common::gr(500, NO_TRUNCATION, 40_000 + r).energies();
            test_truncation_pareto(&e, 250, 0.1).unwrap().p_value
        })
        .collect();
    let d = uniformity_distance(p);
    assert!(d < 0.05, "KS distance {d}");
}

#[test]
fn gpd_truncation_test_is_calibrated_under_the_null() {
    let p: Vec<f64> = (0..2000)
        .map(|r| {
            let s = common::gr(500, NO_TRUNCATION, 60_000 + r);
            test_truncation_gpd(&s, 250, 0.1).unwrap().p_value
        })
        .collect();
    let d = uniformity_distance(p);
    assert!(d < 0.05, "KS distance {d}");
}

fn study(n: usize, replicates: usize, t_upper: f64, k_grid: Vec<usize>) -> StudyConfig {
    StudyConfig {
        replicates,
        sample_size: n,
        k_grid,
        ..StudyConfig::paper_defaults(t_upper).unwrap()
    }
}

#[test]
fn report_is_identical_across_thread_counts() {
    let cfg = study(250, 24, 4.0, vec![50, 125, 249]);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let report = pool.install(|| run_study(&cfg)).unwrap();
        serde_json::to_string(&report).unwrap()
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn relative_mse_decreases_with_sample_size() {
    let small = run_study(&study(250, 1000, 3.75, vec![125])).unwrap();
    let large = run_study(&study(1000, 1000, 3.75, vec![500])).unwrap();
    let pairs = [
        (Estimator::TruncatedGpd, 125, 500),
        (Estimator::TruncatedPareto, 125, 500),
        (Estimator::FewLargest, 250, 1000),
        (Estimator::ExtendedFewLargest, 250, 1000),
        (Estimator::NonParametricGaussian, 250, 1000),
        (Estimator::NonParametricOrderStatistics, 250, 1000),
        (Estimator::RobsonWhitlock, 2, 2),
        (Estimator::RobsonWhitlockCooke, 2, 2),
        (Estimator::KijkoSellevoll, 250, 1000),
    ];
    let mut failures = Vec::new();
    for (est, k_small, k_large) in pairs {
        let a = small.get(est, k_small).unwrap();
        let b = large.get(est, k_large).unwrap();
        if !(b.relative_mse < a.relative_mse * 1.1) {
            failures.push(format!(
                "{est}: {:.3e} (used {}) -> {:.3e} (used {})",
                a.relative_mse, a.used, b.relative_mse, b.used
            ));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

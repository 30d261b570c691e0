//! Truncated Gutenberg-Richter sampling and the Monte Carlo comparison of
//! all endpoint estimators and upper bounds.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::MagnitudeSample;
use crate::classical::{self, KsConfig, NPConfig};
use crate::endpoint::Estimator;
use crate::error::{Error, Result};
use crate::evt;
use crate::numeric::neumaier_sum;

/// Doubly truncated exponential magnitude law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedGRParams {
    pub beta: f64,
    pub t_m: f64,
    pub t_upper: f64,
}

impl TruncatedGRParams {
    pub fn new(beta: f64, t_m: f64, t_upper: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta must be positive"));
        }
        if !(t_upper > t_m) || !t_m.is_finite() || !t_upper.is_finite() {
            return Err(Error::invalid(
                "upper truncation must exceed the completeness threshold",
            ));
        }
        Ok(Self { beta, t_m, t_upper })
    }

    /// Retained probability mass `1 - exp(-beta (T_M - t_M))`.
    fn retained(&self) -> f64 {
        -(-self.beta * (self.t_upper - self.t_m)).exp_m1()
    }

    pub fn cdf(&self, m: f64) -> f64 {
        if m <= self.t_m {
            0.0
        } else if m >= self.t_upper {
            1.0
        } else {
            -(-self.beta * (m - self.t_m)).exp_m1() / self.retained()
        }
    }

    /// Inverse CDF, `t_M - ln(1 - u (1 - e^(-beta (T_M - t_M)))) / beta`.
    pub fn quantile(&self, u: f64) -> f64 {
        let m = self.t_m - (-u * self.retained()).ln_1p() / self.beta;
        m.min(self.t_upper)
    }

    /// Odds `P(Y > T_M) / P(Y <= T_M)` of the untruncated shifted exponential parent.
    pub fn truncation_odds(&self) -> f64 {
        (-self.beta * (self.t_upper - self.t_m)).exp() / self.retained()
    }

    /// Level of `T_M` as a quantile of the untruncated parent.
    pub fn parent_quantile_level(&self) -> f64 {
        self.retained()
    }
}

/// `n` independent draws, returned as an ordered sample.
pub fn sample_truncated_gr(params: &TruncatedGRParams, n: usize, seed: u64) -> MagnitudeSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..n).map(|_| params.quantile(rng.random::<f64>())).collect();
    loop {
        values.sort_by(f64::total_cmp);
        let dup = values.windows(2).position(|w| w[0] == w[1]);
        match dup {
            None => break,
            Some(i) => values[i] = params.quantile(rng.random::<f64>()),
        }
    }
    MagnitudeSample::new(values, params.t_m).expect("draws lie in [t_M, T_M] and are distinct")
}

/// Stateless 64-bit mix (SplitMix64 finaliser).
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `index`, independent of scheduling.
pub fn replicate_seed(master_seed: u64, index: u64) -> u64 {
    mix64(master_seed.wrapping_add(mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyConfig {
    pub replicates: usize,
    pub sample_size: usize,
    pub params: TruncatedGRParams,
    pub alpha: f64,
    /// `k` values for the EVT and FL/EFL estimators.
    pub k_grid: Vec<usize>,
    pub master_seed: u64,
    pub clamp: bool,
    pub np: NPConfig,
    pub ks: KsConfig,
}

impl StudyConfig {
    /// 5000 samples of size 250, `beta = 2.1203`, `t_M = 1.5`, `alpha = 0.1`.
    pub fn paper_defaults(t_upper: f64) -> Result<Self> {
        Ok(Self {
            replicates: 5000,
            sample_size: 250,
            params: TruncatedGRParams::new(2.1203, 1.5, t_upper)?,
            alpha: 0.1,
            k_grid: default_k_grid(250),
            master_seed: 20_170_101,
            clamp: true,
            np: NPConfig::default(),
            ks: KsConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.sample_size < 10 {
            return Err(Error::invalid("sample size must be at least 10"));
        }
        evt::check_alpha(self.alpha)?;
        self.np.validate()?;
        TruncatedGRParams::new(self.params.beta, self.params.t_m, self.params.t_upper)?;
        if self.k_grid.iter().any(|&k| k == 0 || k > self.sample_size) {
            return Err(Error::invalid("k grid values must lie in 1..=sample_size"));
        }
        Ok(())
    }
}

/// `10, 20, ..., n-10` plus `n-1`.
pub fn default_k_grid(n: usize) -> Vec<usize> {
    let mut grid: Vec<usize> = (10..n.saturating_sub(9)).step_by(10).collect();
    if n >= 2 && grid.last() != Some(&(n - 1)) {
        grid.push(n - 1);
    }
    grid
}

/// One estimator evaluation in one replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub estimator: Estimator,
    pub k: usize,
    /// `None` when the estimator failed or returned `+inf`.
    pub estimate: Option<f64>,
    /// `None` when the estimator has no bound here or it could not be
    /// computed; may be `+inf`.
    pub bound: Option<f64>,
    pub has_bound: bool,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// All estimators and bounds on one sample.
pub fn evaluate_all(sample: &MagnitudeSample, config: &StudyConfig) -> Vec<Evaluation> {
    let n = sample.n();
    let alpha = config.alpha;
    let clamp = config.clamp;
    let mut out = Vec::new();
    let mut push = |estimator, k, estimate: Option<f64>, bound: Option<f64>, has_bound| {
        out.push(Evaluation {
            estimator,
            k,
            estimate,
            bound,
            has_bound,
        })
    };

    let energies = sample.energies();
    for &k in &config.k_grid {
        if k >= evt::gpd::MIN_K && k < n {
            match evt::fit_truncated_gpd(sample, k) {
                Ok(fit) => {
                    let est = evt::endpoint_tgpd(&fit, sample, clamp);
                    let odds = evt::truncation_odds_tgpd(&fit, sample);
                    let bound = evt::upper_bound_tgpd(&fit, &odds, sample, alpha).ok().map(|b| b.value);
                    push(Estimator::TruncatedGpd, k, finite(est.estimate), bound, true);
                }
                Err(_) => push(Estimator::TruncatedGpd, k, None, None, true),
            }
        }
        if k >= evt::pareto::MIN_K && k < n {
            match evt::fit_truncated_pareto(&energies, k) {
                Ok(fit) => {
                    let est = evt::endpoint_tpareto(&fit, sample, clamp);
                    let odds = evt::truncation_odds_tpareto(&fit);
                    let bound = evt::upper_bound_tpareto(&fit, &odds, sample, alpha)
                        .ok()
                        .map(|b| b.value);
                    push(Estimator::TruncatedPareto, k, finite(est.estimate), bound, true);
                }
                Err(_) => push(Estimator::TruncatedPareto, k, None, None, true),
            }
        }
    }

    let mut fl_ks: Vec<usize> = config.k_grid.iter().copied().filter(|&k| k <= n).collect();
    if !fl_ks.contains(&n) {
        fl_ks.push(n);
    }
    for &k in &fl_ks {
        let fl = classical::fl_endpoint(sample, k).ok().and_then(|r| finite(r.estimate));
        push(Estimator::FewLargest, k, fl, None, false);
        if k >= 2 {
            let efl = classical::efl_endpoint(sample, k).ok().and_then(|r| finite(r.estimate));
            push(Estimator::ExtendedFewLargest, k, efl, None, false);
        }
    }

    let npg = classical::npg_endpoint(sample, &config.np)
        .ok()
        .and_then(|r| finite(r.endpoint.estimate));
    push(Estimator::NonParametricGaussian, n, npg, None, false);

    let npos = classical::npos_endpoint(sample).ok().and_then(|r| finite(r.estimate));
    let npos_bound = classical::npos_upper_bound(sample, alpha, &config.np)
        .ok()
        .map(|b| b.value);
    push(Estimator::NonParametricOrderStatistics, n, npos, npos_bound, true);

    let rw = classical::rw_endpoint(sample).ok().and_then(|r| finite(r.estimate));
    push(Estimator::RobsonWhitlock, 2, rw, None, false);
    let rwc = classical::rwc_endpoint(sample, &config.np)
        .ok()
        .and_then(|r| finite(r.estimate));
    push(Estimator::RobsonWhitlockCooke, 2, rwc, None, false);

    match classical::ks_endpoint(sample, &config.ks) {
        Ok(ks) => {
            let bound = classical::pisarenko_upper_bound(sample, ks.beta, alpha)
                .ok()
                .map(|b| b.value);
            push(Estimator::KijkoSellevoll, n, finite(ks.endpoint.estimate), bound, true);
        }
        Err(_) => push(Estimator::KijkoSellevoll, n, None, None, true),
    }
    out
}

/// Aggregated metrics for one `(estimator, k)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorMetrics {
    pub estimator: Estimator,
    pub k: usize,
    /// `mean(T_hat) / T_M`.
    pub relative_mean: f64,
    /// `mean((T_hat - T_M)^2) / T_M^2`.
    pub relative_mse: f64,
    /// Replicates contributing to mean and MSE.
    pub used: usize,
    /// Replicates where the estimator errored or returned `+inf`.
    pub failure_count: usize,
    /// Fraction of bounds `>= T_M` (infinite bounds cover).
    pub coverage: Option<f64>,
    pub coverage_used: usize,
    /// Standard error of the relative mean.
    pub relative_mean_se: f64,
}

impl EstimatorMetrics {
    /// Binomial standard error of the coverage fraction.
    pub fn coverage_se(&self) -> Option<f64> {
        let p = self.coverage?;
        Some((p * (1.0 - p) / self.coverage_used.max(1) as f64).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: StudyConfig,
    pub metrics: Vec<EstimatorMetrics>,
}

impl SimulationReport {
    pub fn get(&self, estimator: Estimator, k: usize) -> Option<&EstimatorMetrics> {
        self.metrics.iter().find(|m| m.estimator == estimator && m.k == k)
    }
}

/// Aggregate per-replicate evaluations (in replicate order) into metrics.
pub fn aggregate(evaluations: &[Vec<Evaluation>], t_upper: f64) -> Vec<EstimatorMetrics> {
    let mut groups: BTreeMap<(Estimator, usize), Vec<&Evaluation>> = BTreeMap::new();
    for replicate in evaluations {
        for e in replicate {
            groups.entry((e.estimator, e.k)).or_default().push(e);
        }
    }
    groups
        .into_iter()
        .map(|((estimator, k), evals)| {
            let estimates: Vec<f64> = evals.iter().filter_map(|e| e.estimate).collect();
            let used = estimates.len();
            let mean = neumaier_sum(estimates.iter().copied()) / used.max(1) as f64;
            let mse = neumaier_sum(estimates.iter().map(|t| (t - t_upper).powi(2))) / used.max(1) as f64;
            let var = if used > 1 {
                neumaier_sum(estimates.iter().map(|t| (t - mean).powi(2))) / (used - 1) as f64
            } else {
                0.0
            };
            let has_bound = evals.iter().any(|e| e.has_bound);
            let bounds: Vec<f64> = evals.iter().filter_map(|e| e.bound).collect();
            let coverage = (has_bound && !bounds.is_empty())
                .then(|| bounds.iter().filter(|&&b| b >= t_upper).count() as f64 / bounds.len() as f64);
            let nan_if_empty = |v: f64| if used == 0 { f64::NAN } else { v };
            EstimatorMetrics {
                estimator,
                k,
                relative_mean: nan_if_empty(mean / t_upper),
                relative_mse: nan_if_empty(mse / (t_upper * t_upper)),
                used,
                failure_count: evals.len() - used,
                coverage,
                coverage_used: bounds.len(),
                relative_mean_se: nan_if_empty((var / used.max(1) as f64).sqrt() / t_upper),
            }
        })
        .collect()
}

/// Run the Monte Carlo study. Replicates run in parallel; the report is
/// identical for a given configuration regardless of thread count.
pub fn run_study(config: &StudyConfig) -> Result<SimulationReport> {
    config.validate()?;
    let evaluations: Vec<Vec<Evaluation>> = (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let sample = sample_truncated_gr(
                &config.params,
                config.sample_size,
                replicate_seed(config.master_seed, r),
            );
            evaluate_all(&sample, config)
        })
        .collect();
    Ok(SimulationReport {
        config: config.clone(),
        metrics: aggregate(&evaluations, config.params.t_upper),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_endpoints() {
        let p = TruncatedGRParams::new(2.1203, 1.5, 3.75).unwrap();
        assert_eq!(p.quantile(0.0), 1.5);
        assert!((p.quantile(1.0 - 1e-15) - 3.75).abs() < 1e-9);
        assert!((p.cdf(p.quantile(0.3)) - 0.3).abs() < 1e-14);
    }

    #[test]
    fn paper_endpoints_are_parent_quantiles() {
        for (t, level) in [(3.75, 0.992), (4.0, 0.995), (4.5, 0.998)] {
            let p = TruncatedGRParams::new(2.1203, 1.5, t).unwrap();
            assert!((p.parent_quantile_level() - level).abs() < 5e-4, "{t}");
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = TruncatedGRParams::new(2.0, 1.5, 4.0).unwrap();
        assert_eq!(sample_truncated_gr(&p, 50, 3), sample_truncated_gr(&p, 50, 3));
        assert_ne!(sample_truncated_gr(&p, 50, 3), sample_truncated_gr(&p, 50, 4));
        let s = sample_truncated_gr(&p, 50, 3);
        assert!(s.values().iter().all(|&v| (1.5..=4.0).contains(&v)));
    }

    #[test]
    fn invalid_params() {
        assert!(TruncatedGRParams::new(0.0, 1.5, 4.0).is_err());
        assert!(TruncatedGRParams::new(2.0, 1.5, 1.5).is_err());
        let mut c = StudyConfig::paper_defaults(3.75).unwrap();
        c.replicates = 0;
        assert!(run_study(&c).is_err());
        c.replicates = 1;
        c.sample_size = 5;
        assert!(run_study(&c).is_err());
    }

    #[test]
    fn exact_estimator_gives_unit_relative_mean() {
        let evals = vec![vec![Evaluation {
            estimator: Estimator::RobsonWhitlock,
            k: 2,
            estimate: Some(3.75),
            bound: None,
            has_bound: false,
        }]];
        let m = aggregate(&evals, 3.75);
        assert_eq!(m[0].relative_mean, 1.0);
        assert_eq!(m[0].relative_mse, 0.0);
        assert_eq!(m[0].coverage, None);
    }

    #[test]
    fn infinite_bound_covers_and_failures_counted() {
        let mk = |estimate, bound| Evaluation {
            estimator: Estimator::TruncatedGpd,
            k: 10,
            estimate,
            bound,
            has_bound: true,
        };
        let evals = vec![
            vec![mk(Some(3.8), Some(f64::INFINITY))],
            vec![mk(None, Some(3.7))],
            vec![mk(Some(3.7), Some(3.9))],
        ];
        let m = &aggregate(&evals, 3.75)[0];
        assert_eq!(m.used, 2);
        assert_eq!(m.failure_count, 1);
        assert!((m.coverage.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn default_grid_shape() {
        let g = default_k_grid(250);
        assert_eq!(g.first(), Some(&10));
        assert_eq!(g.last(), Some(&249));
        assert!(g.contains(&120) && g.contains(&240));
    }
}

//! Kijko-Sellevoll estimator and the Pisarenko parametric bound, both based
//! on the doubly truncated Gutenberg-Richter law.

use serde::Serialize;

use crate::catalog::MagnitudeSample;
use crate::classical::require_n;
use crate::endpoint::{Bound, EndpointResult, Estimator};
use crate::error::{Error, Result};
use crate::evt::check_alpha;
use crate::special::scaled_exp_integral_e1;

/// Gutenberg-Richter rate at a given endpoint iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GRFit {
    pub beta: f64,
    /// Aki-Utsu estimate `1 / (mean - t_M)`.
    pub beta0: f64,
    pub t_m: f64,
    pub t_upper: f64,
}

/// Taylor-corrected Aki-Utsu rate for the GR law truncated at `t_upper`:
/// `beta = beta0 (1 - beta0 L e^(-beta0 L) / (1 - e^(-beta0 L)))`, `L = t_upper - t_M`.
pub fn ks_beta(sample: &MagnitudeSample, t_upper: f64) -> Result<GRFit> {
    let t_m = sample.t_m();
    let excess = sample.mean() - t_m;
    if !(excess > 0.0) {
        return Err(Error::domain("sample mean must exceed the completeness threshold"));
    }
    let beta0 = 1.0 / excess;
    let span = t_upper - t_m;
    let beta = if span.is_infinite() {
        beta0
    } else {
        // beta0 L e^{-x} / (1 - e^{-x}) = x / (e^x - 1) with x = beta0 L
        let x = beta0 * span;
        let correction = if x > 1e-12 { x / x.exp_m1() } else { 1.0 };
        beta0 * (1.0 - correction)
    };
    Ok(GRFit {
        beta,
        beta0,
        t_m,
        t_upper,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates above `t_M + ceiling` count as divergence.
    pub ceiling: f64,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self {
            tol: 1e-5,
            max_iter: 200,
            ceiling: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsResult {
    pub endpoint: EndpointResult,
    /// Rate at the final iterate.
    pub beta: f64,
    pub iterations: usize,
}

/// One Kijko-Sellevoll step from `t_upper`:
/// `M_{n,n} + (E1(n2) - E1(n1)) / (beta e^(-n2)) + t_M e^(-n)`.
pub fn ks_update(sample: &MagnitudeSample, t_upper: f64) -> Result<(f64, f64)> {
    let fit = ks_beta(sample, t_upper)?;
    let beta = fit.beta;
    if !(beta > 0.0) {
        return Err(Error::domain(format!("non-positive rate {beta}")));
    }
    let n = sample.n() as f64;
    let x = beta * (t_upper - sample.t_m());
    if !(x > 0.0) {
        return Err(Error::domain("endpoint iterate must exceed the threshold"));
    }
    let n1 = n / -(-x).exp_m1();
    let n2 = n1 * (-x).exp();
    // (E1(n2) - E1(n1)) e^{n2} = s(n2) - s(n1) e^{n2 - n1}, s(z) = e^z E1(z)
    let diff = scaled_exp_integral_e1(n2)? - scaled_exp_integral_e1(n1)? * (n2 - n1).exp();
    Ok((sample.max() + diff / beta + sample.t_m() * (-n).exp(), beta))
}

/// Kijko-Sellevoll endpoint by fixed-point iteration from `T = M_{n,n}`,
/// refreshing the rate before every endpoint update.
pub fn ks_endpoint(sample: &MagnitudeSample, config: &KsConfig) -> Result<KsResult> {
    require_n(sample, 10, "Kijko-Sellevoll")?;
    if !(config.tol > 0.0) || config.max_iter == 0 {
        return Err(Error::invalid("tolerance and max_iter must be positive"));
    }
    let max = sample.max();
    let ceiling = sample.t_m() + config.ceiling;
    let mut t = max;
    let mut trace = Vec::new();
    for iteration in 1..=config.max_iter {
        let (next, beta) = ks_update(sample, t)?;
        if !next.is_finite() || next > ceiling {
            return Err(Error::Diverged(format!(
                "Kijko-Sellevoll iterate {next} exceeded ceiling {ceiling} after {iteration} steps"
            )));
        }
        if (next - t).abs() < config.tol {
            return Ok(KsResult {
                endpoint: EndpointResult::new(Estimator::KijkoSellevoll, Some(sample.n()), next, max, false),
                beta,
                iterations: iteration,
            });
        }
        trace.push(next);
        t = next;
    }
    let tail: Vec<String> = trace.iter().rev().take(4).map(|v| format!("{v:.6}")).collect();
    Err(Error::Diverged(format!(
        "Kijko-Sellevoll did not converge in {} steps (last iterates {})",
        config.max_iter,
        tail.join(", ")
    )))
}

/// Pisarenko bound
/// `t_M - (1/beta) ln((e^(-beta (M_{n,n} - t_M)) - 1) / alpha^(1/n) + 1)`,
/// `+inf` when the log argument is not positive.
pub fn pisarenko_upper_bound(sample: &MagnitudeSample, beta: f64, alpha: f64) -> Result<Bound> {
    check_alpha(alpha)?;
    if !(beta > 0.0) {
        return Err(Error::invalid("beta must be positive"));
    }
    let n = sample.n() as f64;
    let x = beta * (sample.max() - sample.t_m());
    let log_root = alpha.ln() / n;
    // (alpha^(1/n) - (1 - e^-x)) / alpha^(1/n), numerator without cancellation
    let numerator = log_root.exp_m1() + (-x).exp();
    let value = if numerator > 0.0 {
        sample.t_m() - (numerator.ln() - log_root) / beta
    } else {
        f64::INFINITY
    };
    Ok(Bound { alpha, value })
}

/// Largest `alpha` at which the Pisarenko bound is infinite:
/// `(1 - e^(-beta (M_{n,n} - t_M)))^n`.
pub fn pisarenko_alpha_threshold(sample: &MagnitudeSample, beta: f64) -> f64 {
    let x = beta * (sample.max() - sample.t_m());
    (sample.n() as f64 * (-(-x).exp()).ln_1p()).exp()
}

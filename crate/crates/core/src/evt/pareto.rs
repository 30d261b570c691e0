//! Truncated Pareto tail on the energy scale.
//!
//! With `R_k = E_{n-k,n} / E_{n,n}` and `H_{k,n}` the Hill statistic, the
//! shape estimate solves
//!
//! ```text
//! H_{k,n} = xi + R_k^(1/xi) ln R_k / (1 - R_k^(1/xi))
//! ```
//!
//! which is the likelihood equation of the Pareto tail truncated at the
//! largest observation. Energies are handled through their logarithms.

use serde::Serialize;

use crate::catalog::MagnitudeSample;
use crate::diagnostics::hill;
use crate::endpoint::{Bound, EndpointResult, Estimator};
use crate::error::{Error, Result};
use crate::evt::{check_alpha, OddsScale, TruncationOdds, TruncationTest};
use crate::numeric::brent;

pub const MIN_K: usize = 2;
pub const XI_BRACKET: (f64, f64) = (1e-6, 20.0);
pub const ROOT_TOL: f64 = 1e-10;

/// Magnitude units per natural-log unit of energy, `1 / (1.5 ln 10)`.
pub(crate) fn log_energy_to_magnitude_scale() -> f64 {
    1.0 / (1.5 * std::f64::consts::LN_10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedParetoFit {
    pub k: usize,
    pub n: usize,
    /// Shape of the untruncated parent energy distribution.
    pub xi_plus: f64,
    /// `R_k = E_{n-k,n} / E_{n,n}`.
    pub r_k: f64,
    /// `1 / R_k`.
    pub rho_hat: f64,
    pub hill: f64,
    /// `ln E_{n-k,n}`.
    pub log_threshold: f64,
}

impl TruncatedParetoFit {
    /// `R_k^(1/xi)`.
    pub fn scaled_ratio(&self) -> f64 {
        (self.r_k.ln() / self.xi_plus).exp()
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < MIN_K || k + 1 > n {
        return Err(Error::invalid(format!(
            "truncated Pareto fit needs {MIN_K} <= k <= n-1 (k = {k}, n = {n})"
        )));
    }
    Ok(())
}

/// Right-hand side minus left-hand side of the shape equation; `ln_r < 0`.
fn shape_equation(xi: f64, ln_r: f64, hill: f64) -> f64 {
    // R^(1/xi) ln R / (1 - R^(1/xi)) = ln R / (exp(-ln R / xi) - 1)
    xi + ln_r / (-ln_r / xi).exp_m1() - hill
}

/// Fit on an ascending sample of positive energies.
pub fn fit_truncated_pareto(energies: &[f64], k: usize) -> Result<TruncatedParetoFit> {
    let n = energies.len();
    check_k(n, k)?;
    if energies.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("energies must be in ascending order"));
    }
    let h = hill(energies, k)?;
    let log_threshold = energies[n - k - 1].ln();
    let ln_r = log_threshold - energies[n - 1].ln();
    if !(ln_r < 0.0) {
        return Err(Error::Fit("top k+1 energies are all equal".into()));
    }
    let xi = brent(
        |xi| shape_equation(xi, ln_r, h),
        XI_BRACKET.0,
        XI_BRACKET.1,
        ROOT_TOL,
        500,
    )?;
    let r_k = ln_r.exp();
    Ok(TruncatedParetoFit {
        k,
        n,
        xi_plus: xi,
        r_k,
        rho_hat: 1.0 / r_k,
        hill: h,
        log_threshold,
    })
}

/// Endpoint: `T_E = E_{n-k,n} [(R^(1/xi) - 1/(k+1)) / (1 - 1/(k+1))]^(-xi)`,
/// transformed to magnitude. Infinite when `R^(1/xi) <= 1/(k+1)`.
pub fn endpoint_tpareto(fit: &TruncatedParetoFit, sample: &MagnitudeSample, clamp: bool) -> EndpointResult {
    let raw = endpoint_from_ratio(fit.k, fit.xi_plus, fit.scaled_ratio(), sample.from_top(fit.k));
    EndpointResult::new(Estimator::TruncatedPareto, Some(fit.k), raw, sample.max(), clamp)
}

/// Magnitude endpoint given `q = R_k^(1/xi)` and the threshold magnitude.
pub(crate) fn endpoint_from_ratio(k: usize, xi: f64, q: f64, threshold_magnitude: f64) -> f64 {
    let inv = 1.0 / (k as f64 + 1.0);
    if q <= inv {
        return f64::INFINITY;
    }
    let log_factor = -xi * ((q - inv) / (1.0 - inv)).ln();
    threshold_magnitude + log_factor * log_energy_to_magnitude_scale()
}

/// Truncation odds `max{0, (k+1)/(n+1) (R^(1/xi) - 1/(k+1)) / (1 - R^(1/xi))}`.
pub fn truncation_odds_tpareto(fit: &TruncatedParetoFit) -> TruncationOdds {
    let k1 = fit.k as f64 + 1.0;
    let q = fit.scaled_ratio();
    let value = (k1 / (fit.n as f64 + 1.0)) * (q - 1.0 / k1) / (1.0 - q);
    TruncationOdds::new(value, OddsScale::EnergyPareto)
}

/// Upper confidence bound on the magnitude scale at level `alpha`.
pub fn upper_bound_tpareto(
    fit: &TruncatedParetoFit,
    odds: &TruncationOdds,
    sample: &MagnitudeSample,
    alpha: f64,
) -> Result<Bound> {
    check_alpha(alpha)?;
    let endpoint = endpoint_tpareto(fit, sample, false).raw;
    if !endpoint.is_finite() || odds.value <= 0.0 {
        return Ok(Bound {
            alpha,
            value: f64::INFINITY,
        });
    }
    let k1 = fit.k as f64 + 1.0;
    let c = k1 / ((fit.n as f64 + 1.0) * odds.value);
    let spread = c * fit.xi_plus / k1 * log_energy_to_magnitude_scale();
    Ok(Bound {
        alpha,
        value: endpoint - (alpha.ln() + 1.0) * spread,
    })
}

/// Test for truncation of a Pareto tail: `L = (k+1) R_k^(1/H_{k,n})`,
/// `p = exp(-L)`.
pub fn test_truncation_pareto(energies: &[f64], k: usize, alpha: f64) -> Result<TruncationTest> {
    let n = energies.len();
    check_k(n, k)?;
    check_alpha(alpha)?;
    let h = hill(energies, k)?;
    let ln_r = energies[n - k - 1].ln() - energies[n - 1].ln();
    let statistic = if h > 0.0 {
        (k as f64 + 1.0) * (ln_r / h).exp()
    } else {
        // all top values equal: R = 1
        k as f64 + 1.0
    };
    Ok(TruncationTest::from_statistic(statistic, alpha))
}

//! Truncated generalised Pareto tail on the magnitude scale.
//!
//! The `k` excesses `e_j = M_{n-j+1,n} - M_{n-k,n}` are modelled by a GPD
//! right-truncated at the largest excess `E1`:
//!
//! ```text
//! f(e) = (1/sigma) (1 + xi e / sigma)^(-1/xi - 1) / (1 - (1 + xi E1 / sigma)^(-1/xi)),  0 < e <= E1
//! ```
//!
//! Internally the fit runs over `(xi, ln sigma)`; `tau = xi / sigma` is
//! derived. All `(1 + xi x)^(-1/xi)` evaluations go through `log1p(x)/x`
//! style helpers so the exponential limit `xi -> 0` is continuous.

use serde::Serialize;

use crate::catalog::MagnitudeSample;
use crate::endpoint::{Bound, EndpointResult, Estimator};
use crate::error::{Error, Result};
use crate::evt::{check_alpha, OddsScale, TruncationOdds, TruncationTest};
use crate::numeric::nelder_mead;

/// Shape values at or below this are infeasible (likelihood unbounded).
pub const XI_MIN: f64 = -1.0;
pub const MIN_K: usize = 4;

/// `ln(1 + x) / x`, equal to 1 at `x = 0`.
fn log1p_ratio(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x / 2.0 + x * x / 3.0
    } else {
        x.ln_1p() / x
    }
}

/// `(exp(y) - 1) / y`, equal to 1 at `y = 0`.
fn expm1_ratio(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 + y / 2.0 + y * y / 6.0
    } else {
        y.exp_m1() / y
    }
}

/// `ln (1 + xi e / sigma)^(-1/xi)`; tends to `-e/sigma` as `xi -> 0`.
/// Returns `-inf` outside the support.
pub fn log_gpd_survival(xi: f64, sigma: f64, e: f64) -> f64 {
    let x = xi * e / sigma;
    if x <= -1.0 {
        return f64::NEG_INFINITY;
    }
    -(e / sigma) * log1p_ratio(x)
}

/// Untruncated GPD log-likelihood of positive excesses.
pub fn gpd_log_likelihood(excesses: &[f64], xi: f64, sigma: f64) -> f64 {
    if !(sigma > 0.0) || xi <= XI_MIN {
        return f64::NEG_INFINITY;
    }
    let mut ll = 0.0;
    for &e in excesses {
        let x = xi * e / sigma;
        if x <= -1.0 {
            return f64::NEG_INFINITY;
        }
        // -(1/xi + 1) ln(1 + x) = -(e/sigma) log1p(x)/x - log1p(x)
        ll += -sigma.ln() - (e / sigma) * log1p_ratio(x) - x.ln_1p();
    }
    ll
}

/// Log-likelihood of the GPD truncated at the largest excess.
pub fn truncated_gpd_log_likelihood(excesses: &[f64], xi: f64, sigma: f64) -> f64 {
    let max = excesses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let base = gpd_log_likelihood(excesses, xi, sigma);
    if !base.is_finite() {
        return f64::NEG_INFINITY;
    }
    let log_tail = log_gpd_survival(xi, sigma, max);
    let retained = -log_tail.exp_m1();
    if !(retained > 0.0) {
        return f64::NEG_INFINITY;
    }
    base - excesses.len() as f64 * retained.ln()
}

/// Top-`k` excesses over `M_{n-k,n}`, largest first.
pub fn excesses(sample: &MagnitudeSample, k: usize) -> Vec<f64> {
    let threshold = sample.from_top(k);
    (0..k).map(|i| sample.from_top(i) - threshold).collect()
}

fn check_k(sample: &MagnitudeSample, k: usize) -> Result<()> {
    if k < MIN_K || k + 1 > sample.n() {
        return Err(Error::invalid(format!(
            "GPD fit needs {MIN_K} <= k <= n-1 (k = {k}, n = {})",
            sample.n()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpdParams {
    pub xi: f64,
    pub sigma: f64,
    pub log_likelihood: f64,
}

impl GpdParams {
    /// `tau = xi / sigma`.
    pub fn tau(&self) -> f64 {
        self.xi / self.sigma
    }
}

/// Fitted truncated GPD at one `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncatedGpdFit {
    pub k: usize,
    pub xi: f64,
    pub sigma: f64,
    /// `M_{n-k,n}`.
    pub threshold: f64,
    /// `E1 = M_{n,n} - M_{n-k,n}`.
    pub max_excess: f64,
    pub log_likelihood: f64,
}

impl TruncatedGpdFit {
    /// `tau = xi / sigma`, per magnitude unit.
    pub fn tau(&self) -> f64 {
        self.xi / self.sigma
    }

    /// `(1 + tau E1)^(-1/xi)`: fitted parent survival at the largest excess.
    pub fn survival_at_max(&self) -> f64 {
        log_gpd_survival(self.xi, self.sigma, self.max_excess).exp()
    }
}

/// Multi-start Nelder-Mead over `(xi, ln sigma)` followed by a Newton polish.
fn maximise<F: Fn(f64, f64) -> f64>(loglik: F, excesses: &[f64]) -> Result<GpdParams> {
    let mean = excesses.iter().sum::<f64>() / excesses.len() as f64;
    let max = excesses.iter().copied().fold(0.0, f64::max);
    if !(mean > 0.0) {
        return Err(Error::Fit("excesses are all zero".into()));
    }
    let objective = |p: &[f64]| -> f64 {
        let ll = loglik(p[0], p[1].exp());
        if ll.is_finite() {
            -ll
        } else {
            f64::INFINITY
        }
    };

    let starts: [f64; 5] = [0.0, 0.25, -0.25, 0.75, -0.6];
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &xi0 in &starts {
        // pick a scale that keeps the start feasible
        let mut sigma0 = mean * (1.0 - xi0).max(0.2);
        if xi0 < 0.0 {
            sigma0 = sigma0.max(-xi0 * max * 1.05);
        }
        let start = [xi0, sigma0.ln()];
        if !objective(&start).is_finite() {
            continue;
        }
        let m = nelder_mead(objective, &start, &[0.1, 0.2], 1e-8, 2000);
        if m.value.is_finite() && best.as_ref().is_none_or(|(_, v)| m.value < *v) {
            best = Some((m.x, m.value));
        }
    }
    let (x0, _) = best.ok_or_else(|| Error::Fit("no feasible start for GPD likelihood".into()))?;
    // restart from the best coarse optimum to escape a collapsed simplex
    let m = nelder_mead(objective, &x0, &[0.02, 0.05], 1e-13, 4000);
    let (mut x, mut value) = (m.x, m.value);
    newton_polish(&objective, &mut x, &mut value);
    Ok(GpdParams {
        xi: x[0],
        sigma: x[1].exp(),
        log_likelihood: -value,
    })
}

/// Damped Newton steps with central finite differences on a smooth 2-d
/// objective; stops when no step improves.
fn newton_polish<F: Fn(&[f64]) -> f64>(f: &F, x: &mut [f64], value: &mut f64) {
    let h = 1e-5;
    for _ in 0..30 {
        let at = |dx: f64, dy: f64| f(&[x[0] + dx, x[1] + dy]);
        let (fxp, fxm, fyp, fym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
        let (fpp, fpm, fmp, fmm) = (at(h, h), at(h, -h), at(-h, h), at(-h, -h));
        if ![fxp, fxm, fyp, fym, fpp, fpm, fmp, fmm].iter().all(|v| v.is_finite()) {
            return;
        }
        let g = [(fxp - fxm) / (2.0 * h), (fyp - fym) / (2.0 * h)];
        let hxx = (fxp - 2.0 * *value + fxm) / (h * h);
        let hyy = (fyp - 2.0 * *value + fym) / (h * h);
        let hxy = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        let det = hxx * hyy - hxy * hxy;
        if g[0].abs().max(g[1].abs()) < 1e-10 {
            return;
        }
        let step = if hxx > 0.0 && det > 0.0 {
            [-(hyy * g[0] - hxy * g[1]) / det, -(hxx * g[1] - hxy * g[0]) / det]
        } else {
            [-g[0] * 1e-3, -g[1] * 1e-3]
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let cand = [x[0] + t * step[0], x[1] + t * step[1]];
            let v = f(&cand);
            if v.is_finite() && v <= *value {
                x[0] = cand[0];
                x[1] = cand[1];
                *value = v;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            return;
        }
    }
}

/// Maximum likelihood fit of the truncated GPD to the top `k` excesses.
pub fn fit_truncated_gpd(sample: &MagnitudeSample, k: usize) -> Result<TruncatedGpdFit> {
    check_k(sample, k)?;
    let ex = excesses(sample, k);
    let params = maximise(|xi, sigma| truncated_gpd_log_likelihood(&ex, xi, sigma), &ex)?;
    Ok(TruncatedGpdFit {
        k,
        xi: params.xi,
        sigma: params.sigma,
        threshold: sample.from_top(k),
        max_excess: ex[0],
        log_likelihood: params.log_likelihood,
    })
}

/// Maximum likelihood fit of the (untruncated) GPD to positive excesses.
pub fn fit_gpd(excesses: &[f64]) -> Result<GpdParams> {
    if excesses.len() < 2 {
        return Err(Error::invalid("GPD fit needs at least two excesses"));
    }
    maximise(|xi, sigma| gpd_log_likelihood(excesses, xi, sigma), excesses)
}

/// Endpoint estimate
/// `M_{n-k,n} + (sigma/xi) [((1 - 1/k) / ((1 + tau E1)^(-1/xi) - 1/k))^xi - 1]`,
/// `+inf` when `(1 + tau E1)^(-1/xi) <= 1/k`.
pub fn endpoint_tgpd(fit: &TruncatedGpdFit, sample: &MagnitudeSample, clamp: bool) -> EndpointResult {
    let k = fit.k as f64;
    let p = fit.survival_at_max();
    let raw = if p <= 1.0 / k {
        f64::INFINITY
    } else {
        let log_a = (1.0 - 1.0 / k).ln() - (p - 1.0 / k).ln();
        fit.threshold + fit.sigma * log_a * expm1_ratio(fit.xi * log_a)
    };
    EndpointResult::new(Estimator::TruncatedGpd, Some(fit.k), raw, sample.max(), clamp)
}

/// Truncation odds `max{0, (k+1)/(n+1) (p - 1/(k+1)) / (1 - p)}` with
/// `p = (1 + tau E1)^(-1/xi)`.
pub fn truncation_odds_tgpd(fit: &TruncatedGpdFit, sample: &MagnitudeSample) -> TruncationOdds {
    let k1 = fit.k as f64 + 1.0;
    let p = fit.survival_at_max();
    let value = (k1 / (sample.n() as f64 + 1.0)) * (p - 1.0 / k1) / (1.0 - p);
    TruncationOdds::new(value, OddsScale::MagnitudeGpd)
}

/// Upper confidence bound at level `alpha` (coverage `1 - alpha`).
/// Infinite when the truncation odds are zero or the endpoint is infinite.
pub fn upper_bound_tgpd(
    fit: &TruncatedGpdFit,
    odds: &TruncationOdds,
    sample: &MagnitudeSample,
    alpha: f64,
) -> Result<Bound> {
    check_alpha(alpha)?;
    let endpoint = endpoint_tgpd(fit, sample, false).raw;
    if !endpoint.is_finite() || odds.value <= 0.0 {
        return Ok(Bound {
            alpha,
            value: f64::INFINITY,
        });
    }
    let k1 = fit.k as f64 + 1.0;
    let c = k1 / ((sample.n() as f64 + 1.0) * odds.value);
    // xi / tau = sigma
    let spread = c / k1 * (1.0 + c).powf(fit.xi) * fit.sigma;
    Ok(Bound {
        alpha,
        value: endpoint - (alpha.ln() + 1.0) * spread,
    })
}

/// Test for truncation based on the untruncated GPD fit: `L = (k+1)(1 + tau0 E1)^(-1/xi0)`,
/// `p = exp(-L)`. Small p-values indicate a maximum too small for an
/// untruncated tail.
pub fn test_truncation_gpd(sample: &MagnitudeSample, k: usize, alpha: f64) -> Result<TruncationTest> {
    check_k(sample, k)?;
    check_alpha(alpha)?;
    let ex = excesses(sample, k);
    let params = fit_gpd(&ex)?;
    let survival = log_gpd_survival(params.xi, params.sigma, ex[0]).exp();
    Ok(TruncationTest::from_statistic((k as f64 + 1.0) * survival, alpha))
}

//! Non-parametric and parametric endpoint estimators built on the top order
//! statistics and on the truncated Gutenberg-Richter law.

mod kijko;
mod npg;

pub use kijko::{
    ks_beta, ks_endpoint, ks_update, pisarenko_alpha_threshold, pisarenko_upper_bound, GRFit, KsConfig, KsResult,
};
pub use npg::{kernel_delta, lscv_bandwidth, lscv_score, npg_endpoint, NpgResult};

use serde::Serialize;

use crate::catalog::MagnitudeSample;
use crate::endpoint::{Bound, EndpointResult, Estimator};
use crate::error::{Error, Result};
use crate::evt::check_alpha;

/// Settings shared by the non-parametric estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NPConfig {
    /// Tail order `nu`; 1 for upper truncated distributions.
    pub nu: f64,
    /// Kernel bandwidth; chosen by least-squares cross-validation when `None`.
    pub bandwidth: Option<f64>,
    /// Quadrature nodes for the N-P-G integral (rounded up to a multiple of 16).
    pub quadrature_points: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for NPConfig {
    fn default() -> Self {
        Self {
            nu: 1.0,
            bandwidth: None,
            quadrature_points: 512,
            max_iter: 200,
            tol: 1e-6,
        }
    }
}

impl NPConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::invalid("nu must be positive"));
        }
        if self.bandwidth.is_some_and(|h| !(h > 0.0)) {
            return Err(Error::invalid("bandwidth must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.quadrature_points == 0 || self.max_iter == 0 {
            return Err(Error::invalid("quadrature points and max_iter must be positive"));
        }
        Ok(())
    }
}

fn require_n(sample: &MagnitudeSample, min: usize, what: &str) -> Result<()> {
    if sample.n() < min {
        return Err(Error::invalid(format!("{what} needs n >= {min}, got {}", sample.n())));
    }
    Ok(())
}

/// Top spacing `M_{n,n} - M_{n-1,n}`.
fn top_spacing(sample: &MagnitudeSample) -> f64 {
    sample.max() - sample.from_top(1)
}

/// N-P-OS: `M_{n,n} + [M_{n,n} - (1 - e^-1) sum_{i=0}^{n-1} e^-i M_{n-i,n}]`.
///
/// Evaluated as `M_{n,n} + (1 - e^-1) sum_{i>=1} e^-i (M_{n,n} - M_{n-i,n}) + e^-n M_{n,n}`,
/// which has only non-negative terms.
pub fn npos_endpoint(sample: &MagnitudeSample) -> Result<EndpointResult> {
    require_n(sample, 2, "N-P-OS")?;
    let n = sample.n();
    let max = sample.max();
    let mut weight = 1.0;
    let mut sum = 0.0;
    for i in 1..n {
        weight *= (-1.0f64).exp();
        let term = weight * (max - sample.from_top(i));
        sum += term;
        if weight < 1e-300 {
            break;
        }
    }
    let delta = -(-1.0f64).exp_m1() * sum + (-(n as f64)).exp() * max;
    Ok(EndpointResult::new(
        Estimator::NonParametricOrderStatistics,
        Some(n),
        max + delta,
        max,
        false,
    ))
}

/// `(1 - alpha)^(-nu) - 1` inverted; reduces to `(1 - alpha)/alpha` at `nu = 1`.
fn cooke_factor(alpha: f64, nu: f64) -> f64 {
    if nu == 1.0 {
        (1.0 - alpha) / alpha
    } else {
        1.0 / ((1.0 - alpha).powf(-nu) - 1.0)
    }
}

/// Cooke's bound `M_{n,n} + (M_{n,n} - M_{n-1,n}) / ((1-alpha)^(-nu) - 1)`.
pub fn npos_upper_bound(sample: &MagnitudeSample, alpha: f64, config: &NPConfig) -> Result<Bound> {
    require_n(sample, 2, "N-P-OS bound")?;
    check_alpha(alpha)?;
    config.validate()?;
    Ok(Bound {
        alpha,
        value: sample.max() + top_spacing(sample) * cooke_factor(alpha, config.nu),
    })
}

/// FL: `M_{n,n} + (M_{n,n} - M_{n-k+1,n}) / k`, `1 <= k <= n`.
pub fn fl_endpoint(sample: &MagnitudeSample, k: usize) -> Result<EndpointResult> {
    if k == 0 || k > sample.n() {
        return Err(Error::invalid(format!(
            "FL needs 1 <= k <= n (k = {k}, n = {})",
            sample.n()
        )));
    }
    let max = sample.max();
    let raw = max + (max - sample.from_top(k - 1)) / k as f64;
    Ok(EndpointResult::new(Estimator::FewLargest, Some(k), raw, max, false))
}

/// EFL: `M_{n,n} + (M_{n,n} - mean(M_{n-1,n}, ..., M_{n-k+1,n})) / k`, `2 <= k <= n`.
pub fn efl_endpoint(sample: &MagnitudeSample, k: usize) -> Result<EndpointResult> {
    if k < 2 || k > sample.n() {
        return Err(Error::invalid(format!(
            "EFL needs 2 <= k <= n (k = {k}, n = {})",
            sample.n()
        )));
    }
    let max = sample.max();
    let mean = (1..k).map(|i| sample.from_top(i)).sum::<f64>() / (k - 1) as f64;
    let raw = max + (max - mean) / k as f64;
    Ok(EndpointResult::new(
        Estimator::ExtendedFewLargest,
        Some(k),
        raw,
        max,
        false,
    ))
}

/// R-W: `2 M_{n,n} - M_{n-1,n}`.
pub fn rw_endpoint(sample: &MagnitudeSample) -> Result<EndpointResult> {
    require_n(sample, 2, "R-W")?;
    let max = sample.max();
    Ok(EndpointResult::new(
        Estimator::RobsonWhitlock,
        Some(2),
        max + top_spacing(sample),
        max,
        false,
    ))
}

/// Robson-Whitlock bound `M_{n,n} + ((1 - alpha)/alpha)(M_{n,n} - M_{n-1,n})`.
pub fn rw_upper_bound(sample: &MagnitudeSample, alpha: f64) -> Result<Bound> {
    require_n(sample, 2, "R-W bound")?;
    check_alpha(alpha)?;
    Ok(Bound {
        alpha,
        value: sample.max() + top_spacing(sample) * cooke_factor(alpha, 1.0),
    })
}

/// R-W-C: `M_{n,n} + (M_{n,n} - M_{n-1,n}) / (2 nu)`.
pub fn rwc_endpoint(sample: &MagnitudeSample, config: &NPConfig) -> Result<EndpointResult> {
    require_n(sample, 2, "R-W-C")?;
    config.validate()?;
    let max = sample.max();
    Ok(EndpointResult::new(
        Estimator::RobsonWhitlockCooke,
        Some(2),
        max + top_spacing(sample) / (2.0 * config.nu),
        max,
        false,
    ))
}

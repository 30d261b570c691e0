//! Extreme value endpoint estimators for truncated tails.
//!
//! [`gpd`] works on the magnitudes directly; [`pareto`] works on released
//! energies and maps the endpoint back to magnitude.

pub mod gpd;
pub mod pareto;

use serde::Serialize;

use crate::error::{Error, Result};

pub use gpd::{
    endpoint_tgpd, fit_gpd, fit_truncated_gpd, test_truncation_gpd, truncation_odds_tgpd, upper_bound_tgpd,
    TruncatedGpdFit,
};
pub use pareto::{
    endpoint_tpareto, fit_truncated_pareto, test_truncation_pareto, truncation_odds_tpareto, upper_bound_tpareto,
    TruncatedParetoFit,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OddsScale {
    MagnitudeGpd,
    EnergyPareto,
}

/// Estimated odds of the probability mass removed by truncation,
/// `D_T = P(Y > T) / P(Y <= T)` for the untruncated parent `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationOdds {
    /// Clamped at zero.
    pub value: f64,
    pub scale: OddsScale,
}

impl TruncationOdds {
    pub fn new(value: f64, scale: OddsScale) -> Self {
        let value = if value.is_nan() { 0.0 } else { value.max(0.0) };
        Self { value, scale }
    }
}

/// Outcome of a test for upper truncation. Under the untruncated null the
/// statistic is approximately standard exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationTest {
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

impl TruncationTest {
    pub fn from_statistic(statistic: f64, alpha: f64) -> Self {
        let statistic = statistic.max(0.0);
        let p_value = (-statistic).exp();
        Self {
            statistic,
            p_value,
            reject: p_value < alpha,
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

//! Tail diagnostics: exponential and Pareto QQ coordinates, mean excess
//! values and the Hill statistic.

use serde::Serialize;

use crate::catalog::{magnitude_to_energy, MagnitudeSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QQKind {
    Exponential,
    Pareto,
}

impl QQKind {
    pub fn id(self) -> &'static str {
        match self {
            QQKind::Exponential => "exponential_qq",
            QQKind::Pareto => "pareto_qq",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QQPlotData {
    pub kind: QQKind,
    /// `(theoretical quantile, empirical quantile)` ordered by the first.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanExcessEntry {
    pub k: usize,
    /// `M_{n-k,n}`.
    pub threshold: f64,
    pub mean_excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanExcessData {
    pub entries: Vec<MeanExcessEntry>,
}

/// Standard exponential quantiles at plotting positions `i/(n+1)`.
fn exponential_positions(n: usize) -> impl Iterator<Item = f64> {
    (1..=n).map(move |i| -(-(i as f64) / (n as f64 + 1.0)).ln_1p())
}

fn require_n(sample: &MagnitudeSample, min: usize, what: &str) -> Result<()> {
    if sample.n() < min {
        return Err(Error::invalid(format!(
            "{what} needs at least {min} observations, got {}",
            sample.n()
        )));
    }
    Ok(())
}

/// Points `(-ln(1 - i/(n+1)), M_{i,n})`.
pub fn exponential_qq(sample: &MagnitudeSample) -> Result<QQPlotData> {
    require_n(sample, 2, "exponential QQ plot")?;
    Ok(QQPlotData {
        kind: QQKind::Exponential,
        points: exponential_positions(sample.n())
            .zip(sample.values().iter().copied())
            .collect(),
    })
}

/// Points `(-ln(1 - i/(n+1)), ln E_{i,n})` with `E` the released energy.
pub fn pareto_qq(sample: &MagnitudeSample) -> Result<QQPlotData> {
    require_n(sample, 2, "Pareto QQ plot")?;
    Ok(QQPlotData {
        kind: QQKind::Pareto,
        points: exponential_positions(sample.n())
            .zip(sample.values().iter().map(|&m| magnitude_to_energy(m).ln()))
            .collect(),
    })
}

/// Mean excess over `M_{n-k,n}` of the top `k` values, `k = 2..n-1`.
pub fn mean_excess(sample: &MagnitudeSample) -> Result<MeanExcessData> {
    require_n(sample, 3, "mean excess")?;
    Ok(MeanExcessData {
        entries: mean_excess_values(sample.values()),
    })
}

/// Mean excess on any ascending sample (ties allowed).
pub fn mean_excess_values(sorted: &[f64]) -> Vec<MeanExcessEntry> {
    let n = sorted.len();
    let mut entries = Vec::with_capacity(n.saturating_sub(2));
    let mut top_sum = sorted[n - 1];
    for k in 2..n {
        top_sum += sorted[n - k];
        let threshold = sorted[n - k - 1];
        entries.push(MeanExcessEntry {
            k,
            threshold,
            mean_excess: top_sum / k as f64 - threshold,
        });
    }
    entries
}

/// Hill statistic `H_{k,n} = (1/k) sum_{j=1..k} ln X_{n-j+1,n} - ln X_{n-k,n}`
/// on an ascending positive sample.
pub fn hill(sorted: &[f64], k: usize) -> Result<f64> {
    let n = sorted.len();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("Hill needs 1 <= k <= n-1 (k = {k}, n = {n})")));
    }
    if sorted.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("Hill statistic requires positive values"));
    }
    let base = sorted[n - k - 1].ln();
    let sum: f64 = sorted[n - k..].iter().map(|x| x.ln() - base).sum();
    Ok(sum / k as f64)
}

/// Hill statistics for all `k = 1..n-1` in one pass.
pub fn hill_path(sorted: &[f64]) -> Result<Vec<f64>> {
    if sorted.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("Hill statistic requires positive values"));
    }
    let n = sorted.len();
    let logs: Vec<f64> = sorted.iter().map(|x| x.ln()).collect();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut top = 0.0;
    for k in 1..n {
        top += logs[n - k];
        out.push(top / k as f64 - logs[n - k - 1]);
    }
    Ok(out)
}

//! Non-parametric Gaussian-kernel endpoint estimator (N-P-G).
//!
//! Iterates `T <- M_{n,n} + Delta(T)` with
//!
//! ```text
//! Delta(T) = int_{t_M}^{T} ( sum_i [Phi((m - M_i)/h) - Phi((t_M - M_i)/h)]
//!                          / sum_i [Phi((T - M_i)/h) - Phi((t_M - M_i)/h)] )^n dm
//! ```
//!
//! and a bandwidth `h` minimising the least-squares cross-validation score
//! of the Gaussian kernel density estimate.

use serde::Serialize;

use crate::catalog::MagnitudeSample;
use crate::classical::{require_n, NPConfig};
use crate::endpoint::{EndpointResult, Estimator};
use crate::error::{Error, Result};
use crate::numeric::gauss_legendre;
use crate::special::normal_cdf;

const GL_ORDER: usize = 16;
const BANDWIDTH_GRID: usize = 50;
const DISTANCE_BINS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NpgResult {
    pub endpoint: EndpointResult,
    pub bandwidth: f64,
    pub iterations: usize,
}

/// Least-squares cross-validation score of a Gaussian KDE with bandwidth `h`
/// on ascending `values`.
pub fn lscv_score(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let nf = n as f64;
    // pairs further apart than this contribute below exp(-40)
    let cutoff = (160.0f64).sqrt() * h;
    let inv = 1.0 / (4.0 * h * h);
    let mut wide = 0.0; // sum_{i<j} exp(-d^2 / 4h^2)
    let mut narrow = 0.0; // sum_{i<j} exp(-d^2 / 2h^2)
    for i in 0..n {
        for j in (i + 1)..n {
            let d = values[j] - values[i];
            if d > cutoff {
                break;
            }
            let u = (-d * d * inv).exp();
            wide += u;
            narrow += u * u;
        }
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    (nf + 2.0 * wide) / (2.0 * sqrt_pi * nf * nf * h) - 4.0 * narrow / (sqrt_2pi * nf * (nf - 1.0) * h)
}

/// Pair counts by binned distance: bin `i` holds pairs about `i * width` apart.
struct BinnedDistances {
    width: f64,
    counts: Vec<f64>,
}

impl BinnedDistances {
    fn new(values: &[f64]) -> Self {
        let (min, max) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let width = (max - min) * 1.01 / DISTANCE_BINS as f64;
        let bins: Vec<i64> = values.iter().map(|&v| ((v - min) / width) as i64).collect();
        let mut counts = vec![0.0; DISTANCE_BINS + 1];
        for i in 0..bins.len() {
            for j in (i + 1)..bins.len() {
                counts[(bins[i] - bins[j]).unsigned_abs() as usize] += 1.0;
            }
        }
        Self { width, counts }
    }

    /// [`lscv_score`] with distances rounded to their bin.
    fn score(&self, n: usize, h: f64) -> f64 {
        let nf = n as f64;
        let mut sum = 0.0;
        for (i, &c) in self.counts.iter().enumerate() {
            let d = i as f64 * self.width / h;
            let d2 = d * d;
            if d2 >= 1000.0 {
                break;
            }
            sum += c * ((-d2 / 4.0).exp() - 8f64.sqrt() * (-d2 / 2.0).exp());
        }
        (0.5 + sum / nf) / (nf * h * std::f64::consts::PI.sqrt())
    }
}

/// Minimiser of the binned cross-validation score over 50 log-spaced
/// bandwidths spanning `[0.1, 1] * 1.144 s n^(-1/5)`, the usual unbiased
/// cross-validation range.
pub fn lscv_bandwidth(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::invalid("bandwidth selection needs n >= 2"));
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::invalid("bandwidth grid is degenerate (zero spread)"));
    }
    let h_max = 1.144 * sd * nf.powf(-0.2);
    let (lo, hi) = ((0.1 * h_max).ln(), h_max.ln());
    let binned = BinnedDistances::new(values);
    (0..BANDWIDTH_GRID)
        .map(|i| (lo + (hi - lo) * i as f64 / (BANDWIDTH_GRID - 1) as f64).exp())
        .map(|h| (h, binned.score(n, h)))
        .filter(|(_, s)| s.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(h, _)| h)
        .ok_or_else(|| Error::invalid("bandwidth grid is degenerate"))
}

/// Standardised distance beyond which a kernel CDF term is 0 or 1 to double precision.
const KERNEL_REACH: f64 = 8.5;

/// Kernel CDF renormalised to `[t, upper]`. Only the observations within
/// `KERNEL_REACH * h` of the argument are evaluated; the rest contribute
/// exactly 0 or 1.
struct KernelCdf<'a> {
    values: &'a [f64],
    h: f64,
    lower: f64,
    norm: f64,
}

impl<'a> KernelCdf<'a> {
    fn new(values: &'a [f64], h: f64, t: f64, upper: f64) -> Self {
        let mut cdf = Self {
            values,
            h,
            lower: 0.0,
            norm: 1.0,
        };
        cdf.lower = cdf.raw(t);
        cdf.norm = cdf.raw(upper) - cdf.lower;
        cdf
    }

    /// `sum_i Phi((x - M_i) / h)` over ascending values.
    fn raw(&self, x: f64) -> f64 {
        let reach = KERNEL_REACH * self.h;
        let lo = self.values.partition_point(|&m| m < x - reach);
        let hi = self.values.partition_point(|&m| m <= x + reach);
        let window: f64 = self.values[lo..hi].iter().map(|&m| normal_cdf((x - m) / self.h)).sum();
        lo as f64 + window
    }

    fn eval(&self, x: f64) -> f64 {
        ((self.raw(x) - self.lower) / self.norm).clamp(0.0, 1.0)
    }
}

/// `Delta(T)` by composite Gauss-Legendre quadrature on panels that halve in
/// width towards `upper`, where `F^n` concentrates.
pub fn kernel_delta(sample: &MagnitudeSample, h: f64, upper: f64, quadrature_points: usize) -> Result<f64> {
    let t = sample.t_m();
    if !(upper > t) {
        return Err(Error::invalid("upper limit must exceed the threshold"));
    }
    if !(h > 0.0) {
        return Err(Error::invalid("bandwidth must be positive"));
    }
    let cdf = KernelCdf::new(sample.values(), h, t, upper);
    if !(cdf.norm > 0.0) {
        return Err(Error::domain("kernel mass on [t_M, T] vanishes"));
    }
    let n = sample.n() as i32;
    let panels = quadrature_points.div_ceil(GL_ORDER).max(1);
    let (nodes, weights) = gauss_legendre(GL_ORDER);
    let width = upper - t;
    let mut edges = Vec::with_capacity(panels + 1);
    edges.push(t);
    for j in 1..panels {
        edges.push(upper - width * 0.5f64.powi(j as i32));
    }
    edges.push(upper);

    let mut total = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        // F is increasing, so the whole panel is below F(b)^n
        if cdf.eval(b).powi(n) < 1e-300 {
            continue;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let panel: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&x, &wt)| wt * cdf.eval(mid + half * x).powi(n))
            .sum();
        total += half * panel;
    }
    Ok(total)
}

/// N-P-G endpoint: fixed-point iteration from `T = M_{n,n}`.
///
/// Once `T` lies beyond the reach of every kernel, `Delta(T) - T` no longer
/// changes, so an iterate that still moves up there can never settle and
/// the iteration stops with [`Error::Diverged`].
pub fn npg_endpoint(sample: &MagnitudeSample, config: &NPConfig) -> Result<NpgResult> {
    require_n(sample, 10, "N-P-G")?;
    config.validate()?;
    let h = match config.bandwidth {
        Some(h) => h,
        None => lscv_bandwidth(sample.values())?,
    };
    let max = sample.max();
    let saturated = max + KERNEL_REACH * h;
    let mut upper = max;
    for iteration in 1..=config.max_iter {
        let next = max + kernel_delta(sample, h, upper, config.quadrature_points)?;
        if (next - upper).abs() < config.tol {
            return Ok(NpgResult {
                endpoint: EndpointResult::new(Estimator::NonParametricGaussian, Some(sample.n()), next, max, false),
                bandwidth: h,
                iterations: iteration,
            });
        }
        if upper > saturated && next > upper {
            return Err(Error::Diverged(format!(
                "N-P-G has no fixed point for bandwidth {h:.4}: iterate {next:.4} keeps increasing"
            )));
        }
        upper = next;
    }
    Err(Error::NoConvergence {
        iterations: config.max_iter,
        last: upper,
    })
}

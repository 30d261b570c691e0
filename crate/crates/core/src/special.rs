//! Special functions: exponential integral and the standard normal CDF.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E1(z) = int_z^inf exp(-s)/s ds` for `z > 0`.
///
/// Power series below `z = 1`, modified Lentz continued fraction above.
pub fn exp_integral_e1(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("E1 requires z > 0, got {z}")));
    }
    if z <= 1.0 {
        Ok(e1_series(z))
    } else {
        Ok(e1_continued_fraction(z) * (-z).exp())
    }
}

/// `exp(z) * E1(z)`, finite for large `z` where `E1` itself underflows.
pub fn scaled_exp_integral_e1(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("E1 requires z > 0, got {z}")));
    }
    if z <= 1.0 {
        Ok(e1_series(z) * z.exp())
    } else {
        Ok(e1_continued_fraction(z))
    }
}

fn e1_series(z: f64) -> f64 {
    // E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -z / kf;
        let contrib = term / kf;
        sum += contrib;
        if contrib.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// Returns `exp(z) E1(z)`.
fn e1_continued_fraction(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = z + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

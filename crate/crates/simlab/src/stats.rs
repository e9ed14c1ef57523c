//! Empirical summaries of Monte Carlo output.

use serde::{Deserialize, Serialize};
use tensorinf_core::inference::normal_cdf;

use crate::error::{SimError, SimResult};

/// Kolmogorov-Smirnov distance between the empirical CDF of `sample` and the
/// standard normal CDF, `max_i max(i/m - Φ(x_(i)), Φ(x_(i)) - (i-1)/m)`.
pub fn ks_distance(sample: &[f64]) -> SimResult<f64> {
    if sample.is_empty() {
        return Err(SimError::Config("KS distance of an empty sample".into()));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(SimError::Config("KS distance needs finite values".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Fraction of `true` flags with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub rate: f64,
    pub stderr: f64,
    pub count: usize,
}

pub fn coverage_rate(flags: &[bool]) -> SimResult<Coverage> {
    if flags.is_empty() {
        return Err(SimError::Config("coverage of an empty set of flags".into()));
    }
    let m = flags.len() as f64;
    let rate = flags.iter().filter(|&&f| f).count() as f64 / m;
    Ok(Coverage { rate, stderr: (rate * (1.0 - rate) / m).sqrt(), count: flags.len() })
}

/// Sample mean and unbiased sample variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

pub fn moments(sample: &[f64]) -> SimResult<Moments> {
    if sample.len() < 2 {
        return Err(SimError::Config("moments need at least two values".into()));
    }
    let m = sample.len() as f64;
    let mean = sample.iter().sum::<f64>() / m;
    let variance = sample.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
    Ok(Moments { mean, variance, count: sample.len() })
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(sample: &[f64], q: f64) -> SimResult<f64> {
    if sample.is_empty() || !(0.0..=1.0).contains(&q) {
        return Err(SimError::Config(format!("quantile {q} of {} values", sample.len())));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Ok(xs[lo] + (pos - lo as f64) * (xs[hi] - xs[lo]))
}

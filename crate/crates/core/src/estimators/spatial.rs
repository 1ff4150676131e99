//! Tables over space: covariance across lags and per-line confinement.

use serde::{Deserialize, Serialize};

use super::mcmc::{batch_means, mean};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariancePoint {
    pub lag: usize,
    pub t: f64,
    pub cov: f64,
    pub se: f64,
}

/// Covariance of `X(t_base)` and `X(t_base + lag dt)` across configurations:
/// `configs[s][j]` is the height at grid index `j` in configuration `s`.
/// Standard errors are batch means of the centred products, so correlated
/// configurations from one chain are handled.
pub fn covariance_lag(configs: &[Vec<f64>], base: usize, lags: &[usize], dt: f64) -> Result<Vec<CovariancePoint>> {
    let n = configs.len();
    if n < 4 {
        return Err(Error::InsufficientData("need at least four configurations".into()));
    }
    let width = configs[0].len();
    if configs.iter().any(|c| c.len() != width) {
        return Err(Error::Dimension {
            expected: width,
            got: configs.iter().map(Vec::len).find(|&l| l != width).unwrap(),
        });
    }
    lags.iter()
        .map(|&lag| {
            if base + lag >= width {
                return Err(Error::param(format!("lag {lag} leaves the window of {width} points")));
            }
            let a: Vec<f64> = configs.iter().map(|c| c[base]).collect();
            let b: Vec<f64> = configs.iter().map(|c| c[base + lag]).collect();
            let (ma, mb) = (mean(&a), mean(&b));
            let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
            let cov = prods.iter().sum::<f64>() / (n as f64 - 1.0);
            let se = batch_means(&prods)?.se;
            Ok(CovariancePoint {
                lag,
                t: lag as f64 * dt,
                cov,
                se,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfinementRow {
    /// 0-based line index `k`; the line is `X^{k+1}`.
    pub k: usize,
    pub mean: f64,
    pub se: f64,
    pub max_mean: f64,
    pub max_se: f64,
    /// `lambda^{k/3}` times the mean.
    pub rescaled: f64,
    pub rescaled_max: f64,
}

/// Per-line means of `X^{k+1}(0)` and of window maxima, with batch-means
/// errors and the `lambda^{k/3}` rescaling.
pub fn confinement_profile(heights: &[Vec<f64>], maxima: &[Vec<f64>], lambda: f64) -> Result<Vec<ConfinementRow>> {
    if heights.len() != maxima.len() {
        return Err(Error::Dimension {
            expected: heights.len(),
            got: maxima.len(),
        });
    }
    heights
        .iter()
        .zip(maxima)
        .enumerate()
        .map(|(k, (h, mx))| {
            let e = batch_means(h)?;
            let em = batch_means(mx)?;
            let s = lambda.powf(k as f64 / 3.0);
            Ok(ConfinementRow {
                k,
                mean: e.mean,
                se: e.se,
                max_mean: em.mean,
                max_se: em.se,
                rescaled: s * e.mean,
                rescaled_max: s * em.mean,
            })
        })
        .collect()
}

/// Ratio of the largest to the smallest value.
pub fn span_ratio(values: &[f64]) -> f64 {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    hi / lo
}

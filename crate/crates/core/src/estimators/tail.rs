//! Upper-tail fits against `t^{3/2}`, tail constants and lower-tail curves.

use serde::{Deserialize, Serialize};

use super::stats::{clopper_pearson, Proportion};
use crate::error::{Error, Result};
use crate::fs::fs_lower_tail;

/// `2 sqrt(2) / 3`.
pub const FS_TAIL_CONSTANT: f64 = 0.942_809_041_582_063_4;
/// Minimum number of exceedances for a tail point to enter a fit.
pub const MIN_EXCEEDANCES: u64 = 50;
pub const MIN_TAIL_SAMPLES: usize = 100_000;
/// Sentinel for `k = infinity` in [`tail_coefficient_ck`].
pub const K_INFINITY: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c_hat: f64,
    pub se: f64,
    pub r_squared: f64,
    pub exponent: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// `(t, empirical P(X > t), exceedances)` for the points used.
    pub points: Vec<(f64, f64, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub r_squared: f64,
}

/// Weighted least squares `y = a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LinearFit> {
    let k = x.len();
    if k < 3 || y.len() != k || w.len() != k {
        return Err(Error::InsufficientData(format!("{k} points for a line fit")));
    }
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = (0..k).map(|i| w[i] * (x[i] - mx).powi(2)).sum();
    let sxy: f64 = (0..k).map(|i| w[i] * (x[i] - mx) * (y[i] - my)).sum();
    let syy: f64 = (0..k).map(|i| w[i] * (y[i] - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = (0..k).map(|i| w[i] * (y[i] - intercept - slope * x[i]).powi(2)).sum();
    Ok(LinearFit {
        slope,
        intercept,
        slope_se: (ss_res / (k as f64 - 2.0) / sxx).sqrt(),
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
    })
}

/// Fits `-log P(X > t) = c t^{3/2}` (no intercept) over `window` by weighted
/// least squares, weights the inverse binomial variance of `-log p`.
/// Uses eleven equally spaced thresholds; those with fewer than 50
/// exceedances are dropped.
pub fn fit_upper_tail(samples: &[f64], window: (f64, f64)) -> Result<TailFit> {
    fit_upper_tail_points(samples, window, 11)
}

pub fn fit_upper_tail_points(samples: &[f64], window: (f64, f64), points: usize) -> Result<TailFit> {
    let (t_min, t_max) = window;
    if !(t_min < t_max) || points < 2 {
        return Err(Error::param("fit window needs t_min < t_max"));
    }
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "{} samples, tail fits need {MIN_TAIL_SAMPLES}",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut used = Vec::new();
    for k in 0..points {
        let t = t_min + (t_max - t_min) * k as f64 / (points - 1) as f64;
        let above = sorted.len() - sorted.partition_point(|&x| x <= t);
        if above as u64 >= MIN_EXCEEDANCES && above < sorted.len() {
            used.push((t, above as f64 / n, above as u64));
        }
    }
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "only {} thresholds with {MIN_EXCEEDANCES} exceedances",
            used.len()
        )));
    }
    let xs: Vec<f64> = used.iter().map(|p| p.0.powf(1.5)).collect();
    let ys: Vec<f64> = used.iter().map(|p| -p.1.ln()).collect();
    let ws: Vec<f64> = used.iter().map(|p| n * p.1 / (1.0 - p.1)).collect();
    let sxx: f64 = (0..xs.len()).map(|i| ws[i] * xs[i] * xs[i]).sum();
    let sxy: f64 = (0..xs.len()).map(|i| ws[i] * xs[i] * ys[i]).sum();
    let c = sxy / sxx;
    let ss_res: f64 = (0..xs.len()).map(|i| ws[i] * (ys[i] - c * xs[i]).powi(2)).sum();
    let sw: f64 = ws.iter().sum();
    let my = (0..ys.len()).map(|i| ws[i] * ys[i]).sum::<f64>() / sw;
    let ss_tot: f64 = (0..ys.len()).map(|i| ws[i] * (ys[i] - my).powi(2)).sum();
    let k = xs.len() as f64;
    // residual scatter, but never below the binomial noise floor
    let se = (ss_res / (k - 1.0)).max(1.0).sqrt() / sxx.sqrt();
    Ok(TailFit {
        c_hat: c,
        se,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        exponent: 1.5,
        t_min,
        t_max,
        points: used,
    })
}

/// `c_k = (2 sqrt 2 / 3) sum_{i=0}^{k} lambda^{-i/2}`; `k = K_INFINITY`
/// gives the limit `(2 sqrt 2 / 3) sqrt(lambda) / (sqrt(lambda) - 1)`.
pub fn tail_coefficient_ck(k: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!("lambda must exceed 1, got {lambda}")));
    }
    let r = lambda.sqrt();
    if k == K_INFINITY {
        return Ok(FS_TAIL_CONSTANT * r / (r - 1.0));
    }
    Ok(FS_TAIL_CONSTANT * (0..=k).map(|i| r.powi(-(i as i32))).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerTailPoint {
    pub eps: f64,
    pub proportion: Proportion,
    /// `P(Y <= eps)` for the stationary Ferrari–Spohn law.
    pub fs_probability: f64,
    pub eps_cubed: f64,
}

/// Empirical `P(X <= eps)` with 95% Clopper–Pearson intervals, next to the
/// Ferrari–Spohn baseline.
pub fn lower_tail_curve(samples: &[f64], eps: &[f64]) -> Result<Vec<LowerTailPoint>> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let n = samples.len() as u64;
    eps.iter()
        .map(|&e| {
            let hits = samples.iter().filter(|&&x| x <= e).count() as u64;
            Ok(LowerTailPoint {
                eps: e,
                proportion: clopper_pearson(hits, n, 0.05)?,
                fs_probability: fs_lower_tail(e),
                eps_cubed: e.powi(3),
            })
        })
        .collect()
}

/// `log(p2 / p1) / log(e2 / e1)`.
pub fn loglog_slope(e1: f64, p1: f64, e2: f64, p2: f64) -> f64 {
    (p2 / p1).ln() / (e2 / e1).ln()
}

/// Local log-log slope of a CDF at `eps` from the ratio of its values at
/// `eps * r` and `eps / r`.
pub fn local_cdf_slope(cdf: impl Fn(f64) -> f64, eps: f64, r: f64) -> f64 {
    loglog_slope(eps / r, cdf(eps / r), eps * r, cdf(eps * r))
}

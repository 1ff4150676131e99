//! Output analysis for correlated chain traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean with a standard error for independent samples.
pub fn iid_mean(xs: &[f64]) -> Result<MeanEstimate> {
    if xs.len() < 2 {
        return Err(Error::InsufficientData("need at least two samples".into()));
    }
    Ok(MeanEstimate {
        mean: mean(xs),
        se: (variance(xs) / xs.len() as f64).sqrt(),
        n: xs.len(),
    })
}

/// Non-overlapping batch means with batch length `floor(sqrt(N))`.
pub fn batch_means(xs: &[f64]) -> Result<MeanEstimate> {
    let n = xs.len();
    let b = (n as f64).sqrt().floor() as usize;
    batch_means_with(xs, b.max(1))
}

pub fn batch_means_with(xs: &[f64], batch_len: usize) -> Result<MeanEstimate> {
    let nb = xs.len() / batch_len.max(1);
    if nb < 2 {
        return Err(Error::InsufficientData(format!(
            "{} samples give fewer than two batches of {batch_len}",
            xs.len()
        )));
    }
    let means: Vec<f64> = xs[..nb * batch_len]
        .chunks(batch_len)
        .map(mean)
        .collect();
    Ok(MeanEstimate {
        mean: mean(xs),
        se: (variance(&means) / nb as f64).sqrt(),
        n: xs.len(),
    })
}

/// Normalized autocorrelation at `lag`.
pub fn autocorrelation(xs: &[f64], lag: usize) -> f64 {
    let n = xs.len();
    let mu = mean(xs);
    let c0: f64 = xs.iter().map(|x| (x - mu) * (x - mu)).sum();
    if c0 == 0.0 || lag >= n {
        return 0.0;
    }
    let ck: f64 = (0..n - lag).map(|t| (xs[t] - mu) * (xs[t + lag] - mu)).sum();
    ck / c0
}

/// Integrated autocorrelation time `1 + 2 sum rho(k)` with Sokal's
/// self-consistent window `k >= 5 tau`.
pub fn integrated_autocorr_time(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 1.0;
    }
    let mu = mean(xs);
    let d: Vec<f64> = xs.iter().map(|x| x - mu).collect();
    let c0: f64 = d.iter().map(|x| x * x).sum();
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for k in 1..n / 2 {
        let ck: f64 = d[..n - k].iter().zip(&d[k..]).map(|(a, b)| a * b).sum();
        tau += 2.0 * ck / c0;
        if k as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}

/// Geweke z-score comparing the first 10% of a trace with the last 50%.
pub fn geweke_z(xs: &[f64]) -> Result<f64> {
    let n = xs.len();
    let a = &xs[..n / 10];
    let b = &xs[n / 2..];
    let ea = batch_means(a)?;
    let eb = batch_means(b)?;
    Ok((ea.mean - eb.mean) / (ea.se * ea.se + eb.se * eb.se).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn white_noise_tau_near_one() {
        let mut rng = RngStream::new(3, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| rng.standard_normal()).collect();
        let tau = integrated_autocorr_time(&xs);
        assert!((tau - 1.0).abs() < 0.15, "{tau}");
    }

    #[test]
    fn ar1_tau_matches_closed_form() {
        // AR(1) with coefficient r has tau = (1 + r) / (1 - r)
        let r: f64 = 0.8;
        let mut rng = RngStream::new(4, 0);
        let mut x = 0.0;
        let xs: Vec<f64> = (0..200_000)
            .map(|_| {
                x = r * x + (1.0 - r * r).sqrt() * rng.standard_normal();
                x
            })
            .collect();
        let tau = integrated_autocorr_time(&xs);
        assert!((tau - 9.0).abs() < 1.0, "{tau}");
        let bm = batch_means(&xs).unwrap();
        assert!(bm.mean.abs() < 4.0 * bm.se);
        let naive = (1.0 / xs.len() as f64).sqrt();
        assert!(bm.se > 2.0 * naive);
    }
}

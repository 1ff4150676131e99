//! Distribution tests and binomial intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n1 && j < n2 {
        let x = a[i].min(b[j]);
        while i < n1 && a[i] <= x {
            i += 1;
        }
        while j < n2 && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d),
        n1,
        n2,
    })
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsResult> {
    if a.is_empty() {
        return Err(Error::InsufficientData("empty sample".into()));
    }
    let a = sorted(a)?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - k as f64 / n).max((k + 1) as f64 / n - f);
    }
    let sn = n.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d),
        n1: a.len(),
        n2: 0,
    })
}

/// `P(K > x)` for the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form, converges fast for small x
        let t = -std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let s: f64 = (1..=50)
            .step_by(2)
            .map(|k| (t * (k * k) as f64).exp())
            .sum();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / x * s).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Clopper–Pearson interval at level `1 - alpha`.
pub fn clopper_pearson(successes: u64, trials: u64, alpha: f64) -> Result<Proportion> {
    if trials == 0 || successes > trials {
        return Err(Error::param(format!("{successes} successes in {trials} trials")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha must lie in (0, 1)"));
    }
    let (k, n) = (successes as f64, trials as f64);
    let lower = if successes == 0 {
        0.0
    } else {
        Beta::new(k, n - k + 1.0).unwrap().inverse_cdf(alpha / 2.0)
    };
    let upper = if successes == trials {
        1.0
    } else {
        Beta::new(k + 1.0, n - k).unwrap().inverse_cdf(1.0 - alpha / 2.0)
    };
    Ok(Proportion {
        successes,
        trials,
        estimate: k / n,
        lower,
        upper,
    })
}

/// One-sided two-proportion z statistic for `p1 > p2` (pooled variance).
pub fn two_proportion_z(s1: u64, n1: u64, s2: u64, n2: u64) -> f64 {
    let (p1, p2) = (s1 as f64 / n1 as f64, s2 as f64 / n2 as f64);
    let p = (s1 + s2) as f64 / (n1 + n2) as f64;
    let se = (p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if se == 0.0 {
        return 0.0;
    }
    (p1 - p2) / se
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn kolmogorov_sf_known_values() {
        // classical critical values
        assert_relative_eq!(kolmogorov_sf(1.358), 0.05, epsilon = 2e-4);
        assert_relative_eq!(kolmogorov_sf(1.628), 0.01, epsilon = 1e-4);
        assert_relative_eq!(kolmogorov_sf(0.5), 0.9639452, epsilon = 1e-6);
        // both branches agree at the switch
        let t = -std::f64::consts::PI.powi(2) / 8.0;
        let s: f64 = (1..=49).step_by(2).map(|k| (t * (k * k) as f64).exp()).sum();
        assert_relative_eq!(kolmogorov_sf(1.0), 1.0 - (2.0 * std::f64::consts::PI).sqrt() * s, epsilon = 1e-12);
    }

    #[test]
    fn clopper_pearson_edges() {
        let p = clopper_pearson(0, 10, 0.05).unwrap();
        assert_eq!(p.lower, 0.0);
        assert_relative_eq!(p.upper, 1.0 - 0.025f64.powf(0.1), epsilon = 1e-10);
        let p = clopper_pearson(10, 10, 0.05).unwrap();
        assert_eq!(p.upper, 1.0);
    }
}

use tilted_le::estimators::*;
use tilted_le::fs::fs_cdf;
use tilted_le::RngStream;

fn exp_draw(rng: &mut RngStream) -> f64 {
    -(1.0 - rng.uniform()).ln()
}

/// Samples with `P(X > t) = exp(-c t^{3/2})` exactly.
fn stretched_exponential(n: usize, c: f64, seed: u64) -> Vec<f64> {
    let mut rng = RngStream::new(seed, 0);
    (0..n).map(|_| (exp_draw(&mut rng) / c).powf(2.0 / 3.0)).collect()
}

#[test]
fn tail_fit_recovers_a_known_constant() {
    let c = FS_TAIL_CONSTANT;
    let fit = fit_upper_tail(&stretched_exponential(200_000, c, 1), (1.0, 2.5)).unwrap();
    assert!((fit.c_hat - c).abs() < 4.0 * fit.se, "{fit:?}");
    assert!((fit.c_hat - c).abs() < 0.02 * c);
    assert!(fit.r_squared > 0.99);
    assert!(fit.points.iter().all(|p| p.2 >= 50));
    assert!(fit_upper_tail(&stretched_exponential(1000, c, 2), (1.0, 2.5)).is_err());
    assert!(fit_upper_tail(&stretched_exponential(200_000, c, 2), (2.5, 1.0)).is_err());
    // window so far out that no threshold has enough exceedances
    assert!(fit_upper_tail(&stretched_exponential(200_000, c, 3), (20.0, 30.0)).is_err());
}

#[test]
fn tail_fit_error_matches_replicate_spread() {
    let c = 2.0;
    let fits: Vec<TailFit> = (0..30)
        .map(|r| fit_upper_tail(&stretched_exponential(100_000, c, 100 + r), (0.5, 1.5)).unwrap())
        .collect();
    let est: Vec<f64> = fits.iter().map(|f| f.c_hat).collect();
    let spread = variance(&est).sqrt();
    let reported = mean(&fits.iter().map(|f| f.se).collect::<Vec<_>>());
    assert!(reported > 0.5 * spread && reported < 2.5 * spread, "{reported} vs {spread}");
    assert!((mean(&est) - c).abs() < 4.0 * spread / 30f64.sqrt());
}

#[test]
fn tail_coefficients() {
    let c = FS_TAIL_CONSTANT;
    assert!((c - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
    assert_eq!(tail_coefficient_ck(0, 4.0).unwrap(), c);
    assert!((tail_coefficient_ck(1, 4.0).unwrap() - 1.5 * c).abs() < 1e-15);
    assert!((tail_coefficient_ck(2, 4.0).unwrap() - 1.75 * c).abs() < 1e-15);
    assert!((tail_coefficient_ck(K_INFINITY, 4.0).unwrap() - 2.0 * c).abs() < 1e-15);
    assert!((tail_coefficient_ck(200, 2.0).unwrap() - tail_coefficient_ck(K_INFINITY, 2.0).unwrap()).abs() < 1e-12);
    let e = tail_coefficient_ck(1, 1.0).unwrap_err().to_string();
    assert!(e.contains("lambda must exceed 1"));
}

#[test]
fn lower_tail_curve_cases() {
    let zeros = vec![0.0; 100];
    let far = vec![5.0; 100];
    for p in lower_tail_curve(&zeros, &[0.1, 0.5]).unwrap() {
        assert_eq!(p.proportion.estimate, 1.0);
        assert_eq!(p.fs_probability, fs_cdf(p.eps));
        assert_eq!(p.eps_cubed, p.eps.powi(3));
    }
    for p in lower_tail_curve(&far, &[0.1, 0.5]).unwrap() {
        assert_eq!(p.proportion.estimate, 0.0);
        assert_eq!(p.proportion.lower, 0.0);
    }
    assert!(lower_tail_curve(&[], &[0.1]).is_err());
    assert!((local_cdf_slope(|e| e.powi(3), 0.2, 1.05) - 3.0).abs() < 1e-12);
    assert!((loglog_slope(0.1, 1e-3, 0.2, 8e-3) - 3.0).abs() < 1e-12);
}

#[test]
fn covariance_of_brownian_paths() {
    let m = 20;
    let dt: f64 = 0.05;
    let mut rng = RngStream::new(4, 0);
    let configs: Vec<Vec<f64>> = (0..20_000)
        .map(|_| {
            let mut x = 0.0;
            (0..=m)
                .map(|j| {
                    if j > 0 {
                        x += dt.sqrt() * rng.standard_normal();
                    }
                    x
                })
                .collect()
        })
        .collect();
    let base = 8;
    let pts = covariance_lag(&configs, base, &[0, 4, 12], dt).unwrap();
    let col: Vec<f64> = configs.iter().map(|c| c[base]).collect();
    assert!((pts[0].cov - variance(&col)).abs() < 1e-14);
    for p in &pts {
        // Cov(B(s), B(s + h)) = s
        assert!((p.cov - base as f64 * dt).abs() < 4.0 * p.se, "{p:?}");
        assert!((p.t - p.lag as f64 * dt).abs() < 1e-15);
    }
    assert!(covariance_lag(&configs, base, &[13], dt).is_err());
    assert!(covariance_lag(&configs[..3], 0, &[0], dt).is_err());
}

#[test]
fn covariance_of_white_noise_vanishes() {
    let mut rng = RngStream::new(5, 0);
    let configs: Vec<Vec<f64>> = (0..5000).map(|_| (0..6).map(|_| rng.standard_normal()).collect()).collect();
    for p in covariance_lag(&configs, 0, &[1, 3, 5], 1.0).unwrap() {
        assert!(p.cov.abs() < 4.0 * p.se, "{p:?}");
    }
}

#[test]
fn confinement_rescaling() {
    let lambda: f64 = 8.0;
    let mut rng = RngStream::new(6, 0);
    let heights: Vec<Vec<f64>> = (0..3)
        .map(|k| (0..400).map(|_| lambda.powf(-(k as f64) / 3.0) * (1.0 + 0.1 * rng.standard_normal())).collect())
        .collect();
    let maxima: Vec<Vec<f64>> = heights.iter().map(|h| h.iter().map(|x| 2.0 * x).collect()).collect();
    let rows = confinement_profile(&heights, &maxima, lambda).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].mean > w[1].mean);
    }
    for r in &rows {
        assert!((r.rescaled - lambda.powf(r.k as f64 / 3.0) * r.mean).abs() < 1e-12);
        assert!((r.rescaled_max - 2.0 * r.rescaled).abs() < 1e-12);
    }
    let ratio = span_ratio(&rows.iter().map(|r| r.rescaled).collect::<Vec<_>>());
    assert!(ratio < 1.05, "{ratio}");
    assert_eq!(span_ratio(&[2.0, 1.0, 4.0]), 4.0);
    assert!(confinement_profile(&heights, &maxima[..2], lambda).is_err());
}

#[test]
fn ks_basics() {
    let mut rng = RngStream::new(7, 0);
    let a: Vec<f64> = (0..2000).map(|_| rng.standard_normal()).collect();
    let b: Vec<f64> = (0..2000).map(|_| rng.standard_normal()).collect();
    let same = ks_two_sample(&a, &a).unwrap();
    assert_eq!(same.statistic, 0.0);
    assert_eq!(same.p_value, 1.0);
    let r = ks_two_sample(&a, &b).unwrap();
    let ea: Vec<f64> = a.iter().map(|x| x.exp()).collect();
    let eb: Vec<f64> = b.iter().map(|x| x.exp()).collect();
    assert_eq!(ks_two_sample(&ea, &eb).unwrap().statistic, r.statistic);
    assert!(r.p_value > 0.01);
    let shifted: Vec<f64> = b.iter().map(|x| x + 0.3).collect();
    assert!(ks_two_sample(&a, &shifted).unwrap().p_value < 1e-6);
    assert!(ks_two_sample(&a, &[]).is_err());
    assert!(ks_two_sample(&a, &[f64::NAN]).is_err());

    let u: Vec<f64> = (0..2000).map(|_| rng.uniform()).collect();
    assert!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
    assert!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0).powi(2)).unwrap().p_value < 1e-6);

    assert_eq!(kolmogorov_sf(0.0), 1.0);
    assert!((kolmogorov_sf(1.0) - 0.2699996716).abs() < 1e-8);
    assert!(kolmogorov_sf(5.0) < 1e-20);
}

fn binomial_cdf(k: u64, n: u64, p: f64) -> f64 {
    let mut term = (1.0 - p).powi(n as i32);
    let mut total = term;
    for i in 0..k {
        term *= (n - i) as f64 / (i + 1) as f64 * p / (1.0 - p);
        total += term;
    }
    total
}

#[test]
fn clopper_pearson_limits() {
    let p = clopper_pearson(5, 20, 0.05).unwrap();
    assert!((binomial_cdf(5, 20, p.upper) - 0.025).abs() < 1e-9);
    assert!((1.0 - binomial_cdf(4, 20, p.lower) - 0.025).abs() < 1e-9);
    assert_eq!(p.estimate, 0.25);

    let z = clopper_pearson(0, 30, 0.05).unwrap();
    assert_eq!(z.lower, 0.0);
    assert!((z.upper - (1.0 - 0.025f64.powf(1.0 / 30.0))).abs() < 1e-10);
    let f = clopper_pearson(30, 30, 0.05).unwrap();
    assert_eq!(f.upper, 1.0);
    assert!((f.lower - z.upper.mul_add(-1.0, 1.0)).abs() < 1e-10);

    assert!(clopper_pearson(3, 2, 0.05).is_err());
    assert!(clopper_pearson(0, 0, 0.05).is_err());
    assert!(clopper_pearson(1, 2, 1.5).is_err());

    assert_eq!(two_proportion_z(10, 100, 10, 100), 0.0);
    assert!(two_proportion_z(60, 100, 40, 100) > 2.8);
}

#[test]
fn pinning_witness() {
    let eps = 0.1;
    let maxima = vec![vec![1.0; 100], vec![0.05; 95].into_iter().chain(vec![0.5; 5]).collect(), vec![0.0; 100]];
    let r = pinning_check(&maxima, eps).unwrap();
    assert_eq!(r.k, Some(2));
    assert_eq!(r.probability.estimate, 0.95);
    let r = pinning_check(&maxima[..1], eps).unwrap();
    assert_eq!(r.k, None);
    assert_eq!(r.probability.estimate, 0.0);
    assert!(pinning_check(&[vec![]], eps).is_err());
}

#[test]
fn correlated_trace_analysis() {
    let phi: f64 = 0.9;
    let mut rng = RngStream::new(8, 0);
    let mut x = 0.0;
    let trace: Vec<f64> = (0..400_000)
        .map(|_| {
            x = phi * x + (1.0 - phi * phi).sqrt() * rng.standard_normal();
            x
        })
        .collect();
    let tau = (1.0 + phi) / (1.0 - phi);
    assert!((integrated_autocorr_time(&trace) / tau - 1.0).abs() < 0.15);
    assert!((autocorrelation(&trace, 3) - phi.powi(3)).abs() < 0.02);
    let exact_se = (tau / trace.len() as f64).sqrt();
    let bm = batch_means(&trace).unwrap();
    assert!((bm.se / exact_se - 1.0).abs() < 0.25, "{bm:?} vs {exact_se}");
    assert!(batch_means_with(&trace[..3], 2).is_err());
    assert!(iid_mean(&[1.0]).is_err());
}

#[test]
fn scaling_identity_separates_exponents() {
    let plan = SamplingPlan {
        dt: 0.05,
        chains: 2,
        samples: 1500,
        thin: 20,
        burn_in: 1000,
        seed: 9,
    };
    let r = scaling_check(1, 1.5, 1.0, 4.0, &plan).unwrap();
    assert_eq!(r.direct.len(), 3000);
    assert!(r.ks(1.0 / 3.0).unwrap().p_value > 0.01);
    assert!(r.ks(0.0).unwrap().p_value < 1e-6);
}

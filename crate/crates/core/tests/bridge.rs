use approx::assert_relative_eq;
use tilted_le::bridge::{bridge_log_density, bridge_point_conditional, sample_bridge};
use tilted_le::estimators::{iid_mean, ks_two_sample, mean, variance};
use tilted_le::special::GaussRule;
use tilted_le::{GridInterval, RngStream};

#[test]
fn endpoints_are_pinned_exactly() {
    let g = GridInterval::new(-1.0, 2.5, 35).unwrap();
    let mut rng = RngStream::new(3, 0);
    for _ in 0..100 {
        let p = sample_bridge(&g, 0.123, -4.5, &mut rng);
        assert_eq!(p[0], 0.123);
        assert_eq!(p[35], -4.5);
    }
}

#[test]
fn midpoint_moments_match_bridge_covariance() {
    let g = GridInterval::new(0.0, 1.0, 10).unwrap();
    let mut rng = RngStream::new(11, 0);
    let mid: Vec<f64> = (0..100_000).map(|_| sample_bridge(&g, 0.0, 0.0, &mut rng)[5]).collect();
    let n = mid.len() as f64;
    let se_mean = (0.25 / n).sqrt();
    // variance of the sample variance of a normal is 2 s^4 / (n - 1)
    let se_var = (2.0 * 0.25f64.powi(2) / (n - 1.0)).sqrt();
    assert!(mean(&mid).abs() < 4.0 * se_mean);
    assert!((variance(&mid) - 0.25).abs() < 4.0 * se_var);

    let q: Vec<f64> = (0..100_000).map(|_| sample_bridge(&g, 0.0, 1.0, &mut rng)[2]).collect();
    let e = iid_mean(&q).unwrap();
    let exact_var: f64 = 0.2 * 0.8;
    assert!((e.mean - 0.2).abs() < 4.0 * (exact_var / n).sqrt());
}

#[test]
fn quarter_point_mean_is_linear() {
    let g = GridInterval::new(0.0, 1.0, 4).unwrap();
    let mut rng = RngStream::new(12, 0);
    let q: Vec<f64> = (0..100_000).map(|_| sample_bridge(&g, 0.0, 1.0, &mut rng)[1]).collect();
    let sd = (0.25f64 * 0.75 / 1e5).sqrt();
    assert!((mean(&q) - 0.25).abs() < 4.0 * sd);
}

#[test]
fn empirical_covariance_matches_closed_form() {
    let g = GridInterval::new(0.0, 2.0, 8).unwrap();
    let mut rng = RngStream::new(13, 0);
    let n = 100_000;
    let (mut s2, mut s6, mut s26) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let p = sample_bridge(&g, 0.0, 0.0, &mut rng);
        s2 += p[2];
        s6 += p[6];
        s26 += p[2] * p[6];
    }
    let n = n as f64;
    let cov = s26 / n - (s2 / n) * (s6 / n);
    let (tj, tk) = (g.time(2), g.time(6));
    let exact = tj * (2.0 - tk) / 2.0;
    // Var(XY) = Var X Var Y + Cov^2 for centred jointly Gaussian pairs
    let se = ((tj * (2.0 - tj) / 2.0) * (tk * (2.0 - tk) / 2.0) + exact * exact).sqrt() / n.sqrt();
    assert!((cov - exact).abs() < 4.0 * se, "{cov} vs {exact}");
}

#[test]
fn identical_streams_give_identical_paths() {
    let g = GridInterval::new(0.0, 5.0, 500).unwrap();
    let a = sample_bridge(&g, 1.0, 2.0, &mut RngStream::new(99, 7));
    let b = sample_bridge(&g, 1.0, 2.0, &mut RngStream::new(99, 7));
    assert_eq!(a, b);
    let c = sample_bridge(&g, 1.0, 2.0, &mut RngStream::new(99, 8));
    assert_ne!(a, c);
}

#[test]
fn point_conditional_examples() {
    assert_eq!(bridge_point_conditional(0.0, 0.0, 1.0, 0.0, 0.5).unwrap(), (0.0, 0.25));
    assert_eq!(bridge_point_conditional(0.0, 1.0, 4.0, 3.0, 2.0).unwrap(), (2.0, 1.0));
    let (m, v) = bridge_point_conditional(0.0, 1.0, 4.0, 3.0, 1e-12).unwrap();
    assert_relative_eq!(m, 1.0, epsilon = 1e-11);
    assert!(v < 1e-11);
    assert!(bridge_point_conditional(0.0, 0.0, 1.0, 0.0, 1.0).is_err());
    assert!(bridge_point_conditional(0.0, 0.0, 1.0, 0.0, -0.1).is_err());
}

#[test]
fn log_density_examples() {
    let g1 = GridInterval::new(0.0, 1.0, 1).unwrap();
    assert_eq!(bridge_log_density(&[0.0, 0.0], &g1, 0.0, 0.0).unwrap(), 0.0);

    let g2 = GridInterval::new(0.0, 1.0, 2).unwrap();
    let at0 = bridge_log_density(&[0.0, 0.0, 0.0], &g2, 0.0, 0.0).unwrap();
    let oracle = -0.5 * (2.0 * std::f64::consts::PI * 0.25).ln();
    assert_relative_eq!(at0, oracle, epsilon = 1e-14);
    assert_relative_eq!(at0, -0.2257913526, epsilon = 1e-9);
    let v = 0.4;
    let atv = bridge_log_density(&[0.0, v, 0.0], &g2, 0.0, 0.0).unwrap();
    assert_relative_eq!(atv, oracle - v * v / 0.5, epsilon = 1e-14);

    let g = GridInterval::new(0.0, 1.0, 5).unwrap();
    let path = [0.1, 0.5, -0.2, 0.3, 0.9, 0.4];
    let base = bridge_log_density(&path, &g, 0.1, 0.4).unwrap();
    let c = 3.25;
    let shifted: Vec<f64> = path.iter().map(|x| x + c).collect();
    let moved = bridge_log_density(&shifted, &g, 0.1 + c, 0.4 + c).unwrap();
    assert_relative_eq!(base, moved, epsilon = 1e-12);
}

#[test]
fn log_density_integrates_to_one() {
    let g = GridInterval::new(0.0, 1.0, 3).unwrap();
    let (x, y) = (0.3, -0.4);
    let rule = GaussRule::new(200, -6.0, 6.0);
    let mut total = 0.0;
    for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
        for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
            let d = bridge_log_density(&[x, u, v, y], &g, x, y).unwrap();
            total += wu * wv * d.exp();
        }
    }
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn markov_consistency_at_an_interior_time() {
    let g = GridInterval::new(0.0, 1.0, 10).unwrap();
    let right = g.subgrid(4, 10).unwrap();
    let (x, y) = (0.0, 0.5);
    let mut rng = RngStream::new(21, 0);
    let mut whole = Vec::new();
    let mut split = Vec::new();
    for _ in 0..10_000 {
        let p = sample_bridge(&g, x, y, &mut rng);
        whole.push(p[7]);
        let v = sample_bridge(&g, x, y, &mut rng)[4];
        split.push(sample_bridge(&right, v, y, &mut rng)[3]);
    }
    let ks = ks_two_sample(&whole, &split).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

//! Gaussian helpers, the truncated-Gaussian inverse CDF and quadrature rules.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erfc, erfc_inv};

/// Standardized bounds beyond which the excluded Gaussian mass is below the
/// resolution of a 53-bit uniform.
const NEGLIGIBLE_Z: f64 = 9.0;

#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Upper tail `P(Z > x)`.
#[inline]
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Inverse of [`normal_cdf`], accurate for small `p`.
#[inline]
pub fn normal_quantile(p: f64) -> f64 {
    if p < 0.5 {
        -SQRT_2 * erfc_inv(2.0 * p)
    } else {
        SQRT_2 * erfc_inv(2.0 * (1.0 - p))
    }
}

/// Inverse of [`normal_sf`], accurate for small `q`.
#[inline]
pub fn normal_isf(q: f64) -> f64 {
    -normal_quantile(q)
}

#[inline]
pub fn normal_log_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (2.0 * PI * var).ln() - d * d / (2.0 * var)
}

/// Inverse CDF of the standard normal truncated to `(a, b)` evaluated at `u`.
///
/// Non-decreasing in `u`, `a` and `b`. Infinite bounds are allowed.
pub fn std_truncated_normal_inv(u: f64, a: f64, b: f64) -> f64 {
    debug_assert!(a < b);
    if a <= -NEGLIGIBLE_Z && b >= NEGLIGIBLE_Z {
        return normal_quantile(u);
    }
    let z = if a >= 0.0 {
        upper_tail_inv(u, a, b)
    } else if b <= 0.0 {
        -upper_tail_inv(1.0 - u, -b, -a)
    } else {
        let pa = if a <= -NEGLIGIBLE_Z { 0.0 } else { normal_cdf(a) };
        let sb = if b >= NEGLIGIBLE_Z { 0.0 } else { normal_sf(b) };
        let mass = 1.0 - pa - sb;
        let p = pa + u * mass;
        if p < 0.5 {
            normal_quantile(p)
        } else {
            normal_isf(sb + (1.0 - u) * mass)
        }
    };
    z.clamp(a, b)
}

// Interval inside the upper half line: invert through the survival function.
fn upper_tail_inv(u: f64, a: f64, b: f64) -> f64 {
    let sa = normal_sf(a);
    if sa > 1e-300 {
        let sb = normal_sf(b);
        let q = sa - u * (sa - sb);
        normal_isf(q)
    } else {
        // sf(x) ~ exp(-a (x - a)) sf(a) this deep in the tail
        let w = b - a;
        let shrink = if w.is_finite() { -(-a * w).exp_m1() } else { 1.0 };
        a - (-u * shrink).ln_1p() / a
    }
}

/// Draw from `N(mean, sd^2)` truncated to the open interval `(lo, hi)` by
/// inversion at `u`. Returns `None` when no double lies strictly inside.
pub fn truncated_normal_inv(u: f64, mean: f64, sd: f64, lo: f64, hi: f64) -> Option<f64> {
    if !(lo < hi) {
        return None;
    }
    let z = std_truncated_normal_inv(u, (lo - mean) / sd, (hi - mean) / sd);
    let mut x = mean + sd * z;
    if x <= lo {
        x = next_up(lo);
    }
    if x >= hi {
        x = next_down(hi);
    }
    (x > lo && x < hi).then_some(x)
}

pub fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

pub fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// A Gauss–Legendre rule mapped onto `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize, lo: f64, hi: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|v| v * half).collect(),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Adaptive bisection quadrature comparing 10- and 20-point Gauss rules.
pub fn integrate_adaptive(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> f64 {
    let (x10, w10) = gauss_legendre(10);
    let (x20, w20) = gauss_legendre(20);
    let rule = |a: f64, b: f64, x: &[f64], w: &[f64]| {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        x.iter().zip(w).map(|(t, wt)| wt * f(m + h * t)).sum::<f64>() * h
    };
    let whole = rule(lo, hi, &x20, &w20);
    let scale = whole.abs().max(f64::MIN_POSITIVE);
    let mut stack = vec![(lo, hi, 0usize)];
    let mut total = 0.0;
    while let Some((a, b, depth)) = stack.pop() {
        let coarse = rule(a, b, &x10, &w10);
        let fine = rule(a, b, &x20, &w20);
        if (fine - coarse).abs() <= rel_tol * scale * 0.1 || depth >= 40 {
            total += fine;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b, depth + 1));
            stack.push((a, m, depth + 1));
        }
    }
    total
}

/// Neumaier-compensated summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

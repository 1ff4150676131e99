//! Airy function `Ai` and its derivative on the real line.
//!
//! Three regimes: the Maclaurin series near the origin, a table of Taylor
//! nodes on `[-10, 8]` obtained by integrating `y'' = x y` leftwards from the
//! large-`x` asymptotic expansion, and the asymptotic expansions beyond.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
pub const AI_0: f64 = 0.355_028_053_887_817_2;
/// `Ai'(0) = -3^{-1/3} / Gamma(1/3)`.
pub const AI_PRIME_0: f64 = -0.258_819_403_792_806_8;

const SERIES_RADIUS: f64 = 2.0;
const TABLE_LO: f64 = -10.0;
const TABLE_HI: f64 = 8.0;
const TABLE_STEP: f64 = 0.125;
/// Largest `|x|` for which the relative accuracy is claimed.
pub const SUPPORTED: (f64, f64) = (-10.0, 20.0);

/// Cached Taylor nodes and the largest zero.
#[derive(Debug)]
pub struct AiryTable {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub series_radius: f64,
    /// `(Ai, Ai')` at `lo + k * step`.
    nodes: Vec<(f64, f64)>,
    pub omega1: f64,
}

impl AiryTable {
    pub fn global() -> &'static AiryTable {
        static TABLE: OnceLock<AiryTable> = OnceLock::new();
        TABLE.get_or_init(AiryTable::build)
    }

    fn build() -> Self {
        let count = ((TABLE_HI - TABLE_LO) / TABLE_STEP).round() as usize;
        let mut nodes = vec![(0.0, 0.0); count + 1];
        nodes[count] = asymptotic_positive(TABLE_HI);
        for k in (0..count).rev() {
            let a = TABLE_LO + (k + 1) as f64 * TABLE_STEP;
            let (y, yp) = nodes[k + 1];
            nodes[k] = taylor(a, y, yp, -TABLE_STEP);
        }
        let mut t = AiryTable {
            lo: TABLE_LO,
            hi: TABLE_HI,
            step: TABLE_STEP,
            series_radius: SERIES_RADIUS,
            nodes,
            omega1: f64::NAN,
        };
        t.omega1 = t.find_first_zero();
        t
    }

    /// `(Ai(x), Ai'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        if x.abs() <= self.series_radius {
            maclaurin(x)
        } else if x > self.hi {
            asymptotic_positive(x)
        } else if x < self.lo {
            asymptotic_negative(-x)
        } else {
            let k = ((x - self.lo) / self.step).round() as usize;
            let a = self.lo + k as f64 * self.step;
            let (y, yp) = self.nodes[k];
            taylor(a, y, yp, x - a)
        }
    }

    fn find_first_zero(&self) -> f64 {
        // Ai(-3) > 0 > Ai(-2)... sign pattern: Ai(-2) > 0, Ai(-3) < 0
        let (mut a, mut b) = (-3.0, -2.0);
        let fa = self.eval(a).0;
        for _ in 0..40 {
            let mid = 0.5 * (a + b);
            if (self.eval(mid).0 > 0.0) == (fa > 0.0) {
                a = mid;
            } else {
                b = mid;
            }
        }
        let mut x = 0.5 * (a + b);
        for _ in 0..8 {
            let (y, yp) = self.eval(x);
            let dx = y / yp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        -x
    }
}

/// Taylor step of `y'' = x y` from `a` by `d`.
fn taylor(a: f64, y: f64, yp: f64, d: f64) -> (f64, f64) {
    if d == 0.0 {
        return (y, yp);
    }
    // coefficients about a obey c[k+2] = (a c[k] + c[k-1]) / ((k+2)(k+1))
    let (mut cm1, mut c0, mut c1) = (0.0, y, yp);
    let mut val = y + yp * d;
    let mut der = yp;
    let mut pow = d;
    let scale = y.abs() + yp.abs();
    let mut quiet = 0;
    for k in 0..80 {
        let c2 = (a * c0 + cm1) / (((k + 2) * (k + 1)) as f64);
        let dterm = (k + 2) as f64 * c2 * pow;
        der += dterm;
        pow *= d;
        let term = c2 * pow;
        val += term;
        // every third coefficient can vanish, so wait for a quiet run
        if term.abs().max(dterm.abs()) < 1e-18 * scale {
            quiet += 1;
            if quiet >= 3 {
                break;
            }
        } else {
            quiet = 0;
        }
        cm1 = c0;
        c0 = c1;
        c1 = c2;
    }
    (val, der)
}

/// Maclaurin series `Ai = Ai(0) f + Ai'(0) g`.
fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    let (mut f, mut g) = (1.0, x);
    let (mut tf, mut tg) = (1.0, x);
    let (mut fp, mut gp) = (0.0, 1.0);
    let (mut tfp, mut tgp) = (0.5 * x * x, 1.0);
    fp += tfp;
    for k in 1..80 {
        let kf = k as f64;
        tf *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        if k >= 2 {
            tfp *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp += tfp;
        }
        tgp *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        gp += tgp;
        if tf.abs() + tg.abs() + tfp.abs() + tgp.abs() < 1e-18 * (f.abs() + g.abs() + 1e-300) {
            break;
        }
    }
    (AI_0 * f + AI_PRIME_0 * g, AI_0 * fp + AI_PRIME_0 * gp)
}

/// Coefficients `u_k` of the asymptotic expansions.
fn u_coeffs(count: usize) -> Vec<f64> {
    let mut u = vec![1.0; count];
    for k in 1..count {
        let kf = k as f64;
        u[k] = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
    }
    u
}

/// `zeta` and the two series factoring `(Ai(x), Ai'(x))` for large positive `x`.
fn positive_series(x: f64) -> (f64, f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let u = u_coeffs(40);
    let (mut s, mut sp) = (0.0, 0.0);
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let vk = if k == 0 { 1.0 } else { -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * uk };
        let term = uk / zk;
        if term.abs() > last {
            break;
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * term;
        sp += sign * vk / zk;
        last = term.abs();
        if last < 1e-17 {
            break;
        }
        zk *= zeta;
    }
    (zeta, s, sp)
}

fn asymptotic_positive(x: f64) -> (f64, f64) {
    let (zeta, s, sp) = positive_series(x);
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    (e / x.powf(0.25) * s, -e * x.powf(0.25) * sp)
}

/// `(Ai(-z), Ai'(-z))` for large positive `z`.
fn asymptotic_negative(z: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let u = u_coeffs(40);
    let (mut pe, mut po, mut qe, mut qo) = (0.0, 0.0, 0.0, 0.0);
    let mut zk = 1.0;
    let mut last = f64::INFINITY;
    for (k, &uk) in u.iter().enumerate() {
        let vk = if k == 0 { 1.0 } else { -(6.0 * k as f64 + 1.0) / (6.0 * k as f64 - 1.0) * uk };
        let term = uk / zk;
        if term.abs() > last {
            break;
        }
        // (-1)^floor(k/2)
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            pe += sign * term;
            qe += sign * vk / zk;
        } else {
            po += sign * term;
            qo += sign * vk / zk;
        }
        last = term.abs();
        if last < 1e-17 {
            break;
        }
        zk *= zeta;
    }
    let phase = zeta - PI / 4.0;
    let (s, c) = phase.sin_cos();
    let pre = 1.0 / PI.sqrt();
    let ai = pre / z.powf(0.25) * (c * pe + s * po);
    let aip = pre * z.powf(0.25) * (s * qe - c * qo);
    (ai, aip)
}

pub fn airy_ai(x: f64) -> f64 {
    AiryTable::global().eval(x).0
}

pub fn airy_ai_prime(x: f64) -> f64 {
    AiryTable::global().eval(x).1
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai_both(x: f64) -> (f64, f64) {
    AiryTable::global().eval(x)
}

/// `Ai'(x) / Ai(x)`, finite for all large `x` where both factors underflow.
pub fn airy_log_derivative(x: f64) -> f64 {
    if x > TABLE_HI {
        let (_, s, sp) = positive_series(x);
        -x.sqrt() * sp / s
    } else {
        let (ai, aip) = airy_ai_both(x);
        aip / ai
    }
}

/// `Ai(x)` together with whether `x` lies in the range where the relative
/// accuracy of `1e-10` is claimed.
pub fn airy_ai_checked(x: f64) -> (f64, bool) {
    (airy_ai(x), (SUPPORTED.0..=SUPPORTED.1).contains(&x))
}

/// `omega_1`, minus the largest zero of `Ai`.
pub fn airy_first_zero() -> f64 {
    AiryTable::global().omega1
}

/// The regime boundaries, exposed so continuity across them can be checked.
pub fn airy_switch_points() -> [f64; 4] {
    [-TABLE_LO.abs(), -SERIES_RADIUS, SERIES_RADIUS, TABLE_HI]
}

/// Maclaurin-series evaluation, exposed for cross-checks.
pub fn airy_series(x: f64) -> (f64, f64) {
    maclaurin(x)
}

/// Asymptotic-expansion evaluation, exposed for cross-checks.
pub fn airy_asymptotic(x: f64) -> (f64, f64) {
    if x >= 0.0 {
        asymptotic_positive(x)
    } else {
        asymptotic_negative(-x)
    }
}

use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::airy::{airy_ai, airy_first_zero, airy_log_derivative};
use crate::error::{Error, Result};
use crate::estimators::stats::{clopper_pearson, Proportion};
use crate::rng::{stream_id, RngStream};
use crate::special::{integrate_adaptive, GaussRule};

/// `2^{1/3}`.
pub const CBRT_2: f64 = 1.259_921_049_894_873_2;
/// Reflecting guard at the wall used by the path simulator.
pub const EPS_WALL: f64 = 1e-8;

const X_MAX: f64 = 12.0;
const CELL: f64 = 0.01;
const CELL_NODES: usize = 12;

/// `phi(x) = Ai(2^{1/3} x - omega_1)`; the stationary density is `phi^2 / Z`.
#[inline]
pub fn fs_ground_state(x: f64) -> f64 {
    airy_ai(CBRT_2 * x - airy_first_zero())
}

/// Normalization, cumulative tables and moments of the stationary law.
#[derive(Debug)]
pub struct FsTable {
    pub z: f64,
    /// `cdf[k] = P(Y <= k * CELL)`.
    cdf: Vec<f64>,
    /// `sf[k] = P(Y > k * CELL)`, accumulated from the right.
    sf: Vec<f64>,
    rule: (Vec<f64>, Vec<f64>),
}

impl FsTable {
    pub fn global() -> &'static FsTable {
        static T: OnceLock<FsTable> = OnceLock::new();
        T.get_or_init(FsTable::build)
    }

    fn build() -> Self {
        let sq = |x: f64| fs_ground_state(x).powi(2);
        let z = integrate_adaptive(&sq, 0.0, X_MAX, 1e-13);
        let cells = (X_MAX / CELL).round() as usize;
        let masses: Vec<f64> = (0..cells)
            .map(|k| GaussRule::new(CELL_NODES, k as f64 * CELL, (k + 1) as f64 * CELL).integrate(sq) / z)
            .collect();
        let mut cdf = vec![0.0; cells + 1];
        for k in 0..cells {
            cdf[k + 1] = cdf[k] + masses[k];
        }
        let mut sf = vec![0.0; cells + 1];
        for k in (0..cells).rev() {
            sf[k] = sf[k + 1] + masses[k];
        }
        let rule = crate::special::gauss_legendre(CELL_NODES);
        FsTable { z, cdf, sf, rule }
    }

    /// Mass of `[a, b]` inside one cell.
    fn partial(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .rule
            .0
            .iter()
            .zip(&self.rule.1)
            .map(|(t, w)| w * fs_ground_state(mid + half * t).powi(2))
            .sum();
        s * half / self.z
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= X_MAX {
            return 1.0;
        }
        let k = (x / CELL).floor() as usize;
        let a = k as f64 * CELL;
        if self.cdf[k] < 0.5 {
            self.cdf[k] + self.partial(a, x)
        } else {
            1.0 - self.sf(x)
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x >= X_MAX {
            return 0.0;
        }
        let k = (x / CELL).floor() as usize;
        let b = (k + 1) as f64 * CELL;
        self.sf[k + 1] + self.partial(x, b)
    }

    /// Inverse CDF; `u` in `(0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        // invert whichever tail keeps full relative precision
        let lower = u < 0.5;
        let (target, table) = if lower { (u, &self.cdf) } else { (1.0 - u, &self.sf) };
        let cells = table.len() - 1;
        // cell k with target between the table entries at k and k + 1
        let k = if lower {
            table.partition_point(|&c| c <= target).saturating_sub(1).min(cells - 1)
        } else {
            table.partition_point(|&c| c > target).saturating_sub(1).min(cells - 1)
        };
        let (mut a, mut b) = (k as f64 * CELL, (k + 1) as f64 * CELL);
        let g = |x: f64| if lower { self.cdf(x) - target } else { target - self.sf(x) };
        let mut x = 0.5 * (a + b);
        for _ in 0..60 {
            let gx = g(x);
            if gx > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let f = fs_density(x);
            let newton = x - gx / f;
            x = if f > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if b - a < 1e-14 || gx.abs() < 1e-17 * target.max(1e-300) {
                break;
            }
        }
        x
    }
}

/// Stationary density `Ai(2^{1/3} x - omega_1)^2 / Z` on `x > 0`.
pub fn fs_density(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    fs_ground_state(x).powi(2) / FsTable::global().z
}

pub fn fs_normalization() -> f64 {
    FsTable::global().z
}

pub fn fs_cdf(x: f64) -> f64 {
    FsTable::global().cdf(x)
}

/// `P(Y > x)` computed from the upper tail.
pub fn fs_sf(x: f64) -> f64 {
    FsTable::global().sf(x)
}

pub fn fs_quantile(u: f64) -> f64 {
    FsTable::global().quantile(u)
}

/// `E[Y]` by quadrature.
pub fn fs_mean() -> f64 {
    integrate_adaptive(&|x| x * fs_density(x), 0.0, X_MAX, 1e-12)
}

/// Drift `(log phi)'(x)` of the diffusion with invariant density `phi^2`.
#[inline]
pub fn fs_drift(x: f64) -> f64 {
    CBRT_2 * airy_log_derivative(CBRT_2 * x - airy_first_zero())
}

pub fn fs_sample_stationary(rng: &mut RngStream) -> f64 {
    fs_quantile(rng.uniform())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsPath {
    pub dt: f64,
    pub values: Vec<f64>,
    /// Steps that crossed below the wall guard and were reflected.
    pub wall_hits: u64,
}

/// Euler–Maruyama path on `[0, T]` from a stationary start, unit diffusion,
/// reflected at the wall guard.
pub fn fs_simulate_path(duration: f64, dt: f64, rng: &mut RngStream) -> Result<FsPath> {
    if !(dt > 0.0 && duration >= 0.0) {
        return Err(Error::param("need dt > 0 and T >= 0"));
    }
    let steps = (duration / dt).round() as usize;
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = fs_sample_stationary(rng);
    values.push(x);
    let sq = dt.sqrt();
    let mut wall_hits = 0;
    for _ in 0..steps {
        x += fs_drift(x) * dt + sq * rng.standard_normal();
        if x < EPS_WALL {
            x = (2.0 * EPS_WALL - x).max(EPS_WALL);
            wall_hits += 1;
        }
        values.push(x);
    }
    Ok(FsPath { dt, values, wall_hits })
}

/// Monte Carlo estimate of `P(max_{[-T, T]} Y >= t)` from `trials`
/// independent Euler–Maruyama paths of length `2T`.
pub fn fs_max_tail(half_width: f64, t: f64, trials: u64, dt: f64, seed: u64) -> Result<Proportion> {
    let maxima = fs_path_maxima(half_width, trials, dt, seed)?;
    let hits = maxima.iter().filter(|&&m| m >= t).count() as u64;
    clopper_pearson(hits, trials, 0.05)
}

/// Maxima over `[-T, T]` of independent stationary paths, for reuse across thresholds.
pub fn fs_path_maxima(half_width: f64, trials: u64, dt: f64, seed: u64) -> Result<Vec<f64>> {
    if !(half_width > 0.0) {
        return Err(Error::param("T must be positive"));
    }
    (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, stream_id(&[0x6d6178, half_width.to_bits(), k]));
            let p = fs_simulate_path(2.0 * half_width, dt, &mut rng)?;
            Ok(p.values.iter().copied().fold(0.0, f64::max))
        })
        .collect()
}

/// `P(Y <= eps)` by quadrature of the stationary density.
pub fn fs_lower_tail(eps: f64) -> f64 {
    fs_cdf(eps)
}

/// Monte Carlo estimate of `P(Y <= eps)` from stationary draws.
pub fn fs_lower_tail_mc(eps: f64, trials: u64, seed: u64) -> Result<Proportion> {
    if !(eps > 0.0) {
        return Err(Error::param("eps must be positive"));
    }
    let mut rng = RngStream::new(seed, stream_id(&[0x6c6f77]));
    let hits = (0..trials).filter(|_| fs_sample_stationary(&mut rng) <= eps).count() as u64;
    clopper_pearson(hits, trials, 0.05)
}

/// `n` stationary draws from `n` substreams; the result does not depend on
/// the thread count.
pub fn fs_stationary_draws(n: u64, seed: u64) -> Vec<f64> {
    const CHUNK: u64 = 4096;
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = RngStream::new(seed, stream_id(&[0x7374_6174, c]));
            let len = CHUNK.min(n - c * CHUNK);
            (0..len).map(move |_| fs_sample_stationary(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Writes `x,pdf,cdf` rows on `points` equally spaced abscissae in `[0, x_max]`.
pub fn write_cdf_table<W: Write>(out: W, x_max: f64, points: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "pdf", "cdf"])?;
    for k in 0..points {
        let x = x_max * k as f64 / (points - 1).max(1) as f64;
        w.write_record([format!("{x}"), format!("{:.12e}", fs_density(x)), format!("{:.12e}", fs_cdf(x))])?;
    }
    w.flush()?;
    Ok(())
}

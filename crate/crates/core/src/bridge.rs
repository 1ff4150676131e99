//! Exact discrete Brownian bridges: sampling, single-point conditionals and
//! the log-density with respect to Lebesgue measure on the interior points.

use crate::error::{Error, Result};
use crate::model::GridInterval;
use crate::rng::RngStream;
use crate::special::normal_log_pdf;

/// Bridge from `x` at `grid.ell()` to `y` at `grid.r()`, drawn left to right
/// from the exact one-step conditionals.
pub fn sample_bridge(grid: &GridInterval, x: f64, y: f64, rng: &mut RngStream) -> Vec<f64> {
    let mut path = vec![0.0; grid.points()];
    fill_bridge(&mut path, grid.dt(), x, y, rng);
    path
}

/// Overwrites `path` with a bridge of step `dt` pinned at `x` and `y`.
/// Consumes exactly `path.len() - 2` normals.
pub(crate) fn fill_bridge(path: &mut [f64], dt: f64, x: f64, y: f64, rng: &mut RngStream) {
    let m = path.len() - 1;
    path[0] = x;
    path[m] = y;
    for j in 1..m {
        // k steps remain between the previous point and y
        let k = (m - j + 1) as f64;
        let prev = path[j - 1];
        let mean = prev + (y - prev) / k;
        let var = dt * (k - 1.0) / k;
        path[j] = mean + var.sqrt() * rng.standard_normal();
    }
}

/// Mean and variance at `t` of a bridge through `(left_t, left_h)` and `(right_t, right_h)`.
pub fn bridge_point_conditional(
    left_t: f64,
    left_h: f64,
    right_t: f64,
    right_h: f64,
    t: f64,
) -> Result<(f64, f64)> {
    if !(left_t < t && t < right_t) {
        return Err(Error::Domain(format!(
            "t = {t} outside ({left_t}, {right_t})"
        )));
    }
    let span = right_t - left_t;
    let mean = left_h + (t - left_t) * (right_h - left_h) / span;
    let var = (t - left_t) * (right_t - t) / span;
    Ok((mean, var))
}

/// Log-density of the interior values of `path` under the bridge from `x` to `y`.
/// The end entries of `path` are ignored in favour of `x` and `y`.
pub fn bridge_log_density(path: &[f64], grid: &GridInterval, x: f64, y: f64) -> Result<f64> {
    if path.len() != grid.points() {
        return Err(Error::Dimension {
            expected: grid.points(),
            got: path.len(),
        });
    }
    let m = grid.steps();
    if m == 1 {
        return Ok(0.0);
    }
    let dt = grid.dt();
    let at = |j: usize| match j {
        0 => x,
        j if j == m => y,
        j => path[j],
    };
    let mut s = 0.0;
    for j in 0..m {
        s += normal_log_pdf(at(j + 1), at(j), dt);
    }
    Ok(s - normal_log_pdf(y, x, grid.length()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn conditional_examples() {
        assert_eq!(bridge_point_conditional(0.0, 0.0, 1.0, 0.0, 0.5).unwrap(), (0.0, 0.25));
        assert_eq!(bridge_point_conditional(0.0, 1.0, 4.0, 3.0, 2.0).unwrap(), (2.0, 1.0));
        let (m, v) = bridge_point_conditional(0.0, 1.5, 1.0, 3.0, 1e-12).unwrap();
        assert_relative_eq!(m, 1.5, epsilon = 1e-11);
        assert!(v < 1e-11);
        assert!(bridge_point_conditional(0.0, 0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn one_step_density_is_zero() {
        let g = GridInterval::new(0.0, 1.0, 1).unwrap();
        assert_eq!(bridge_log_density(&[0.3, 0.9], &g, 0.3, 0.9).unwrap(), 0.0);
    }
}

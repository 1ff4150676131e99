use std::f64::consts::PI;

use super::{EnsembleState, GridInterval};
use crate::error::{Error, Result};
use crate::special::compensated_sum;

const COMPENSATE_ABOVE: usize = 1_000_000;

/// Trapezoidal integral of a grid path over the grid interval.
pub fn area_functional(path: &[f64], grid: &GridInterval) -> Result<f64> {
    if path.len() != grid.points() {
        return Err(Error::Dimension {
            expected: grid.points(),
            got: path.len(),
        });
    }
    Ok(trapezoid(path, grid.dt()))
}

pub(crate) fn trapezoid(path: &[f64], dt: f64) -> f64 {
    let m = path.len() - 1;
    if m == 0 {
        return 0.0;
    }
    let ends = 0.5 * (path[0] + path[m]);
    let inner = &path[1..m];
    let s = if path.len() > COMPENSATE_ABOVE {
        compensated_sum(inner.iter().copied())
    } else {
        inner.iter().sum::<f64>()
    };
    dt * (ends + s)
}

/// `-a * sum_i lambda^i * area(line i)`.
pub fn tilt_log_weight(state: &EnsembleState) -> f64 {
    let dt = state.grid().dt();
    let tilt = state.tilt();
    (0..state.n_lines())
        .map(|i| -tilt.coefficient(i) * trapezoid(state.line(i), dt))
        .sum()
}

/// Total mass `(2 pi d)^{-n/2} exp(-|y-x|^2 / 2d)` of `n` independent
/// Brownian bridges from `x` to `y` over duration `d`.
pub fn gaussian_bridge_mass(x: &[f64], y: &[f64], duration: f64) -> Result<f64> {
    if !(duration > 0.0) {
        return Err(Error::Domain(format!("duration must be positive, got {duration}")));
    }
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum();
    let n = x.len() as f64;
    Ok((2.0 * PI * duration).powf(-0.5 * n) * (-d2 / (2.0 * duration)).exp())
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform discretization of `[ell, r]` into `steps` intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridInterval {
    ell: f64,
    r: f64,
    steps: usize,
}

impl GridInterval {
    pub fn new(ell: f64, r: f64, steps: usize) -> Result<Self> {
        if !(ell.is_finite() && r.is_finite()) || !(ell < r) {
            return Err(Error::param(format!("grid needs ell < r, got [{ell}, {r}]")));
        }
        if steps == 0 {
            return Err(Error::param("grid needs at least one step"));
        }
        Ok(Self { ell, r, steps })
    }

    /// `[-half_width, half_width]` with spacing `dt`; `2 half_width / dt` must be an integer.
    pub fn symmetric(half_width: f64, dt: f64) -> Result<Self> {
        Self::with_spacing(-half_width, half_width, dt)
    }

    pub fn with_spacing(ell: f64, r: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::param(format!("time step must be positive, got {dt}")));
        }
        let ratio = (r - ell) / dt;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-6 * steps.max(1.0) {
            return Err(Error::param(format!(
                "interval length {} is not a multiple of dt = {dt}",
                r - ell
            )));
        }
        Self::new(ell, r, steps as usize)
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points, `steps + 1`.
    pub fn points(&self) -> usize {
        self.steps + 1
    }

    pub fn length(&self) -> f64 {
        self.r - self.ell
    }

    pub fn dt(&self) -> f64 {
        (self.r - self.ell) / self.steps as f64
    }

    /// Grid time `t_j`; computed from `j` directly so there is no drift and `t_m = r`.
    #[inline]
    pub fn time(&self, j: usize) -> f64 {
        debug_assert!(j <= self.steps);
        if j == self.steps {
            self.r
        } else {
            self.ell + (self.r - self.ell) * (j as f64 / self.steps as f64)
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.time(j)).collect()
    }

    /// Closest grid index to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = ((t - self.ell) / self.dt()).round();
        x.clamp(0.0, self.steps as f64) as usize
    }

    /// Index of `t` if it is a grid point (within a small relative tolerance).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let j = self.nearest_index(t);
        ((self.time(j) - t).abs() <= 1e-9 * self.dt()).then_some(j)
    }

    /// Sub-grid on `[t_{j_a}, t_{j_b}]` with the same spacing.
    pub fn subgrid(&self, j_a: usize, j_b: usize) -> Result<Self> {
        if !(j_a < j_b && j_b <= self.steps) {
            return Err(Error::param(format!("bad sub-window [{j_a}, {j_b}]")));
        }
        Self::new(self.time(j_a), self.time(j_b), j_b - j_a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_exact_and_increasing() {
        let g = GridInterval::new(-20.0, 20.0, 800).unwrap();
        assert_eq!(g.time(0), -20.0);
        assert_eq!(g.time(800), 20.0);
        assert_eq!(g.time(400), 0.0);
        assert!(g.times().windows(2).all(|w| w[0] < w[1]));
        assert!((g.time(799) - (20.0 - 0.05)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridInterval::new(1.0, 1.0, 4).is_err());
        assert!(GridInterval::new(0.0, 1.0, 0).is_err());
        assert!(GridInterval::symmetric(1.0, 0.3).is_err());
        assert_eq!(GridInterval::symmetric(10.0, 0.05).unwrap().steps(), 400);
    }

    #[test]
    fn index_lookup() {
        let g = GridInterval::symmetric(2.0, 0.1).unwrap();
        assert_eq!(g.index_of(0.0), Some(20));
        assert_eq!(g.index_of(0.05), None);
        assert_eq!(g.nearest_index(100.0), 40);
    }
}

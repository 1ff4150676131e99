use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BoundarySpec, GridInterval, TiltParams};
use crate::error::{Error, Result};

/// `n` ordered discrete paths on a grid, with their boundary data, tilt and
/// optional floor, ceiling and interior pin columns.
///
/// Line `0` is the top line. Heights are stored line-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleState {
    grid: GridInterval,
    n: usize,
    heights: Vec<f64>,
    boundary: BoundarySpec,
    tilt: TiltParams,
    floor: Vec<f64>,
    ceiling: Vec<f64>,
    pinned: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NonFinite,
    /// `line` is not strictly above `line + 1`.
    Order,
    /// Bottom line not strictly above the floor.
    Floor,
    /// Top line not strictly below the ceiling.
    Ceiling,
    /// End column disagrees with the boundary data.
    Boundary,
    /// Pinned interior column not at zero.
    Pin,
    FloorAboveCeiling,
}

/// First failing constraint found by [`EnsembleState::check_ordering`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub line: usize,
    pub grid_index: usize,
    pub value: f64,
    pub bound: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} violation at line {} grid index {}: value {} vs bound {}",
            self.kind, self.line, self.grid_index, self.value, self.bound
        )
    }
}

impl EnsembleState {
    /// Ensemble of `n` lines with floor 0, no ceiling, and a canonical valid configuration.
    pub fn new(grid: GridInterval, n: usize, tilt: TiltParams, boundary: BoundarySpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("ensemble needs at least one line"));
        }
        boundary.validate(n)?;
        let pts = grid.points();
        let mut s = Self {
            grid,
            n,
            heights: vec![0.0; n * pts],
            boundary,
            tilt,
            floor: vec![0.0; pts],
            ceiling: vec![f64::INFINITY; pts],
            pinned: vec![false; pts],
        };
        s.reinitialize()?;
        Ok(s)
    }

    /// Builds a state from explicit line paths and validates every invariant.
    pub fn from_lines(
        grid: GridInterval,
        lines: &[Vec<f64>],
        tilt: TiltParams,
        boundary: BoundarySpec,
    ) -> Result<Self> {
        let n = lines.len();
        let mut s = Self::new(grid, n, tilt, boundary)?;
        for (i, l) in lines.iter().enumerate() {
            if l.len() != grid.points() {
                return Err(Error::Dimension {
                    expected: grid.points(),
                    got: l.len(),
                });
            }
            s.line_mut(i).copy_from_slice(l);
        }
        s.check_ordering().map_err(Error::Invariant)?;
        Ok(s)
    }

    /// Replaces the floor (default 0) and resets to a canonical configuration.
    pub fn with_floor(mut self, floor: Vec<f64>) -> Result<Self> {
        self.expect_len(floor.len())?;
        self.floor = floor;
        self.reinitialize()?;
        Ok(self)
    }

    /// Replaces the ceiling (default +inf) and resets to a canonical configuration.
    pub fn with_ceiling(mut self, ceiling: Vec<f64>) -> Result<Self> {
        self.expect_len(ceiling.len())?;
        self.ceiling = ceiling;
        self.reinitialize()?;
        Ok(self)
    }

    /// Pins every line to zero at the given interior grid indices.
    pub fn with_pins(mut self, indices: &[usize]) -> Result<Self> {
        for &j in indices {
            if j == 0 || j >= self.grid.steps() {
                return Err(Error::param(format!("pin index {j} is not interior")));
            }
            self.pinned[j] = true;
        }
        self.reinitialize()?;
        Ok(self)
    }

    fn expect_len(&self, len: usize) -> Result<()> {
        if len != self.grid.points() {
            return Err(Error::Dimension {
                expected: self.grid.points(),
                got: len,
            });
        }
        Ok(())
    }

    /// Resets to a strictly ordered configuration satisfying floor, ceiling,
    /// pins and boundary data.
    pub fn reinitialize(&mut self) -> Result<()> {
        let m = self.grid.steps();
        let dt = self.grid.dt();
        let n = self.n;
        // distance (in time) to the nearest pinned column
        let pinned_cols: Vec<usize> = (0..=m)
            .filter(|&j| self.is_pinned(j) || ((j == 0 || j == m) && !self.boundary.is_free()))
            .collect();
        for j in 0..=m {
            if self.floor[j] >= self.ceiling[j] {
                return Err(Error::Invariant(Violation {
                    kind: ViolationKind::FloorAboveCeiling,
                    line: n - 1,
                    grid_index: j,
                    value: self.floor[j],
                    bound: self.ceiling[j],
                }));
            }
            let boundary_col = j == 0 || j == m;
            if boundary_col && !self.boundary.is_free() {
                for i in 0..n {
                    let v = self.boundary.pinned_value(i, j == m).unwrap();
                    self.set(i, j, v);
                }
                continue;
            }
            if self.pinned[j] {
                for i in 0..n {
                    self.set(i, j, 0.0);
                }
                continue;
            }
            let dist = pinned_cols
                .iter()
                .map(|&p| p.abs_diff(j) as f64 * dt)
                .fold(f64::INFINITY, f64::min);
            let shape = dist.sqrt().min(1.0);
            let base = self.interpolated_top(j).max(self.floor[j]);
            let lo = self.floor[j];
            let hi = self.ceiling[j].min(base + 0.8 * n as f64 * shape.max(0.05));
            if !(hi > lo) {
                return Err(Error::param(format!("no room between floor and ceiling at {j}")));
            }
            for i in 0..n {
                let v = lo + (hi - lo) * (n - i) as f64 / (n + 1) as f64;
                self.set(i, j, v);
            }
        }
        Ok(())
    }

    fn interpolated_top(&self, j: usize) -> f64 {
        match &self.boundary {
            BoundarySpec::Fixed { left, right } => {
                let th = j as f64 / self.grid.steps() as f64;
                (1.0 - th) * left[0] + th * right[0]
            }
            _ => 0.0,
        }
    }

    pub fn grid(&self) -> &GridInterval {
        &self.grid
    }

    pub fn n_lines(&self) -> usize {
        self.n
    }

    pub fn tilt(&self) -> &TiltParams {
        &self.tilt
    }

    pub fn boundary(&self) -> &BoundarySpec {
        &self.boundary
    }

    pub fn floor(&self) -> &[f64] {
        &self.floor
    }

    pub fn ceiling(&self) -> &[f64] {
        &self.ceiling
    }

    /// Replaces the ceiling in place without resetting the configuration.
    pub fn set_ceiling_at(&mut self, j: usize, value: f64) {
        self.ceiling[j] = value;
    }

    pub fn is_pinned(&self, j: usize) -> bool {
        self.pinned[j]
    }

    pub fn pinned_indices(&self) -> Vec<usize> {
        (0..self.pinned.len()).filter(|&j| self.pinned[j]).collect()
    }

    /// Column `j` may be moved by the samplers.
    #[inline]
    pub fn is_free_column(&self, j: usize) -> bool {
        let m = self.grid.steps();
        if self.pinned[j] {
            return false;
        }
        if j == 0 || j == m {
            return self.boundary.is_free();
        }
        true
    }

    #[inline]
    pub fn line(&self, i: usize) -> &[f64] {
        let p = self.grid.points();
        &self.heights[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn line_mut(&mut self, i: usize) -> &mut [f64] {
        let p = self.grid.points();
        &mut self.heights[i * p..(i + 1) * p]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.heights[i * self.grid.points() + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self.grid.points();
        self.heights[i * p + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn raw_heights(&self) -> &[f64] {
        &self.heights
    }

    /// Strict lower bound for line `i` at column `j`.
    #[inline]
    pub fn lower_bound(&self, i: usize, j: usize) -> f64 {
        if i + 1 < self.n {
            self.get(i + 1, j)
        } else {
            self.floor[j]
        }
    }

    /// Strict upper bound for line `i` at column `j`.
    #[inline]
    pub fn upper_bound(&self, i: usize, j: usize) -> f64 {
        if i > 0 {
            self.get(i - 1, j).min(self.ceiling[j])
        } else {
            self.ceiling[j]
        }
    }

    /// Checks every ordering, floor, ceiling, pin and boundary constraint and
    /// reports the first one that fails.
    pub fn check_ordering(&self) -> Result<(), Violation> {
        let m = self.grid.steps();
        let n = self.n;
        let viol = |kind, line, grid_index, value, bound| Violation {
            kind,
            line,
            grid_index,
            value,
            bound,
        };
        for j in 0..=m {
            if self.floor[j] >= self.ceiling[j] {
                return Err(viol(ViolationKind::FloorAboveCeiling, n - 1, j, self.floor[j], self.ceiling[j]));
            }
            for i in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() {
                    return Err(viol(ViolationKind::NonFinite, i, j, v, 0.0));
                }
            }
            let boundary_col = j == 0 || j == m;
            if boundary_col && !self.boundary.is_free() {
                for i in 0..n {
                    let want = self.boundary.pinned_value(i, j == m).unwrap();
                    let v = self.get(i, j);
                    if v != want {
                        return Err(viol(ViolationKind::Boundary, i, j, v, want));
                    }
                }
                continue;
            }
            if self.pinned[j] {
                for i in 0..n {
                    let v = self.get(i, j);
                    if v != 0.0 {
                        return Err(viol(ViolationKind::Pin, i, j, v, 0.0));
                    }
                }
                continue;
            }
            for i in 0..n.saturating_sub(1) {
                let (a, b) = (self.get(i, j), self.get(i + 1, j));
                if !(a > b) {
                    return Err(viol(ViolationKind::Order, i, j, a, b));
                }
            }
            let bottom = self.get(n - 1, j);
            if !(bottom > self.floor[j]) {
                return Err(viol(ViolationKind::Floor, n - 1, j, bottom, self.floor[j]));
            }
            let top = self.get(0, j);
            if !(top < self.ceiling[j]) {
                return Err(viol(ViolationKind::Ceiling, 0, j, top, self.ceiling[j]));
            }
        }
        Ok(())
    }

    /// Adds `c` to every height, the floor, the ceiling and fixed boundary data.
    /// Pinned columns and zero boundaries are not translation invariant, so
    /// those are rejected.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        if self.pinned.iter().any(|&p| p) || matches!(self.boundary, BoundarySpec::Zero) {
            return Err(Error::precondition("cannot shift a state with zero-pinned columns"));
        }
        let mut s = self.clone();
        s.heights.iter_mut().for_each(|h| *h += c);
        s.floor.iter_mut().for_each(|h| *h += c);
        s.ceiling.iter_mut().for_each(|h| *h += c);
        if let BoundarySpec::Fixed { left, right } = &mut s.boundary {
            left.iter_mut().chain(right.iter_mut()).for_each(|h| *h += c);
        }
        Ok(s)
    }

    /// Index of the grid point closest to time 0 (or `t`).
    pub fn index_near(&self, t: f64) -> usize {
        self.grid.nearest_index(t)
    }

    pub(crate) fn from_raw(
        grid: GridInterval,
        n: usize,
        heights: Vec<f64>,
        boundary: BoundarySpec,
        tilt: TiltParams,
        floor: Vec<f64>,
        ceiling: Vec<f64>,
        pinned: Vec<bool>,
    ) -> Result<Self> {
        let pts = grid.points();
        if heights.len() != n * pts || floor.len() != pts || ceiling.len() != pts || pinned.len() != pts {
            return Err(Error::Dimension {
                expected: n * pts,
                got: heights.len(),
            });
        }
        boundary.validate(n)?;
        Ok(Self {
            grid,
            n,
            heights,
            boundary,
            tilt,
            floor,
            ceiling,
            pinned,
        })
    }

    pub(crate) fn pinned_mask(&self) -> &[bool] {
        &self.pinned
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tilt() -> TiltParams {
        TiltParams::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn canonical_configurations_are_valid() {
        let g = GridInterval::symmetric(3.0, 0.25).unwrap();
        for b in [
            BoundarySpec::Zero,
            BoundarySpec::Free,
            BoundarySpec::Fixed {
                left: vec![3.0, 2.0, 0.5],
                right: vec![1.0, 0.4, 0.1],
            },
        ] {
            let s = EnsembleState::new(g, 3, tilt(), b).unwrap();
            s.check_ordering().unwrap();
        }
        let pinned = EnsembleState::new(g, 2, tilt(), BoundarySpec::Zero)
            .unwrap()
            .with_pins(&[8, 16])
            .unwrap();
        pinned.check_ordering().unwrap();
        let mut ceil = vec![f64::INFINITY; g.points()];
        ceil[12] = 0.01;
        let capped = EnsembleState::new(g, 4, tilt(), BoundarySpec::Zero)
            .unwrap()
            .with_ceiling(ceil)
            .unwrap();
        capped.check_ordering().unwrap();
    }

    #[test]
    fn two_constant_lines_are_ordered() {
        let g = GridInterval::new(0.0, 1.0, 4).unwrap();
        let s = EnsembleState::from_lines(g, &[vec![2.0; 5], vec![1.0; 5]], tilt(), BoundarySpec::Free).unwrap();
        assert!(s.check_ordering().is_ok());
    }

    #[test]
    fn tie_is_reported_with_location() {
        let g = GridInterval::new(0.0, 1.0, 4).unwrap();
        let mut s = EnsembleState::from_lines(g, &[vec![2.0; 5], vec![1.0; 5]], tilt(), BoundarySpec::Free).unwrap();
        s.set(0, 2, 1.0);
        let v = s.check_ordering().unwrap_err();
        assert_eq!(v.kind, ViolationKind::Order);
        assert_eq!((v.line, v.grid_index), (0, 2));
        assert_eq!((v.value, v.bound), (1.0, 1.0));
    }

    #[test]
    fn touching_floor_inside_fails() {
        let g = GridInterval::new(0.0, 1.0, 4).unwrap();
        let mut s = EnsembleState::new(g, 1, tilt(), BoundarySpec::Zero).unwrap();
        s.set(0, 1, 0.0);
        assert_eq!(s.check_ordering().unwrap_err().kind, ViolationKind::Floor);
    }

    #[test]
    fn ties_allowed_at_zero_boundary_columns() {
        let g = GridInterval::new(0.0, 1.0, 4).unwrap();
        let s = EnsembleState::new(g, 3, tilt(), BoundarySpec::Zero).unwrap();
        assert_eq!(s.column(0), vec![0.0; 3]);
        assert!(s.check_ordering().is_ok());
    }
}

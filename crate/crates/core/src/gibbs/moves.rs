use serde::{Deserialize, Serialize};

use crate::bridge::fill_bridge;
use crate::error::{Error, Result};
use crate::model::{EnsembleState, Violation, ViolationKind};
use crate::rng::RngStream;
use crate::special::{normal_log_pdf, truncated_normal_inv};

/// Lines `top_line..=bottom_line` (1-based, `top_line` is always 1) on the
/// interior of the grid window `[window.0, window.1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub top_line: usize,
    pub bottom_line: usize,
    pub window: (usize, usize),
}

impl BlockSpec {
    pub fn top(bottom_line: usize, j_a: usize, j_b: usize) -> Self {
        Self {
            top_line: 1,
            bottom_line,
            window: (j_a, j_b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Mean, standard deviation and open bounds of the full conditional of
/// `(i, j)`: a Gaussian from the neighbouring increments, shifted by the
/// linear tilt term, truncated to the corridor between the adjacent lines.
#[inline]
pub(crate) fn site_conditional(state: &EnsembleState, i: usize, j: usize) -> (f64, f64, f64, f64) {
    let m = state.grid().steps();
    let dt = state.grid().dt();
    let c = state.tilt().coefficient(i);
    let line = state.line(i);
    let (mean0, var, weight) = if j == 0 {
        (line[1], dt, 0.5 * dt)
    } else if j == m {
        (line[m - 1], dt, 0.5 * dt)
    } else {
        (0.5 * (line[j - 1] + line[j + 1]), 0.5 * dt, dt)
    };
    let mean = mean0 - c * weight * var;
    (mean, var.sqrt(), state.lower_bound(i, j), state.upper_bound(i, j))
}

/// Draws the value at `(i, j)` by inversion at `u`; does not write it.
#[inline]
pub(crate) fn heat_bath_value(state: &EnsembleState, i: usize, j: usize, u: f64) -> Result<f64> {
    let (mean, sd, lo, hi) = site_conditional(state, i, j);
    truncated_normal_inv(u, mean, sd, lo, hi).ok_or_else(|| {
        Error::Invariant(Violation {
            kind: if lo >= state.ceiling()[j] {
                ViolationKind::Ceiling
            } else {
                ViolationKind::Order
            },
            line: i,
            grid_index: j,
            value: lo,
            bound: hi,
        })
    })
}

/// Exact single-site Gibbs update of line `i` (0-based) at grid index `j`.
///
/// Free end columns of a free-boundary ensemble are updated from their
/// one-sided conditional.
pub fn heat_bath_point(state: &mut EnsembleState, i: usize, j: usize, rng: &mut RngStream) -> Result<()> {
    if i >= state.n_lines() || j > state.grid().steps() {
        return Err(Error::param(format!("site ({i}, {j}) outside the ensemble")));
    }
    if !state.is_free_column(j) {
        return Err(Error::precondition(format!("grid index {j} is pinned")));
    }
    let v = heat_bath_value(state, i, j, rng.uniform())?;
    state.set(i, j, v);
    Ok(())
}

/// One heat-bath pass over every movable site, line by line.
pub fn heat_bath_sweep(state: &mut EnsembleState, rng: &mut RngStream) -> Result<()> {
    let m = state.grid().steps();
    let cols: Vec<usize> = (0..=m).filter(|&j| state.is_free_column(j)).collect();
    for i in 0..state.n_lines() {
        for &j in &cols {
            let v = heat_bath_value(state, i, j, rng.uniform())?;
            state.set(i, j, v);
        }
    }
    Ok(())
}

/// Reusable proposal buffer for block moves.
#[derive(Default, Clone, Debug)]
pub(crate) struct BlockScratch {
    proposal: Vec<f64>,
}

/// Metropolis block move: new interior values for the top lines of the window
/// are proposed from free bridges and accepted with the tilt ratio when the
/// ordering holds. Returns whether the proposal was accepted.
pub fn resample_block(state: &mut EnsembleState, block: &BlockSpec, rng: &mut RngStream) -> Result<bool> {
    resample_block_with(state, block, rng, &mut BlockScratch::default())
}

pub(crate) fn resample_block_with(
    state: &mut EnsembleState,
    block: &BlockSpec,
    rng: &mut RngStream,
    scratch: &mut BlockScratch,
) -> Result<bool> {
    let n = state.n_lines();
    let m = state.grid().steps();
    let (ja, jb) = block.window;
    if block.top_line != 1 || block.bottom_line == 0 || block.bottom_line > n {
        return Err(Error::param(format!(
            "block lines {}..={} invalid for {n} lines",
            block.top_line, block.bottom_line
        )));
    }
    if jb > m || jb < ja + 2 {
        return Err(Error::param(format!("block window ({ja}, {jb}) invalid")));
    }
    if (ja + 1..jb).any(|j| state.is_pinned(j)) {
        return Err(Error::precondition("block window contains a pinned column"));
    }
    for j in [ja, jb] {
        if state.get(0, j) >= state.ceiling()[j] {
            return Err(Error::precondition(format!("window end {j} conflicts with the ceiling")));
        }
    }
    let k = block.bottom_line;
    let len = jb - ja + 1;
    let dt = state.grid().dt();
    scratch.proposal.resize(k * len, 0.0);
    for i in 0..k {
        let (x, y) = (state.get(i, ja), state.get(i, jb));
        fill_bridge(&mut scratch.proposal[i * len..(i + 1) * len], dt, x, y, rng);
    }
    let u = rng.uniform();

    let prop = &scratch.proposal;
    let mut log_ratio = 0.0;
    for i in 0..k {
        let old = &state.line(i)[ja + 1..jb];
        let new = &prop[i * len + 1..(i + 1) * len - 1];
        let diff: f64 = new.iter().zip(old).map(|(a, b)| a - b).sum();
        log_ratio -= state.tilt().coefficient(i) * dt * diff;
    }
    for jj in 1..len - 1 {
        let j = ja + jj;
        if !(prop[jj] < state.ceiling()[j]) {
            return Ok(false);
        }
        for i in 1..k {
            if !(prop[(i - 1) * len + jj] > prop[i * len + jj]) {
                return Ok(false);
            }
        }
        let below = if k < n { state.get(k, j) } else { state.floor()[j] };
        if !(prop[(k - 1) * len + jj] > below) {
            return Ok(false);
        }
    }
    if log_ratio >= 0.0 || u < log_ratio.exp() {
        for i in 0..k {
            state.line_mut(i)[ja + 1..jb].copy_from_slice(&prop[i * len + 1..(i + 1) * len - 1]);
        }
        return Ok(true);
    }
    Ok(false)
}

/// Random-walk Metropolis move of a whole end column of a free-boundary
/// ensemble. Returns whether the proposal was accepted.
pub fn free_endpoint_move(state: &mut EnsembleState, side: Side, sigma: f64, rng: &mut RngStream) -> Result<bool> {
    if !state.boundary().is_free() {
        return Err(Error::precondition("endpoint moves need a free boundary"));
    }
    if !(sigma >= 0.0) {
        return Err(Error::param("proposal step must be non-negative"));
    }
    let n = state.n_lines();
    let m = state.grid().steps();
    let dt = state.grid().dt();
    let (j, nb) = match side {
        Side::Left => (0, 1),
        Side::Right => (m, m - 1),
    };
    let proposal: Vec<f64> = (0..n).map(|i| state.get(i, j) + sigma * rng.standard_normal()).collect();
    let u = rng.uniform();
    let ordered = proposal.windows(2).all(|w| w[0] > w[1])
        && proposal[n - 1] > state.floor()[j]
        && proposal[0] < state.ceiling()[j];
    if !ordered {
        return Ok(false);
    }
    let mut log_ratio = 0.0;
    for (i, &new) in proposal.iter().enumerate() {
        let old = state.get(i, j);
        let h = state.get(i, nb);
        log_ratio += normal_log_pdf(h, new, dt) - normal_log_pdf(h, old, dt);
        log_ratio -= state.tilt().coefficient(i) * 0.5 * dt * (new - old);
    }
    if log_ratio >= 0.0 || u < log_ratio.exp() {
        for (i, &new) in proposal.iter().enumerate() {
            state.set(i, j, new);
        }
        return Ok(true);
    }
    Ok(false)
}

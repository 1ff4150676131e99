use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pair::{dominated, monotone_coupled_sweep, CoupledPair};
use super::stopping::detect_stopping_domain;
use crate::error::{Error, Result};
use crate::estimators::stats::{clopper_pearson, Proportion};
use crate::gibbs::{run_chain, BurnIn, ChainConfig, Observable};
use crate::model::{BoundarySpec, EnsembleState, GridInterval, TiltParams};
use crate::rng::{stream_id, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseCouplingParams {
    pub n: usize,
    /// Half-width: the ensembles live on `[-T, T]`.
    pub half_width: f64,
    pub u: f64,
    pub dt: f64,
    pub tilt: TiltParams,
    /// Sweeps used to equilibrate each ensemble.
    pub burn_in: u64,
    /// Coupled sweeps used to resample inside the stopping domain.
    pub resample_sweeps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseCouplingOutcome {
    pub trial: u64,
    /// Stopping domain found in the zero-boundary sample.
    pub found: bool,
    /// Free top line at most `u` at both stopping times.
    pub event_a: bool,
    /// `event_a` and the stopping times straddle `[-T/2, T/2]`.
    pub event_b: bool,
    pub tau_ell: Option<f64>,
    pub tau_r: Option<f64>,
    /// `event_b` and, after resampling, free `<=` zero on `[-T/2, T/2]`.
    pub success: bool,
}

/// One trial of the reverse coupling: an equilibrated free-boundary sample `X`
/// and zero-boundary sample `Y` on `[-T, T]`; if the bottom line of `Y`
/// reaches `u` before `-T/2` and after `T/2` while the top line of `X` is at
/// most `u` there, both are resampled on the stopping domain under the
/// monotone coupling and compared on `[-T/2, T/2]`.
pub fn reverse_coupling_experiment(p: &ReverseCouplingParams, seed: u64, trial: u64) -> Result<ReverseCouplingOutcome> {
    if !(p.u > 0.0 && p.half_width > 0.0) {
        return Err(Error::param("u and T must be positive"));
    }
    let grid = GridInterval::with_spacing(-p.half_width, p.half_width, p.dt)?;
    let tag = p.half_width.to_bits();
    let chain = |boundary: BoundarySpec, role: u64| {
        ChainConfig::new(p.n, grid, p.tilt, boundary)
            .with_seed(seed, stream_id(&[0x726576, tag, trial, role]))
            .with_sampling(BurnIn::Sweeps(p.burn_in), 0, 1)
    };
    let mut x = run_chain(&chain(BoundarySpec::Free, 0), &[])?.final_state;
    let mut y = run_chain(&chain(BoundarySpec::Zero, 1), &[])?.final_state;

    let dom = detect_stopping_domain(&y, p.u);
    let mut out = ReverseCouplingOutcome {
        trial,
        found: dom.found,
        event_a: false,
        event_b: false,
        tau_ell: dom.tau_ell.map(|j| grid.time(j)),
        tau_r: dom.tau_r.map(|j| grid.time(j)),
        success: false,
    };
    if !dom.found {
        return Ok(out);
    }
    let (jl, jr) = (dom.tau_ell.unwrap(), dom.tau_r.unwrap());
    out.event_a = x.get(0, jl) <= p.u && x.get(0, jr) <= p.u;
    let inner_l = grid.nearest_index(-0.5 * p.half_width);
    let inner_r = grid.nearest_index(0.5 * p.half_width);
    out.event_b = out.event_a && jl < inner_l && jr > inner_r;
    if !out.event_b {
        return Ok(out);
    }

    let sub = grid.subgrid(jl, jr)?;
    let restrict = |s: &EnsembleState| -> Result<EnsembleState> {
        let b = BoundarySpec::Fixed {
            left: s.column(jl),
            right: s.column(jr),
        };
        EnsembleState::new(sub, p.n, p.tilt, b)
    };
    let mut low = restrict(&x)?;
    let mut high = restrict(&y)?;
    for i in 0..p.n {
        for j in 1..sub.steps() {
            let (a, b) = (x.get(i, jl + j), y.get(i, jl + j));
            low.set(i, j, a.min(b));
            high.set(i, j, a.max(b));
        }
    }
    low.check_ordering().map_err(Error::Invariant)?;
    high.check_ordering().map_err(Error::Invariant)?;
    let rng = RngStream::new(seed, stream_id(&[0x726576, tag, trial, 2]));
    let mut pair = CoupledPair::new(low, high, rng)?;
    for _ in 0..p.resample_sweeps {
        monotone_coupled_sweep(&mut pair)?;
    }
    let (low, high) = pair.into_parts();
    for i in 0..p.n {
        x.line_mut(i)[jl..=jr].copy_from_slice(low.line(i));
        y.line_mut(i)[jl..=jr].copy_from_slice(high.line(i));
    }
    out.success = (0..p.n).all(|i| (inner_l..=inner_r).all(|j| x.get(i, j) <= y.get(i, j)));
    Ok(out)
}

/// Runs `trials` independent reverse-coupling trials in parallel.
pub fn reverse_coupling_trials(p: &ReverseCouplingParams, seed: u64, trials: u64) -> Result<Vec<ReverseCouplingOutcome>> {
    (0..trials)
        .into_par_iter()
        .map(|t| reverse_coupling_experiment(p, seed, t))
        .collect()
}

/// Sample of the `n`-line ensemble on `[-T, T]` pinned to zero at
/// `-T + spacing * k`. The blocks between pins are independent zero-boundary
/// ensembles and are sampled in parallel, each from its own chain.
pub fn pinned_ensemble_sample(
    n: usize,
    half_width: f64,
    spacing: f64,
    dt: f64,
    tilt: TiltParams,
    burn_in: u64,
    seed: u64,
    draw: u64,
) -> Result<EnsembleState> {
    if !(spacing > 0.0) || 2.0 * half_width < spacing {
        return Err(Error::param("need 0 < pin spacing <= 2T"));
    }
    let grid = GridInterval::with_spacing(-half_width, half_width, dt)?;
    let per_block = (spacing / dt).round() as usize;
    if ((per_block as f64) * dt - spacing).abs() > 1e-9 * spacing {
        return Err(Error::param("pin spacing must be a multiple of dt"));
    }
    let m = grid.steps();
    let pins: Vec<usize> = (1..).map(|k| k * per_block).take_while(|&j| j < m).collect();
    let mut cuts = vec![0];
    cuts.extend(&pins);
    cuts.push(m);
    let blocks: Vec<(usize, usize)> = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    let parts = blocks
        .par_iter()
        .enumerate()
        .map(|(b, &(ja, jb))| -> Result<EnsembleState> {
            let sub = grid.subgrid(ja, jb)?;
            let cfg = ChainConfig::new(n, sub, tilt, BoundarySpec::Zero)
                .with_seed(seed, stream_id(&[0x70696e, draw, b as u64]))
                .with_sampling(BurnIn::Sweeps(burn_in), 0, 1);
            Ok(run_chain(&cfg, &[])?.final_state)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut state = EnsembleState::new(grid, n, tilt, BoundarySpec::Zero)?.with_pins(&pins)?;
    for (&(ja, jb), part) in blocks.iter().zip(&parts) {
        for i in 0..n {
            state.line_mut(i)[ja..=jb].copy_from_slice(part.line(i));
        }
    }
    state.check_ordering().map_err(Error::Invariant)?;
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceEstimate {
    pub k: usize,
    pub v: f64,
    pub proportion: Proportion,
}

/// Estimates the probability that each line `i` (1-based) of the `k`-line
/// zero-boundary ensemble on `[-1, 1]` is at least `v * lambda^{-(i-1)/3}`
/// at time 0. Draws are taken from `chains` independent chains, `thin`
/// sweeps apart; the interval is Clopper–Pearson at 95%.
pub fn estimate_pinned_exceedance(
    k: usize,
    v: f64,
    trials: u64,
    dt: f64,
    tilt: TiltParams,
    chains: u64,
    burn_in: u64,
    thin: u64,
    seed: u64,
) -> Result<ExceedanceEstimate> {
    if k == 0 || trials == 0 || chains == 0 {
        return Err(Error::param("k, trials and chains must be positive"));
    }
    let grid = GridInterval::with_spacing(-1.0, 1.0, dt)?;
    let obs: Vec<Observable> = (0..k).map(|i| Observable::height_at(&grid, i, 0.0)).collect();
    let lambda = tilt.lambda();
    let hits: u64 = (0..chains)
        .into_par_iter()
        .map(|c| -> Result<u64> {
            let share = trials / chains + u64::from(c < trials % chains);
            let cfg = ChainConfig::new(k, grid, tilt, BoundarySpec::Zero)
                .with_seed(seed, stream_id(&[0x657863, k as u64, v.to_bits(), c]))
                .with_sampling(BurnIn::Sweeps(burn_in), share, thin);
            let s = run_chain(&cfg, &obs)?;
            Ok((0..s.len())
                .filter(|&t| (0..k).all(|i| s.values[i][t] >= v * lambda.powf(-(i as f64) / 3.0)))
                .count() as u64)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();
    Ok(ExceedanceEstimate {
        k,
        v,
        proportion: clopper_pearson(hits, trials, 0.05)?,
    })
}

/// Runs a coupled pair for `sweeps` sweeps and reports the first sweep at
/// which the order certificate failed, if any.
pub fn certify_coupling(pair: &mut CoupledPair, sweeps: u64) -> Result<Option<u64>> {
    for s in 0..sweeps {
        if !monotone_coupled_sweep(pair)? {
            return Ok(Some(s + 1));
        }
    }
    Ok(None)
}

/// Pinned sample and unpinned zero-boundary sample of the same ensemble,
/// equilibrated jointly under the monotone coupling from the ordered start
/// (pinned canonical configuration, unpinned configuration raised above it).
pub fn coupled_pinned_vs_free(
    n: usize,
    half_width: f64,
    spacing: f64,
    dt: f64,
    tilt: TiltParams,
    sweeps: u64,
    seed: u64,
) -> Result<(CoupledPair, Option<u64>)> {
    let grid = GridInterval::with_spacing(-half_width, half_width, dt)?;
    let per_block = (spacing / dt).round() as usize;
    let pins: Vec<usize> = (1..).map(|k| k * per_block).take_while(|&j| j < grid.steps()).collect();
    let low = EnsembleState::new(grid, n, tilt, BoundarySpec::Zero)?.with_pins(&pins)?;
    let mut high = EnsembleState::new(grid, n, tilt, BoundarySpec::Zero)?;
    for i in 0..n {
        for j in 1..grid.steps() {
            let v = high.get(i, j).max(low.get(i, j) + 1e-9) + (n - i) as f64;
            high.set(i, j, v);
        }
    }
    high.check_ordering().map_err(Error::Invariant)?;
    let mut pair = CoupledPair::new(low, high, RngStream::new(seed, stream_id(&[0x7066, n as u64])))?;
    let fail = certify_coupling(&mut pair, sweeps)?;
    debug_assert_eq!(fail.is_none(), dominated(pair.low(), pair.high()));
    Ok((pair, fail))
}

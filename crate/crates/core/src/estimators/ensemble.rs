//! Estimators that drive their own chains: the scaling identity, free versus
//! zero boundary convergence, pinning witnesses and lower-tail slopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mcmc::{batch_means, MeanEstimate};
use super::stats::{clopper_pearson, ks_two_sample, KsResult, Proportion};
use crate::error::{Error, Result};
use crate::gibbs::{run_chain_from, run_chains, BurnIn, ChainConfig, Observable, SampleSet};
use crate::model::{BoundarySpec, EnsembleState, GridInterval, TiltParams};
use crate::rng::stream_id;

/// How the chains behind an estimate are run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub dt: f64,
    pub chains: u64,
    /// Recorded samples per chain.
    pub samples: u64,
    pub thin: u64,
    pub burn_in: u64,
    pub seed: u64,
}

impl SamplingPlan {
    fn configs(&self, n: usize, grid: GridInterval, tilt: TiltParams, boundary: BoundarySpec, tag: &[u64]) -> Vec<ChainConfig> {
        (0..self.chains)
            .map(|c| {
                let mut parts = tag.to_vec();
                parts.push(c);
                ChainConfig::new(n, grid, tilt, boundary.clone())
                    .with_seed(self.seed, stream_id(&parts))
                    .with_sampling(BurnIn::Sweeps(self.burn_in), self.samples, self.thin)
            })
            .collect()
    }
}

/// Concatenated trace of observable `k` over chains.
pub fn pooled(sets: &[SampleSet], k: usize) -> Vec<f64> {
    sets.iter().flat_map(|s| s.series(k).iter().copied()).collect()
}

/// Mean over chains with an error from per-chain batch means.
pub fn pooled_mean(sets: &[SampleSet], k: usize) -> Result<MeanEstimate> {
    let per: Vec<MeanEstimate> = sets.iter().map(|s| batch_means(s.series(k))).collect::<Result<_>>()?;
    let total: usize = per.iter().map(|e| e.n).sum();
    let mean = per.iter().map(|e| e.mean * e.n as f64).sum::<f64>() / total as f64;
    let var = per
        .iter()
        .map(|e| (e.n as f64 / total as f64).powi(2) * e.se * e.se)
        .sum::<f64>();
    Ok(MeanEstimate {
        mean,
        se: var.sqrt(),
        n: total,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// `X^1(0)` under tilt `(a lambda, lambda)` on `[-T, T]`.
    pub direct: Vec<f64>,
    /// `X^1(0)` under tilt `(a, lambda)` on `[-lambda^{2/3} T, lambda^{2/3} T]`, unscaled.
    pub stretched: Vec<f64>,
    pub lambda: f64,
}

impl ScalingReport {
    /// KS test of `direct` against `lambda^{-exponent}` times `stretched`.
    pub fn ks(&self, exponent: f64) -> Result<KsResult> {
        let s = self.lambda.powf(-exponent);
        let mapped: Vec<f64> = self.stretched.iter().map(|x| s * x).collect();
        ks_two_sample(&self.direct, &mapped)
    }
}

/// Samples both sides of the Brownian scaling identity with zero boundary.
/// The stretched side uses grid step `lambda^{2/3} dt` so that the two
/// discrete measures correspond exactly under the map.
pub fn scaling_check(n: usize, half_width: f64, a: f64, lambda: f64, plan: &SamplingPlan) -> Result<ScalingReport> {
    let diag = lambda == 1.0;
    let mk = |a: f64| if diag { TiltParams::diagnostic(a, lambda) } else { TiltParams::new(a, lambda) };
    let s = lambda.powf(2.0 / 3.0);
    let g1 = GridInterval::with_spacing(-half_width, half_width, plan.dt)?;
    let steps = g1.steps();
    let g2 = GridInterval::new(-s * half_width, s * half_width, steps)?;
    let obs1 = [Observable::height_at(&g1, 0, 0.0)];
    let obs2 = [Observable::height_at(&g2, 0, 0.0)];
    let direct = run_chains(&plan.configs(n, g1, mk(a * lambda)?, BoundarySpec::Zero, &[0x7363, 1]), &obs1)?;
    let stretched = run_chains(&plan.configs(n, g2, mk(a)?, BoundarySpec::Zero, &[0x7363, 2]), &obs2)?;
    Ok(ScalingReport {
        direct: pooled(&direct, 0),
        stretched: pooled(&stretched, 0),
        lambda,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub half_width: f64,
    pub free: MeanEstimate,
    pub zero: MeanEstimate,
    /// `E_free[X^1(0)] - E_zero[X^1(0)]`.
    pub gap: f64,
    pub gap_se: f64,
    pub gap_line2: Option<(f64, f64)>,
    pub ks: KsResult,
}

/// Free versus zero boundary means of `X^1(0)` (and `X^2(0)`) for each
/// half-width.
pub fn free_vs_zero_convergence(n: usize, half_widths: &[f64], tilt: TiltParams, plan: &SamplingPlan) -> Result<Vec<ConvergenceRow>> {
    half_widths
        .iter()
        .map(|&t| {
            let grid = GridInterval::with_spacing(-t, t, plan.dt)?;
            let mut obs = vec![Observable::height_at(&grid, 0, 0.0)];
            if n >= 2 {
                obs.push(Observable::height_at(&grid, 1, 0.0));
            }
            let tag = t.to_bits();
            let free = run_chains(&plan.configs(n, grid, tilt, BoundarySpec::Free, &[0x66767a, tag, 0]), &obs)?;
            let zero = run_chains(&plan.configs(n, grid, tilt, BoundarySpec::Zero, &[0x66767a, tag, 1]), &obs)?;
            let (f, z) = (pooled_mean(&free, 0)?, pooled_mean(&zero, 0)?);
            let gap_line2 = if n >= 2 {
                let (f2, z2) = (pooled_mean(&free, 1)?, pooled_mean(&zero, 1)?);
                Some((f2.mean - z2.mean, (f2.se * f2.se + z2.se * z2.se).sqrt()))
            } else {
                None
            };
            Ok(ConvergenceRow {
                half_width: t,
                gap: f.mean - z.mean,
                gap_se: (f.se * f.se + z.se * z.se).sqrt(),
                free: f,
                zero: z,
                gap_line2,
                ks: ks_two_sample(&pooled(&free, 0), &pooled(&zero, 0))?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinningReport {
    pub eps: f64,
    /// Smallest 1-based line index whose window maximum stays below `eps`
    /// with estimated probability at least `1 - eps`.
    pub k: Option<usize>,
    /// Estimate for the witness, or for the best line when none qualifies.
    pub probability: Proportion,
}

/// Pinning witness from per-line window-maximum traces (`maxima[k]` for line `k + 1`).
pub fn pinning_check(maxima: &[Vec<f64>], eps: f64) -> Result<PinningReport> {
    let mut best: Option<Proportion> = None;
    for (k, m) in maxima.iter().enumerate() {
        if m.is_empty() {
            return Err(Error::InsufficientData("empty maxima trace".into()));
        }
        let hits = m.iter().filter(|&&x| x <= eps).count() as u64;
        let p = clopper_pearson(hits, m.len() as u64, 0.05)?;
        if p.estimate >= 1.0 - eps {
            return Ok(PinningReport {
                eps,
                k: Some(k + 1),
                probability: p,
            });
        }
        if best.is_none_or(|b| p.estimate > b.estimate) {
            best = Some(p);
        }
    }
    Ok(PinningReport {
        eps,
        k: None,
        probability: best.ok_or_else(|| Error::InsufficientData("no lines".into()))?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub eps: f64,
    pub ratio: f64,
    /// `P(X^1(0) <= eps / r | X^1(0) < eps r)`.
    pub q: f64,
    pub q_se: f64,
    /// Local slope `log(1/q) / log(r^2)` of `log P(X^1(0) <= e)` against `log e`.
    pub slope: f64,
    pub slope_se: f64,
    pub samples: usize,
}

/// Local log-log slope of the lower tail of `X^1(0)` at `eps`, estimated
/// from chains conditioned on `X^1(0) < eps r` by a ceiling at `t = 0`:
/// the slope is `-log q / (2 log r)` where `q` is the conditional
/// probability of `X^1(0) <= eps / r`.
pub fn lower_tail_slope(
    n: usize,
    half_width: f64,
    tilt: TiltParams,
    eps: f64,
    ratio: f64,
    plan: &SamplingPlan,
) -> Result<SlopeEstimate> {
    if !(ratio > 1.0 && eps > 0.0) {
        return Err(Error::param("need eps > 0 and ratio > 1"));
    }
    let grid = GridInterval::with_spacing(-half_width, half_width, plan.dt)?;
    let j0 = grid.nearest_index(0.0);
    let mut ceiling = vec![f64::INFINITY; grid.points()];
    ceiling[j0] = eps * ratio;
    let init = EnsembleState::new(grid, n, tilt, BoundarySpec::Zero)?.with_ceiling(ceiling)?;
    let obs = [Observable::Height { line: 0, index: j0 }];
    let configs = plan.configs(n, grid, tilt, BoundarySpec::Zero, &[0x736c6f, eps.to_bits(), ratio.to_bits()]);
    let sets = configs
        .par_iter()
        .map(|c| run_chain_from(init.clone(), c, &obs))
        .collect::<Result<Vec<_>>>()?;
    let cut = eps / ratio;
    let indicators: Vec<SampleSet> = sets
        .into_iter()
        .map(|mut s| {
            s.values[0].iter_mut().for_each(|x| *x = f64::from(u8::from(*x <= cut)));
            s
        })
        .collect();
    let q = pooled_mean(&indicators, 0)?;
    let l = 2.0 * ratio.ln();
    Ok(SlopeEstimate {
        eps,
        ratio,
        q: q.mean,
        q_se: q.se,
        slope: -q.mean.ln() / l,
        slope_se: q.se / (q.mean * l),
        samples: q.n,
    })
}

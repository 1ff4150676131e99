use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moves::{free_endpoint_move, heat_bath_sweep, resample_block_with, BlockScratch, BlockSpec, Side};
use crate::error::{Error, Result};
use crate::estimators::mcmc::integrated_autocorr_time;
use crate::model::io::{decode_state_from, encode_state_into, Decoder, Encoder};
use crate::model::{BoundarySpec, EnsembleState, GridInterval, TiltParams};
use crate::rng::{stream_id, RngStream};

const CHAIN_MAGIC: &[u8; 4] = b"TLEK";
const CHAIN_VERSION: u32 = 1;

/// Moves performed in each sweep after the heat-bath pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    /// Block proposals per sweep; skipped on grids with fewer than four steps.
    pub blocks_per_sweep: usize,
    /// Step of the free-endpoint random walk.
    pub proposal_sd: f64,
    /// Endpoint moves per side and sweep (free boundary only).
    pub endpoint_moves: usize,
}

impl Default for SweepSchedule {
    fn default() -> Self {
        Self {
            blocks_per_sweep: 4,
            proposal_sd: 0.2,
            endpoint_moves: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BurnIn {
    Sweeps(u64),
    /// Ten integrated autocorrelation times of the top line near `t = 0`,
    /// re-estimated as the trace grows, within `[min, max]` sweeps.
    Auto { min: u64, max: u64 },
}

impl Default for BurnIn {
    fn default() -> Self {
        BurnIn::Auto {
            min: 10_000,
            max: 1_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointPolicy {
    pub path: PathBuf,
    /// Write a checkpoint after every `every` sweeps.
    pub every: u64,
    /// Continue from `path` when it exists.
    pub resume: bool,
    /// Save and stop with [`Error::Halted`] after this many sweeps of the
    /// current invocation.
    pub halt_after: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub n_lines: usize,
    pub grid: GridInterval,
    pub tilt: TiltParams,
    pub boundary: BoundarySpec,
    pub schedule: SweepSchedule,
    pub burn_in: BurnIn,
    /// Number of recorded samples.
    pub samples: u64,
    /// Sweeps between recorded samples.
    pub thin: u64,
    pub seed: u64,
    pub chain_id: u64,
    pub checkpoint: Option<CheckpointPolicy>,
}

impl ChainConfig {
    pub fn new(n_lines: usize, grid: GridInterval, tilt: TiltParams, boundary: BoundarySpec) -> Self {
        Self {
            n_lines,
            grid,
            tilt,
            boundary,
            schedule: SweepSchedule::default(),
            burn_in: BurnIn::default(),
            samples: 0,
            thin: 1,
            seed: 0,
            chain_id: 0,
            checkpoint: None,
        }
    }

    pub fn with_seed(mut self, seed: u64, chain_id: u64) -> Self {
        self.seed = seed;
        self.chain_id = chain_id;
        self
    }

    pub fn with_sampling(mut self, burn_in: BurnIn, samples: u64, thin: u64) -> Self {
        self.burn_in = burn_in;
        self.samples = samples;
        self.thin = thin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_lines == 0 {
            return Err(Error::param("n_lines must be positive"));
        }
        if self.thin == 0 {
            return Err(Error::param("thin must be positive"));
        }
        if !(self.schedule.proposal_sd > 0.0) {
            return Err(Error::param("proposal step must be positive"));
        }
        if let BurnIn::Auto { min, max } = self.burn_in {
            if min > max {
                return Err(Error::param("burn-in minimum exceeds maximum"));
            }
        }
        if let Some(c) = &self.checkpoint {
            if c.every == 0 {
                return Err(Error::param("checkpoint interval must be positive"));
            }
        }
        self.boundary.validate(self.n_lines)
    }

    pub fn stream_id(&self) -> u64 {
        stream_id(&[0x636861696e, self.chain_id])
    }

    fn fingerprint(&self) -> Vec<u8> {
        let mut e = Encoder::default();
        e.u64(self.n_lines as u64);
        e.f64(self.grid.ell());
        e.f64(self.grid.r());
        e.u64(self.grid.steps() as u64);
        e.f64(self.tilt.a());
        e.f64(self.tilt.lambda());
        e.bytes(format!("{:?}", self.boundary).as_bytes());
        e.u64(self.schedule.blocks_per_sweep as u64);
        e.f64(self.schedule.proposal_sd);
        e.u64(self.schedule.endpoint_moves as u64);
        e.bytes(format!("{:?}", self.burn_in).as_bytes());
        e.u64(self.samples);
        e.u64(self.thin);
        e.u64(self.seed);
        e.u64(self.chain_id);
        e.buf
    }
}

/// Scalar functionals recorded after each thinned sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// Height of `line` (0-based) at grid index `index`.
    Height { line: usize, index: usize },
    /// Maximum of `line` over grid indices `from..=to`.
    WindowMax { line: usize, from: usize, to: usize },
    /// Trapezoidal area under `line`.
    Area { line: usize },
}

impl Observable {
    /// Height of `line` at the grid point nearest `t`.
    pub fn height_at(grid: &GridInterval, line: usize, t: f64) -> Self {
        Observable::Height {
            line,
            index: grid.nearest_index(t),
        }
    }

    pub fn window_max(grid: &GridInterval, line: usize, from: f64, to: f64) -> Self {
        Observable::WindowMax {
            line,
            from: grid.nearest_index(from),
            to: grid.nearest_index(to),
        }
    }

    pub fn evaluate(&self, state: &EnsembleState) -> f64 {
        match *self {
            Observable::Height { line, index } => state.get(line, index),
            Observable::WindowMax { line, from, to } => {
                state.line(line)[from..=to].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
            Observable::Area { line } => crate::model::functional::trapezoid(state.line(line), state.grid().dt()),
        }
    }

    pub fn name(&self, grid: &GridInterval) -> String {
        match *self {
            Observable::Height { line, index } => format!("x{}({})", line + 1, grid.time(index)),
            Observable::WindowMax { line, from, to } => {
                format!("max x{}[{},{}]", line + 1, grid.time(from), grid.time(to))
            }
            Observable::Area { line } => format!("area x{}", line + 1),
        }
    }

    fn check(&self, state: &EnsembleState) -> Result<()> {
        let (line, hi) = match *self {
            Observable::Height { line, index } => (line, index),
            Observable::WindowMax { line, from, to } => {
                if from > to {
                    return Err(Error::param("window max with from > to"));
                }
                (line, to)
            }
            Observable::Area { line } => (line, 0),
        };
        if line >= state.n_lines() || hi > state.grid().steps() {
            return Err(Error::param(format!("observable {self:?} outside the ensemble")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub block_proposed: u64,
    pub block_accepted: u64,
    pub endpoint_proposed: u64,
    pub endpoint_accepted: u64,
}

impl MoveStats {
    pub fn block_rate(&self) -> f64 {
        self.block_accepted as f64 / self.block_proposed.max(1) as f64
    }

    pub fn endpoint_rate(&self) -> f64 {
        self.endpoint_accepted as f64 / self.endpoint_proposed.max(1) as f64
    }
}

/// Recorded observable traces together with their provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub observables: Vec<Observable>,
    pub names: Vec<String>,
    /// `values[k]` is the trace of `observables[k]`.
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    pub chain_id: u64,
    pub stream_id: u64,
    pub burn_in_sweeps: u64,
    pub thin: u64,
    pub stats: MoveStats,
    pub final_state: EnsembleState,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn series(&self, k: usize) -> &[f64] {
        &self.values[k]
    }
}

/// Index used to monitor burn-in: the grid point nearest 0, or the middle.
fn monitor_index(grid: &GridInterval) -> usize {
    if grid.ell() <= 0.0 && grid.r() >= 0.0 {
        grid.nearest_index(0.0)
    } else {
        grid.steps() / 2
    }
}

/// Chain progress; everything needed to continue bit-identically.
#[derive(Clone, Debug)]
struct Progress {
    state: EnsembleState,
    rng_counter: u128,
    sweeps_done: u64,
    burn_done: bool,
    burn_target: u64,
    burn_sweeps: u64,
    trace: Vec<f64>,
    values: Vec<Vec<f64>>,
    stats: MoveStats,
}

/// Performs one full sweep: heat-bath pass, block proposals with
/// log-uniform window lengths in `[4, m/4]`, and free-endpoint moves.
pub fn sweep(state: &mut EnsembleState, schedule: &SweepSchedule, rng: &mut RngStream) -> Result<MoveStats> {
    let mut stats = MoveStats::default();
    sweep_with(state, schedule, rng, &mut BlockScratch::default(), &mut stats)?;
    Ok(stats)
}

fn sweep_with(
    state: &mut EnsembleState,
    schedule: &SweepSchedule,
    rng: &mut RngStream,
    scratch: &mut BlockScratch,
    stats: &mut MoveStats,
) -> Result<()> {
    heat_bath_sweep(state, rng)?;
    let m = state.grid().steps();
    let n = state.n_lines();
    if m >= 4 {
        let max_len = (m / 4).max(4) as f64;
        let log_span = max_len.ln() - 4f64.ln();
        for _ in 0..schedule.blocks_per_sweep {
            let k = rng.below(n as u64) as usize + 1;
            let len = ((4f64.ln() + rng.uniform() * log_span).exp().floor() as usize).clamp(4, m);
            let ja = rng.below((m - len + 1) as u64) as usize;
            let jb = ja + len;
            if (ja + 1..jb).any(|j| state.is_pinned(j)) {
                continue;
            }
            stats.block_proposed += 1;
            if resample_block_with(state, &BlockSpec::top(k, ja, jb), rng, scratch)? {
                stats.block_accepted += 1;
            }
        }
    }
    if state.boundary().is_free() {
        for _ in 0..schedule.endpoint_moves {
            for side in [Side::Left, Side::Right] {
                stats.endpoint_proposed += 1;
                if free_endpoint_move(state, side, schedule.proposal_sd, rng)? {
                    stats.endpoint_accepted += 1;
                }
            }
        }
    }
    Ok(())
}

/// Runs a chain from the canonical initial configuration of `config`.
pub fn run_chain(config: &ChainConfig, observables: &[Observable]) -> Result<SampleSet> {
    config.validate()?;
    let state = EnsembleState::new(config.grid, config.n_lines, config.tilt, config.boundary.clone())?;
    run_chain_from(state, config, observables)
}

/// Runs independent chains in parallel; results are in input order and do not
/// depend on the thread count.
pub fn run_chains(configs: &[ChainConfig], observables: &[Observable]) -> Result<Vec<SampleSet>> {
    configs.par_iter().map(|c| run_chain(c, observables)).collect()
}

/// Runs a chain from a caller-supplied state (floors, ceilings and pins are
/// taken from `initial`; grid, lines, tilt and boundary must match `config`).
pub fn run_chain_from(initial: EnsembleState, config: &ChainConfig, observables: &[Observable]) -> Result<SampleSet> {
    config.validate()?;
    if initial.grid() != &config.grid
        || initial.n_lines() != config.n_lines
        || initial.tilt() != &config.tilt
        || initial.boundary() != &config.boundary
    {
        return Err(Error::precondition("initial state does not match the chain configuration"));
    }
    initial.check_ordering().map_err(Error::Invariant)?;
    for o in observables {
        o.check(&initial)?;
    }
    let sid = config.stream_id();
    let mut progress = match &config.checkpoint {
        Some(cp) if cp.resume && cp.path.exists() => load_progress(&cp.path, config)?,
        _ => Progress {
            state: initial,
            rng_counter: 0,
            sweeps_done: 0,
            burn_done: false,
            burn_target: match config.burn_in {
                BurnIn::Sweeps(s) => s,
                BurnIn::Auto { min, .. } => min,
            },
            burn_sweeps: 0,
            trace: Vec::new(),
            values: vec![Vec::new(); observables.len()],
            stats: MoveStats::default(),
        },
    };
    let mut rng = RngStream::at_counter(config.seed, sid, progress.rng_counter);
    let mut scratch = BlockScratch::default();
    let monitor = monitor_index(&config.grid);
    let check_every: u64 = if cfg!(debug_assertions) { 1 } else { 64 };
    let total_recorded = config.samples;
    let mut this_run: u64 = 0;

    loop {
        if !progress.burn_done {
            if progress.sweeps_done >= progress.burn_target {
                let next = match config.burn_in {
                    BurnIn::Sweeps(_) => progress.sweeps_done,
                    BurnIn::Auto { min, max } => {
                        let tail = &progress.trace[progress.trace.len() / 2..];
                        let tau = integrated_autocorr_time(tail);
                        ((10.0 * tau).ceil() as u64).clamp(min, max)
                    }
                };
                if next <= progress.sweeps_done {
                    progress.burn_done = true;
                    progress.burn_sweeps = progress.sweeps_done;
                    progress.sweeps_done = 0;
                    continue;
                }
                progress.burn_target = next;
            }
        } else if progress.sweeps_done >= total_recorded * config.thin {
            break;
        }

        sweep_with(&mut progress.state, &config.schedule, &mut rng, &mut scratch, &mut progress.stats)
            .map_err(|e| abort(e, &progress))?;
        progress.sweeps_done += 1;
        this_run += 1;
        if progress.sweeps_done % check_every == 0 {
            if let Err(v) = progress.state.check_ordering() {
                return Err(abort(Error::Invariant(v), &progress));
            }
        }
        if !progress.burn_done {
            if matches!(config.burn_in, BurnIn::Auto { .. }) {
                progress.trace.push(progress.state.get(0, monitor));
            }
        } else if progress.sweeps_done % config.thin == 0 {
            for (k, o) in observables.iter().enumerate() {
                progress.values[k].push(o.evaluate(&progress.state));
            }
        }
        if let Some(cp) = &config.checkpoint {
            if progress.sweeps_done % cp.every == 0 {
                progress.rng_counter = rng.counter();
                save_progress(&cp.path, config, &progress)?;
            }
            if cp.halt_after == Some(this_run) {
                progress.rng_counter = rng.counter();
                save_progress(&cp.path, config, &progress)?;
                return Err(Error::Halted {
                    sweeps: this_run,
                    path: cp.path.clone(),
                });
            }
        }
    }
    progress.state.check_ordering().map_err(|v| abort(Error::Invariant(v), &progress))?;
    if let Some(cp) = &config.checkpoint {
        progress.rng_counter = rng.counter();
        save_progress(&cp.path, config, &progress)?;
    }
    Ok(SampleSet {
        observables: observables.to_vec(),
        names: observables.iter().map(|o| o.name(&config.grid)).collect(),
        values: progress.values,
        seed: config.seed,
        chain_id: config.chain_id,
        stream_id: sid,
        burn_in_sweeps: progress.burn_sweeps,
        thin: config.thin,
        stats: progress.stats,
        final_state: progress.state,
    })
}

fn abort(e: Error, p: &Progress) -> Error {
    match e {
        Error::Invariant(violation) => Error::ChainAborted {
            sweep: p.burn_sweeps + p.sweeps_done,
            violation,
            state: Box::new(p.state.clone()),
        },
        other => other,
    }
}

fn save_progress(path: &Path, config: &ChainConfig, p: &Progress) -> Result<()> {
    let mut e = Encoder::default();
    e.buf.extend_from_slice(CHAIN_MAGIC);
    e.u32(CHAIN_VERSION);
    e.bytes(&config.fingerprint());
    e.u128(p.rng_counter);
    e.u64(p.sweeps_done);
    e.u8(p.burn_done as u8);
    e.u64(p.burn_target);
    e.u64(p.burn_sweeps);
    e.f64s(&p.trace);
    e.u64(p.values.len() as u64);
    for v in &p.values {
        e.f64s(v);
    }
    e.u64(p.stats.block_proposed);
    e.u64(p.stats.block_accepted);
    e.u64(p.stats.endpoint_proposed);
    e.u64(p.stats.endpoint_accepted);
    encode_state_into(&mut e, &p.state);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &e.buf)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn load_progress(path: &Path, config: &ChainConfig) -> Result<Progress> {
    let fail = |reason: String| Error::Checkpoint {
        path: path.to_path_buf(),
        reason,
    };
    let bytes = fs::read(path)?;
    if bytes.len() < 8 || &bytes[..4] != CHAIN_MAGIC {
        return Err(fail("not a chain checkpoint".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CHAIN_VERSION {
        return Err(fail(format!("unsupported version {version}")));
    }
    let decode = || -> Result<Progress> {
        let mut d = Decoder::new(&bytes[8..]);
        if d.bytes()? != config.fingerprint().as_slice() {
            return Err(Error::Domain("written by a different configuration".into()));
        }
        let rng_counter = d.u128()?;
        let sweeps_done = d.u64()?;
        let burn_done = d.u8()? != 0;
        let burn_target = d.u64()?;
        let burn_sweeps = d.u64()?;
        let trace = d.f64s()?;
        let k = d.u64()? as usize;
        let values = (0..k).map(|_| d.f64s()).collect::<Result<Vec<_>>>()?;
        let stats = MoveStats {
            block_proposed: d.u64()?,
            block_accepted: d.u64()?,
            endpoint_proposed: d.u64()?,
            endpoint_accepted: d.u64()?,
        };
        let state = decode_state_from(&mut d)?;
        Ok(Progress {
            state,
            rng_counter,
            sweeps_done,
            burn_done,
            burn_target,
            burn_sweeps,
            trace,
            values,
            stats,
        })
    };
    decode().map_err(|e| fail(e.to_string()))
}

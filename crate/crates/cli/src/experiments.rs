//! One function per experiment kind. Each returns a table for `results.csv`
//! and a summary object for `summary.json`; a few also write extra files.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use serde_json::{json, Value};
use tilted_le::coupling::{estimate_pinned_exceedance, reverse_coupling_trials, ReverseCouplingParams};
use tilted_le::estimators::{
    confinement_profile, covariance_lag, fit_upper_tail_points, free_vs_zero_convergence,
    local_cdf_slope, lower_tail_curve, lower_tail_slope, pooled, pooled_mean, scaling_check, span_ratio,
    two_proportion_z, SamplingPlan,
};
use tilted_le::fs::airy::{AI_0, AI_PRIME_0};
use tilted_le::fs::{
    airy_ai, airy_ai_prime, airy_first_zero, fs_cdf, fs_density, fs_mean, fs_normalization, fs_stationary_draws,
    write_cdf_table,
};
use tilted_le::gibbs::{run_chains, BurnIn, ChainConfig, CheckpointPolicy, Observable, SampleSet, SweepSchedule};
use tilted_le::model::io::save_csv;
use tilted_le::{BoundarySpec, Error, GridInterval, Result, TiltParams};

use crate::config::{Boundary, ExperimentConfig, Kind, Model};

/// Burn-in used by estimators that need a fixed sweep count when the
/// configuration asks for `auto`.
const FIXED_BURN_FALLBACK: u64 = 10_000;
const DEFAULT_SLOPE_RATIO: f64 = 1.05;

pub struct Outcome {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, Value>,
    /// Stream ids of the chains run directly by the harness.
    pub streams: Vec<u64>,
}

impl Outcome {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: BTreeMap::new(),
            streams: Vec::new(),
        }
    }

    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.summary.insert(key.to_string(), v.into());
    }
}

pub fn f(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(f).unwrap_or_default()
}

fn tilt(cfg: &ExperimentConfig) -> Result<TiltParams> {
    TiltParams::new(cfg.a, cfg.lambda)
}

fn boundary(cfg: &ExperimentConfig) -> BoundarySpec {
    match cfg.boundary {
        Boundary::Zero => BoundarySpec::Zero,
        Boundary::Free => BoundarySpec::Free,
    }
}

fn plan(cfg: &ExperimentConfig) -> SamplingPlan {
    SamplingPlan {
        dt: cfg.dt,
        chains: cfg.chains,
        samples: cfg.samples,
        thin: cfg.thin,
        burn_in: cfg.burn_in.unwrap_or(FIXED_BURN_FALLBACK),
        seed: cfg.seed,
    }
}

fn main_grid(cfg: &ExperimentConfig) -> Result<GridInterval> {
    GridInterval::with_spacing(-cfg.half_width, cfg.half_width, cfg.dt)
}

fn chain_configs(cfg: &ExperimentConfig, grid: GridInterval, resume: bool) -> Result<Vec<ChainConfig>> {
    let t = tilt(cfg)?;
    let burn = match cfg.burn_in {
        Some(s) => BurnIn::Sweeps(s),
        None => BurnIn::default(),
    };
    let dir = cfg.output.join("checkpoints");
    std::fs::create_dir_all(&dir)?;
    Ok((0..cfg.chains)
        .map(|c| {
            let mut cc = ChainConfig::new(cfg.n, grid, t, boundary(cfg))
                .with_seed(cfg.seed, c)
                .with_sampling(burn, cfg.samples, cfg.thin);
            cc.schedule = SweepSchedule {
                blocks_per_sweep: cfg.blocks_per_sweep,
                proposal_sd: cfg.proposal_sd,
                ..SweepSchedule::default()
            };
            cc.checkpoint = Some(CheckpointPolicy {
                path: dir.join(format!("{}-chain{c}.ckpt", cfg.experiment.name())),
                every: cfg.checkpoint_every,
                resume,
                halt_after: None,
            });
            cc
        })
        .collect())
}

fn chains(cfg: &ExperimentConfig, grid: GridInterval, obs: &[Observable], resume: bool, out: &mut Outcome) -> Result<Vec<SampleSet>> {
    let configs = chain_configs(cfg, grid, resume)?;
    out.streams = configs.iter().map(ChainConfig::stream_id).collect();
    run_chains(&configs, obs)
}

pub fn run(cfg: &ExperimentConfig, resume: bool) -> Result<Outcome> {
    match cfg.experiment {
        Kind::Sample => sample(cfg, resume),
        Kind::UpperTail => upper_tail(cfg, resume),
        Kind::LowerTail => lower_tail(cfg, resume),
        Kind::Confinement => confinement(cfg, resume),
        Kind::Covariance => covariance(cfg, resume),
        Kind::Scaling => scaling(cfg),
        Kind::Couple => couple(cfg),
        Kind::FsReference => fs_reference(cfg),
        Kind::FreeVsZero => free_vs_zero(cfg),
        Kind::PinnedExceedance => pinned_exceedance(cfg),
    }
}

fn sample(cfg: &ExperimentConfig, resume: bool) -> Result<Outcome> {
    let grid = main_grid(cfg)?;
    let obs: Vec<Observable> = (0..cfg.n).map(|i| Observable::height_at(&grid, i, 0.0)).collect();
    let mut header = vec!["chain".to_string(), "sample".to_string()];
    header.extend((1..=cfg.n).map(|i| format!("x{i}")));
    let mut out = Outcome::new(&[]);
    out.header = header;
    let sets = chains(cfg, grid, &obs, resume, &mut out)?;
    for (c, s) in sets.iter().enumerate() {
        for t in 0..s.len() {
            let mut row = vec![c.to_string(), t.to_string()];
            row.extend((0..cfg.n).map(|i| f(s.values[i][t])));
            out.rows.push(row);
        }
    }
    if let Some(s) = sets.first() {
        save_csv(&s.final_state, &cfg.output.join("final_state.csv"))?;
    }
    let m = pooled_mean(&sets, 0)?;
    let (bp, ba, ep, ea) = sets.iter().fold((0, 0, 0, 0), |a, s| {
        (
            a.0 + s.stats.block_proposed,
            a.1 + s.stats.block_accepted,
            a.2 + s.stats.endpoint_proposed,
            a.3 + s.stats.endpoint_accepted,
        )
    });
    let rate = |acc: u64, prop: u64| if prop == 0 { Value::Null } else { json!(acc as f64 / prop as f64) };
    out.put("mean_x1", m.mean);
    out.put("mean_x1_se", m.se);
    out.put("block_acceptance", rate(ba, bp));
    out.put("endpoint_acceptance", rate(ea, ep));
    Ok(out)
}

fn upper_tail(cfg: &ExperimentConfig, resume: bool) -> Result<Outcome> {
    let mut out = Outcome::new(&["t", "p_hat", "exceedances"]);
    let samples = match cfg.model {
        Model::Fs => fs_stationary_draws(cfg.trials, cfg.seed),
        Model::Ensemble => {
            let grid = main_grid(cfg)?;
            let sets = chains(cfg, grid, &[Observable::height_at(&grid, 0, 0.0)], resume, &mut out)?;
            pooled(&sets, 0)
        }
    };
    let fit = fit_upper_tail_points(&samples, (cfg.fit_min, cfg.fit_max), 11)?;
    for &(t, p, k) in &fit.points {
        out.rows.push(vec![f(t), f(p), k.to_string()]);
    }
    out.put("c_hat", fit.c_hat);
    out.put("c_se", fit.se);
    out.put("r_squared", fit.r_squared);
    out.put("samples", samples.len() as u64);
    Ok(out)
}

fn lower_tail(cfg: &ExperimentConfig, resume: bool) -> Result<Outcome> {
    let ratio = if cfg.slope_ratio > 1.0 { cfg.slope_ratio } else { DEFAULT_SLOPE_RATIO };
    let mut slopes = Vec::new();
    let mut out;
    match cfg.model {
        Model::Fs => {
            out = Outcome::new(&["eps", "p", "p_over_eps3", "slope"]);
            for &e in &cfg.eps {
                let p = fs_cdf(e);
                let s = local_cdf_slope(fs_cdf, e, ratio);
                out.rows.push(vec![f(e), f(p), f(p / e.powi(3)), f(s)]);
                slopes.push(json!({"eps": e, "slope": s, "se": 0.0}));
            }
            let ratios: Vec<f64> = cfg.eps.iter().map(|&e| fs_cdf(e) / e.powi(3)).collect();
            out.put("ratio_span", span_ratio(&ratios));
        }
        Model::Ensemble => {
            out = Outcome::new(&[
                "eps",
                "successes",
                "trials",
                "p_hat",
                "lower",
                "upper",
                "fs_probability",
                "p_over_eps3",
                "slope",
                "slope_se",
            ]);
            let grid = main_grid(cfg)?;
            let sets = chains(cfg, grid, &[Observable::height_at(&grid, 0, 0.0)], resume, &mut out)?;
            let curve = lower_tail_curve(&pooled(&sets, 0), &cfg.eps)?;
            for p in curve {
                let slope = if cfg.slope_ratio > 1.0 {
                    let s = lower_tail_slope(cfg.n, cfg.half_width, tilt(cfg)?, p.eps, ratio, &plan(cfg))?;
                    slopes.push(json!({"eps": p.eps, "slope": s.slope, "se": s.slope_se}));
                    Some(s)
                } else {
                    None
                };
                let q = p.proportion;
                out.rows.push(vec![
                    f(p.eps),
                    q.successes.to_string(),
                    q.trials.to_string(),
                    f(q.estimate),
                    f(q.lower),
                    f(q.upper),
                    f(p.fs_probability),
                    f(q.estimate / p.eps_cubed),
                    opt(slope.map(|s| s.slope)),
                    opt(slope.map(|s| s.slope_se)),
                ]);
            }
        }
    }
    out.put("slope_ratio", ratio);
    out.put("slopes", slopes);
    Ok(out)
}

fn confinement(cfg: &ExperimentConfig, resume: bool) -> Result<Outcome> {
    let grid = main_grid(cfg)?;
    let mut obs = Vec::new();
    for k in 0..cfg.n {
        obs.push(Observable::height_at(&grid, k, 0.0));
        obs.push(Observable::window_max(&grid, k, -cfg.window, cfg.window));
    }
    let mut out = Outcome::new(&["k", "mean", "se", "max_mean", "max_se", "rescaled", "rescaled_max"]);
    let sets = chains(cfg, grid, &obs, resume, &mut out)?;
    let heights: Vec<Vec<f64>> = (0..cfg.n).map(|k| pooled(&sets, 2 * k)).collect();
    let maxima: Vec<Vec<f64>> = (0..cfg.n).map(|k| pooled(&sets, 2 * k + 1)).collect();
    let rows = confinement_profile(&heights, &maxima, cfg.lambda)?;
    for r in &rows {
        out.rows.push(vec![
            r.k.to_string(),
            f(r.mean),
            f(r.se),
            f(r.max_mean),
            f(r.max_se),
            f(r.rescaled),
            f(r.rescaled_max),
        ]);
    }
    let first = rows.len().min(4);
    out.put("span", span_ratio(&rows[..first].iter().map(|r| r.rescaled).collect::<Vec<_>>()));
    out.put("span_max", span_ratio(&rows[..first].iter().map(|r| r.rescaled_max).collect::<Vec<_>>()));
    out.put("lines_in_span", first as u64);
    Ok(out)
}

fn covariance(cfg: &ExperimentConfig, resume: bool) -> Result<Outcome> {
    let grid = main_grid(cfg)?;
    let base = grid.nearest_index(0.0);
    let max_lag = cfg.lags.iter().copied().max().unwrap_or(0);
    if base + max_lag > grid.steps() {
        return Err(Error::InvalidParameter(format!("lag {max_lag} runs past the right end of the grid")));
    }
    let obs: Vec<Observable> = (0..=max_lag).map(|l| Observable::Height { line: 0, index: base + l }).collect();
    let mut out = Outcome::new(&["lag", "t", "cov", "se"]);
    let sets = chains(cfg, grid, &obs, resume, &mut out)?;
    let configs: Vec<Vec<f64>> = sets
        .iter()
        .flat_map(|s| (0..s.len()).map(move |t| (0..=max_lag).map(|l| s.values[l][t]).collect::<Vec<f64>>()))
        .collect();
    let mut lags = cfg.lags.clone();
    lags.sort_unstable();
    let pts = covariance_lag(&configs, 0, &lags, cfg.dt)?;
    for p in &pts {
        out.rows.push(vec![p.lag.to_string(), f(p.t), f(p.cov), f(p.se)]);
    }
    out.put("cov", pts.iter().map(|p| p.cov).collect::<Vec<_>>());
    out.put("cov_se", pts.iter().map(|p| p.se).collect::<Vec<_>>());
    Ok(out)
}

fn scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let r = scaling_check(cfg.n, cfg.half_width, cfg.a, cfg.lambda, &plan(cfg))?;
    let mut out = Outcome::new(&["exponent", "statistic", "p_value", "n1", "n2"]);
    let right = r.ks(1.0 / 3.0)?;
    let control = r.ks(cfg.control_exponent)?;
    for (e, k) in [(1.0 / 3.0, right), (cfg.control_exponent, control)] {
        out.rows.push(vec![f(e), f(k.statistic), f(k.p_value), k.n1.to_string(), k.n2.to_string()]);
    }
    out.put("p_value", right.p_value);
    out.put("control_p_value", control.p_value);
    out.put("control_exponent", cfg.control_exponent);
    Ok(out)
}

fn couple(cfg: &ExperimentConfig) -> Result<Outcome> {
    let widths = if cfg.half_widths.is_empty() { vec![cfg.half_width] } else { cfg.half_widths.clone() };
    let mut out = Outcome::new(&["half_width", "trial", "found", "event_a", "event_b", "tau_ell", "tau_r", "success"]);
    let mut per = Vec::new();
    for &t in &widths {
        let p = ReverseCouplingParams {
            n: cfg.n,
            half_width: t,
            u: cfg.u,
            dt: cfg.dt,
            tilt: tilt(cfg)?,
            burn_in: cfg.burn_in.unwrap_or(FIXED_BURN_FALLBACK),
            resample_sweeps: cfg.resample_sweeps,
        };
        let trials = reverse_coupling_trials(&p, cfg.seed, cfg.trials)?;
        let wins = trials.iter().filter(|o| o.success).count() as u64;
        for o in &trials {
            out.rows.push(vec![
                f(t),
                o.trial.to_string(),
                o.found.to_string(),
                o.event_a.to_string(),
                o.event_b.to_string(),
                opt(o.tau_ell),
                opt(o.tau_r),
                o.success.to_string(),
            ]);
        }
        per.push((t, wins));
    }
    let n = cfg.trials;
    out.put(
        "success",
        per.iter().map(|&(t, w)| json!({"half_width": t, "successes": w, "trials": n})).collect::<Vec<_>>(),
    );
    if per.len() >= 2 {
        let (lo, hi) = (per[0].1, per[per.len() - 1].1);
        out.put("z_last_vs_first", two_proportion_z(hi, n, lo, n));
    }
    Ok(out)
}

fn fs_reference(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&["x", "ai", "ai_prime", "fs_density", "fs_cdf"]);
    let k = (cfg.points - 1) as f64;
    for j in 0..cfg.points {
        let x = (cfg.x_min * (k - j as f64) + cfg.x_max * j as f64) / k;
        out.rows.push(vec![f(x), f(airy_ai(x)), f(airy_ai_prime(x)), f(fs_density(x)), f(fs_cdf(x))]);
    }
    write_cdf_table(File::create(cfg.output.join("fs_density.csv"))?, cfg.x_max.max(6.0), cfg.points)?;
    out.put("ai0", airy_ai(0.0));
    out.put("ai_prime0", airy_ai_prime(0.0));
    out.put("ai0_constant", AI_0);
    out.put("ai_prime0_constant", AI_PRIME_0);
    out.put("omega1", airy_first_zero());
    out.put("z", fs_normalization());
    out.put("mean", fs_mean());
    Ok(out)
}

fn free_vs_zero(cfg: &ExperimentConfig) -> Result<Outcome> {
    let rows = free_vs_zero_convergence(cfg.n, &cfg.half_widths, tilt(cfg)?, &plan(cfg))?;
    let mut out = Outcome::new(&[
        "half_width",
        "free_mean",
        "free_se",
        "zero_mean",
        "zero_se",
        "gap",
        "gap_se",
        "gap_line2",
        "gap_line2_se",
        "ks_statistic",
        "ks_p",
    ]);
    for r in &rows {
        out.rows.push(vec![
            f(r.half_width),
            f(r.free.mean),
            f(r.free.se),
            f(r.zero.mean),
            f(r.zero.se),
            f(r.gap),
            f(r.gap_se),
            opt(r.gap_line2.map(|g| g.0)),
            opt(r.gap_line2.map(|g| g.1)),
            f(r.ks.statistic),
            f(r.ks.p_value),
        ]);
    }
    out.put("gap", rows.iter().map(|r| r.gap).collect::<Vec<_>>());
    out.put("gap_se", rows.iter().map(|r| r.gap_se).collect::<Vec<_>>());
    out.put("half_widths", rows.iter().map(|r| r.half_width).collect::<Vec<_>>());
    Ok(out)
}

fn pinned_exceedance(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::new(&["k", "v", "successes", "trials", "p_hat", "lower", "upper", "k_v2", "neg_log_p"]);
    let t = tilt(cfg)?;
    let mut c: f64 = 0.0;
    for &k in &cfg.ks {
        for &v in &cfg.vs {
            let e = estimate_pinned_exceedance(
                k,
                v,
                cfg.trials,
                cfg.dt,
                t,
                cfg.chains,
                cfg.burn_in.unwrap_or(FIXED_BURN_FALLBACK),
                cfg.thin,
                cfg.seed,
            )?;
            let p = e.proportion;
            let x = k as f64 * v * v;
            let nl = if p.successes > 0 { Some(-p.estimate.ln()) } else { None };
            if let Some(nl) = nl {
                c = c.max(nl / x);
            }
            out.rows.push(vec![
                k.to_string(),
                f(v),
                p.successes.to_string(),
                p.trials.to_string(),
                f(p.estimate),
                f(p.lower),
                f(p.upper),
                f(x),
                opt(nl),
            ]);
        }
    }
    out.put("c_bound", c);
    Ok(out)
}

pub fn write_results(path: &Path, out: &Outcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&out.header)?;
    for r in &out.rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, list values are comma
//! separated. Every key has a default, so a file may be as short as
//! `experiment = fs-reference`. Unknown keys and malformed values are
//! rejected with the offending line and field.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use tilted_le::TiltParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Sample,
    UpperTail,
    LowerTail,
    Confinement,
    Covariance,
    Scaling,
    Couple,
    FsReference,
    FreeVsZero,
    PinnedExceedance,
}

const KINDS: [(Kind, &str); 10] = [
    (Kind::Sample, "sample"),
    (Kind::UpperTail, "upper-tail"),
    (Kind::LowerTail, "lower-tail"),
    (Kind::Confinement, "confinement"),
    (Kind::Covariance, "covariance"),
    (Kind::Scaling, "scaling"),
    (Kind::Couple, "couple"),
    (Kind::FsReference, "fs-reference"),
    (Kind::FreeVsZero, "free-vs-zero"),
    (Kind::PinnedExceedance, "pinned-exceedance"),
];

impl Kind {
    pub fn name(self) -> &'static str {
        KINDS.iter().find(|(k, _)| *k == self).unwrap().1
    }
}

impl FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        KINDS
            .iter()
            .find(|(_, n)| *n == s)
            .map(|(k, _)| *k)
            .ok_or_else(|| {
                let names: Vec<&str> = KINDS.iter().map(|(_, n)| *n).collect();
                format!("unknown experiment `{s}`, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Zero,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Ensemble,
    Fs,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Kind,
    pub seed: u64,
    pub output: PathBuf,

    pub n: usize,
    pub half_width: f64,
    pub dt: f64,
    pub a: f64,
    pub lambda: f64,
    pub boundary: Boundary,

    pub chains: u64,
    pub samples: u64,
    pub thin: u64,
    /// `None` selects the autocorrelation-based burn-in.
    pub burn_in: Option<u64>,
    pub blocks_per_sweep: usize,
    pub proposal_sd: f64,
    pub checkpoint_every: u64,

    pub model: Model,
    pub fit_min: f64,
    pub fit_max: f64,
    pub tolerance: f64,
    pub eps: Vec<f64>,
    pub slope_ratio: f64,
    pub lags: Vec<usize>,
    pub window: f64,
    pub half_widths: Vec<f64>,
    pub control_exponent: f64,
    pub trials: u64,
    pub u: f64,
    pub resample_sweeps: u64,
    pub ks: Vec<usize>,
    pub vs: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Kind::Sample,
            seed: 1,
            output: PathBuf::from("out"),
            n: 2,
            half_width: 5.0,
            dt: 0.05,
            a: 1.0,
            lambda: 2.0,
            boundary: Boundary::Zero,
            chains: 2,
            samples: 2000,
            thin: 10,
            burn_in: Some(1000),
            blocks_per_sweep: 4,
            proposal_sd: 0.2,
            checkpoint_every: 10_000,
            model: Model::Ensemble,
            fit_min: 1.5,
            fit_max: 2.5,
            tolerance: 0.15,
            eps: vec![0.1, 0.2, 0.4],
            slope_ratio: 0.0,
            lags: vec![1, 2, 4, 8, 16],
            window: 1.0,
            half_widths: vec![2.5, 5.0, 10.0],
            control_exponent: 0.0,
            trials: 200,
            u: 1.5,
            resample_sweeps: 500,
            ks: vec![1, 2, 3],
            vs: vec![1.0, 2.0],
            x_min: -5.0,
            x_max: 5.0,
            points: 101,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.line {
            write!(f, "line {l}: ")?;
        }
        if let Some(k) = &self.field {
            write!(f, "field `{k}`: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

fn num<T: FromStr>(v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn list<T: FromStr>(v: &str) -> Result<Vec<T>, String> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|s| num(s.trim())).collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), String> {
        match key {
            "experiment" => self.experiment = v.parse()?,
            "seed" => self.seed = num(v)?,
            "output" => self.output = PathBuf::from(v),
            "n" => self.n = num(v)?,
            "half_width" => self.half_width = num(v)?,
            "dt" => self.dt = num(v)?,
            "a" => self.a = num(v)?,
            "lambda" => self.lambda = num(v)?,
            "boundary" => {
                self.boundary = match v {
                    "zero" => Boundary::Zero,
                    "free" => Boundary::Free,
                    _ => return Err(format!("expected `zero` or `free`, got `{v}`")),
                }
            }
            "chains" => self.chains = num(v)?,
            "samples" => self.samples = num(v)?,
            "thin" => self.thin = num(v)?,
            "burn_in" => self.burn_in = if v == "auto" { None } else { Some(num(v)?) },
            "blocks_per_sweep" => self.blocks_per_sweep = num(v)?,
            "proposal_sd" => self.proposal_sd = num(v)?,
            "checkpoint_every" => self.checkpoint_every = num(v)?,
            "model" => {
                self.model = match v {
                    "ensemble" => Model::Ensemble,
                    "fs" => Model::Fs,
                    _ => return Err(format!("expected `ensemble` or `fs`, got `{v}`")),
                }
            }
            "fit_min" => self.fit_min = num(v)?,
            "fit_max" => self.fit_max = num(v)?,
            "tolerance" => self.tolerance = num(v)?,
            "eps" => self.eps = list(v)?,
            "slope_ratio" => self.slope_ratio = num(v)?,
            "lags" => self.lags = list(v)?,
            "window" => self.window = num(v)?,
            "half_widths" => self.half_widths = list(v)?,
            "control_exponent" => self.control_exponent = num(v)?,
            "trials" => self.trials = num(v)?,
            "u" => self.u = num(v)?,
            "resample_sweeps" => self.resample_sweeps = num(v)?,
            "ks" => self.ks = list(v)?,
            "vs" => self.vs = list(v)?,
            "x_min" => self.x_min = num(v)?,
            "x_max" => self.x_max = num(v)?,
            "points" => self.points = num(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Every key with its canonical value text, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let boundary = match self.boundary {
            Boundary::Zero => "zero",
            Boundary::Free => "free",
        };
        let model = match self.model {
            Model::Ensemble => "ensemble",
            Model::Fs => "fs",
        };
        vec![
            ("experiment", self.experiment.name().to_string()),
            ("seed", self.seed.to_string()),
            ("output", self.output.display().to_string()),
            ("n", self.n.to_string()),
            ("half_width", self.half_width.to_string()),
            ("dt", self.dt.to_string()),
            ("a", self.a.to_string()),
            ("lambda", self.lambda.to_string()),
            ("boundary", boundary.to_string()),
            ("chains", self.chains.to_string()),
            ("samples", self.samples.to_string()),
            ("thin", self.thin.to_string()),
            ("burn_in", self.burn_in.map_or("auto".to_string(), |b| b.to_string())),
            ("blocks_per_sweep", self.blocks_per_sweep.to_string()),
            ("proposal_sd", self.proposal_sd.to_string()),
            ("checkpoint_every", self.checkpoint_every.to_string()),
            ("model", model.to_string()),
            ("fit_min", self.fit_min.to_string()),
            ("fit_max", self.fit_max.to_string()),
            ("tolerance", self.tolerance.to_string()),
            ("eps", join(&self.eps)),
            ("slope_ratio", self.slope_ratio.to_string()),
            ("lags", join(&self.lags)),
            ("window", self.window.to_string()),
            ("half_widths", join(&self.half_widths)),
            ("control_exponent", self.control_exponent.to_string()),
            ("trials", self.trials.to_string()),
            ("u", self.u.to_string()),
            ("resample_sweeps", self.resample_sweeps.to_string()),
            ("ks", join(&self.ks)),
            ("vs", join(&self.vs)),
            ("x_min", self.x_min.to_string()),
            ("x_max", self.x_max.to_string()),
            ("points", self.points.to_string()),
        ]
    }

    /// Checks ranges that do not depend on the file position of the key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |field: &str, message: String| ConfigError {
            line: None,
            field: Some(field.to_string()),
            message,
        };
        if let Err(e) = TiltParams::new(self.a, self.lambda) {
            let field = if self.lambda > 1.0 { "a" } else { "lambda" };
            return Err(bad(field, e.to_string()));
        }
        let positive = [
            ("half_width", self.half_width),
            ("dt", self.dt),
            ("proposal_sd", self.proposal_sd),
            ("window", self.window),
            ("u", self.u),
            ("tolerance", self.tolerance),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(k, format!("must be positive, got {v}")));
            }
        }
        for (k, v) in [("n", self.n as u64), ("chains", self.chains), ("thin", self.thin), ("trials", self.trials)] {
            if v == 0 {
                return Err(bad(k, "must be positive".into()));
            }
        }
        if self.checkpoint_every == 0 {
            return Err(bad("checkpoint_every", "must be positive".into()));
        }
        if !(self.fit_min < self.fit_max) {
            return Err(bad("fit_max", "must exceed fit_min".into()));
        }
        if !(self.x_min < self.x_max) || self.points < 2 {
            return Err(bad("x_max", "need x_min < x_max and at least two points".into()));
        }
        if self.slope_ratio != 0.0 && !(self.slope_ratio > 1.0) {
            return Err(bad("slope_ratio", "must be 0 (off) or exceed 1".into()));
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) {
            return Err(bad("eps", "values must be positive".into()));
        }
        if self.half_widths.iter().any(|&t| !(t > 0.0)) {
            return Err(bad("half_widths", "values must be positive".into()));
        }
        if self.ks.contains(&0) {
            return Err(bad("ks", "line counts must be positive".into()));
        }
        Ok(())
    }
}

/// Parses and validates a configuration file.
pub fn parse(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError {
                line: Some(line),
                field: None,
                message: format!("expected `key = value`, got `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let err = |message: String| ConfigError {
            line: Some(line),
            field: Some(key.to_string()),
            message,
        };
        if seen.contains(&key) {
            return Err(err("duplicate key".into()));
        }
        cfg.set(key, value).map_err(err)?;
        seen.push(key);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical text that [`parse`] maps back to the same configuration.
pub fn render(cfg: &ExperimentConfig) -> String {
    cfg.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

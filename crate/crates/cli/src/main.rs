//! `tle`: runs tilted line ensemble experiments from a config file and
//! reports them against their targets.
//!
//! Exit codes: 0 success, 1 other errors (I/O, missing artifacts),
//! 2 configuration error, 3 invariant violation, 4 failed checks in `report`.

mod config;
mod experiments;
mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use tilted_le::model::io::save_state;
use tilted_le::Error;

#[derive(Parser)]
#[command(name = "tle", version, about = "Tilted line ensemble experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Continue chains from their checkpoints.
        #[arg(long)]
        resume: bool,
        /// Overrides `output` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Summarize a finished run against its targets.
    Report {
        dir: PathBuf,
    },
    /// Print the canonical form of a config file with all defaults filled in.
    Config {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
const EXIT_REPORT_FAIL: u8 = 4;

fn load_config(path: &Path) -> Result<config::ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    config::parse(&text).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn build_id() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

fn write_json(path: &Path, v: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(v).expect("json values serialize");
    text.push('\n');
    std::fs::write(path, text)
}

fn fail(e: Error, out: &Path) -> ExitCode {
    match e {
        Error::ChainAborted { sweep, violation, state } => {
            let dump = out.join("aborted_state.bin");
            match save_state(&state, &dump) {
                Ok(()) => eprintln!("error: invariant violated at sweep {sweep}: {violation}; state dumped to {}", dump.display()),
                Err(w) => eprintln!("error: invariant violated at sweep {sweep}: {violation}; state dump failed: {w}"),
            }
            ExitCode::from(EXIT_INVARIANT)
        }
        Error::Invariant(v) => {
            eprintln!("error: invariant violated: {v}");
            ExitCode::from(EXIT_INVARIANT)
        }
        Error::InvalidParameter(_) | Error::Domain(_) | Error::Unsupported(_) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
        other => {
            eprintln!("error: {other}");
            ExitCode::from(EXIT_OTHER)
        }
    }
}

fn run(config: &Path, seed: Option<u64>, threads: Option<usize>, resume: bool, output: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load_config(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = output {
        cfg.output = o;
    }
    if let Some(t) = threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(EXIT_OTHER);
        }
    }
    let out = cfg.output.clone();
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: {}: {e}", out.display());
        return ExitCode::from(EXIT_OTHER);
    }
    let outcome = match experiments::run(&cfg, resume) {
        Ok(o) => o,
        Err(e) => return fail(e, &out),
    };
    let entries: BTreeMap<&str, String> = cfg.entries().into_iter().collect();
    let params = json!({
        "build": build_id(),
        "config": entries,
        "seed": cfg.seed,
        "chain_streams": outcome.streams,
    });
    let written = experiments::write_results(&out.join("results.csv"), &outcome)
        .map_err(|e| e.to_string())
        .and_then(|()| write_json(&out.join("params.json"), &params).map_err(|e| e.to_string()))
        .and_then(|()| write_json(&out.join("summary.json"), &json!(outcome.summary)).map_err(|e| e.to_string()))
        .and_then(|()| std::fs::write(out.join("config.txt"), config::render(&cfg)).map_err(|e| e.to_string()));
    if let Err(e) = written {
        eprintln!("error: writing artifacts: {e}");
        return ExitCode::from(EXIT_OTHER);
    }
    println!("{}: {} rows written to {}", cfg.experiment.name(), outcome.rows.len(), out.display());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            threads,
            resume,
            output,
        } => run(&config, seed, threads, resume, output),
        Command::Report { dir } => match report::report(&dir) {
            Ok(r) => {
                for l in &r.lines {
                    println!("{l}");
                }
                if r.passed {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_REPORT_FAIL)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_OTHER)
            }
        },
        Command::Config { config } => match load_config(&config) {
            Ok(c) => {
                print!("{}", config::render(&c));
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
    }
}

//! Reads an output directory and prints measured quantities next to their
//! theoretical targets with a verdict per check.

use std::path::Path;

use serde_json::Value;
use tilted_le::estimators::FS_TAIL_CONSTANT;

pub const ARTIFACTS: [&str; 3] = ["results.csv", "params.json", "summary.json"];

const AI_0_TABLE: f64 = 0.3550280539;
const OMEGA_1_TABLE: f64 = 2.3381074105;
const KS_THRESHOLD: f64 = 0.01;
const CONTROL_THRESHOLD: f64 = 1e-3;
const Z_95: f64 = 1.6448536269514722;

pub struct Report {
    pub lines: Vec<String>,
    /// `false` when any check failed.
    pub passed: bool,
}

impl Report {
    fn info(&mut self, s: String) {
        self.lines.push(s);
    }

    fn check(&mut self, s: String, ok: bool) {
        self.lines.push(format!("{s} → {}", if ok { "PASS" } else { "FAIL" }));
        self.passed &= ok;
    }
}

fn num(v: &Value, key: &str) -> f64 {
    v.get(key).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn nums(v: &Value, key: &str) -> Vec<f64> {
    v.get(key)
        .and_then(Value::as_array)
        .map(|a| a.iter().map(|x| x.as_f64().unwrap_or(f64::NAN)).collect())
        .unwrap_or_default()
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn report(dir: &Path) -> Result<Report, String> {
    let missing: Vec<&str> = ARTIFACTS.iter().copied().filter(|f| !dir.join(f).is_file()).collect();
    if !missing.is_empty() {
        return Err(format!(
            "{} is missing {}; a completed run writes {}",
            dir.display(),
            missing.join(", "),
            ARTIFACTS.join(", ")
        ));
    }
    let params = read_json(&dir.join("params.json"))?;
    let s = read_json(&dir.join("summary.json"))?;
    let cfg = &params["config"];
    let kind = cfg["experiment"].as_str().ok_or("params.json has no experiment kind")?;
    let cfg_num = |k: &str| cfg[k].as_str().and_then(|v| v.parse::<f64>().ok()).unwrap_or(f64::NAN);
    let mut r = Report {
        lines: vec![format!("experiment {kind}, seed {}", params["seed"])],
        passed: true,
    };
    match kind {
        "upper-tail" => {
            let (c, se) = (num(&s, "c_hat"), num(&s, "c_se"));
            let tol = cfg_num("tolerance");
            let rel = (c - FS_TAIL_CONSTANT).abs() / FS_TAIL_CONSTANT;
            r.check(
                format!("c_hat = {c:.4} ± {se:.4} target {FS_TAIL_CONSTANT:.4} tol {:.0}%", 100.0 * tol),
                rel <= tol,
            );
            r.info(format!("R² = {:.4} over {} samples", num(&s, "r_squared"), s["samples"]));
        }
        "lower-tail" => {
            if let Some(span) = s.get("ratio_span").and_then(Value::as_f64) {
                r.check(format!("p(eps)/eps³ span = {span:.3} limit 2"), span < 2.0);
            }
            let slopes: Vec<(f64, f64, f64)> = s["slopes"]
                .as_array()
                .map(|a| a.iter().map(|x| (num(x, "eps"), num(x, "slope"), num(x, "se"))).collect())
                .unwrap_or_default();
            for &(e, sl, se) in &slopes {
                r.info(format!("local slope at eps {e} = {sl:.3} ± {se:.3}"));
            }
            if cfg["model"] == "fs" {
                for &(e, sl, _) in &slopes {
                    r.check(format!("slope at eps {e} = {sl:.3} target 3 tol 20%"), (sl - 3.0).abs() <= 0.6);
                }
            } else if slopes.len() >= 2 {
                let (first, last) = (slopes[0], slopes[slopes.len() - 1]);
                let z = (first.1 - last.1) / (first.2.powi(2) + last.2.powi(2)).sqrt();
                r.check(
                    format!("slope({}) - slope({}) = {:.3}, z = {z:.2} vs {Z_95:.3}", first.0, last.0, first.1 - last.1),
                    z > Z_95,
                );
            }
        }
        "confinement" => {
            let span = num(&s, "span");
            r.check(
                format!("λ^(k/3) E[X^(k+1)(0)] span over {} lines = {span:.3} limit 2", s["lines_in_span"]),
                span < 2.0,
            );
            r.info(format!("window-maximum span = {:.3}", num(&s, "span_max")));
        }
        "covariance" => {
            let (c, se) = (nums(&s, "cov"), nums(&s, "cov_se"));
            let rises = (1..c.len()).filter(|&i| c[i] - c[i - 1] > 2.0 * (se[i].powi(2) + se[i - 1].powi(2)).sqrt());
            let rises: Vec<usize> = rises.collect();
            r.check(format!("covariance non-increasing over {} lags ({} significant rises)", c.len(), rises.len()), rises.is_empty());
        }
        "scaling" => {
            let (p, pc) = (num(&s, "p_value"), num(&s, "control_p_value"));
            r.check(format!("KS p = {p:.4} at exponent 1/3 threshold {KS_THRESHOLD}"), p > KS_THRESHOLD);
            r.check(
                format!("control KS p = {pc:.3e} at exponent {} threshold {CONTROL_THRESHOLD}", num(&s, "control_exponent")),
                pc < CONTROL_THRESHOLD,
            );
        }
        "couple" => {
            for x in s["success"].as_array().into_iter().flatten() {
                r.info(format!("T = {}: {} / {} successes", x["half_width"], x["successes"], x["trials"]));
            }
            if let Some(z) = s.get("z_last_vs_first").and_then(Value::as_f64) {
                r.check(format!("success rate rises with T, z = {z:.2} vs {Z_95:.3}"), z > Z_95);
            }
        }
        "fs-reference" => {
            let ai0 = num(&s, "ai0");
            r.check(format!("Ai(0) = {ai0:.10} target {AI_0_TABLE} tol 1e-9"), (ai0 - AI_0_TABLE).abs() < 1e-9);
            let w = num(&s, "omega1");
            r.check(format!("ω₁ = {w:.10} target {OMEGA_1_TABLE} tol 1e-9"), (w - OMEGA_1_TABLE).abs() < 1e-9);
            r.info(format!("Z = {:.10}, E[Y] = {:.6}", num(&s, "z"), num(&s, "mean")));
        }
        "free-vs-zero" => {
            let (g, se, t) = (nums(&s, "gap"), nums(&s, "gap_se"), nums(&s, "half_widths"));
            for i in 0..g.len() {
                r.check(format!("T = {}: gap = {:.4} ± {:.4}, domination needs gap ≥ -4 SE", t[i], g[i], se[i]), g[i] >= -4.0 * se[i]);
            }
            if g.len() >= 2 {
                let last = g.len() - 1;
                let z = (g[0] - g[last]) / (se[0].powi(2) + se[last].powi(2)).sqrt();
                r.check(format!("gap(T = {}) < gap(T = {}), z = {z:.2} vs {Z_95:.3}", t[last], t[0]), z > Z_95);
            }
        }
        "pinned-exceedance" => {
            r.info(format!("smallest C with -log p ≤ C k v² on all cells: {:.4}", num(&s, "c_bound")));
        }
        "sample" => {
            r.info(format!("E[X^1(0)] = {:.4} ± {:.4}", num(&s, "mean_x1"), num(&s, "mean_x1_se")));
            r.info(format!("block acceptance {}, endpoint acceptance {}", s["block_acceptance"], s["endpoint_acceptance"]));
        }
        other => return Err(format!("unknown experiment `{other}` in params.json")),
    }
    Ok(r)
}

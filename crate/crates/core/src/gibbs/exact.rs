use crate::error::{Error, Result};
use crate::model::{BoundarySpec, GridInterval, TiltParams};
use crate::special::{normal_log_pdf, GaussRule};

const NODES: usize = 240;
const BIN_NODES: usize = 40;
/// Relative density treated as the end of the support.
const SUPPORT_CUTOFF: f64 = 1e-12;

/// One-point marginals of a single-line ensemble on a grid with at most
/// three interior points, by tensor Gauss–Legendre quadrature.
#[derive(Clone, Debug)]
pub struct SmallGridMarginal {
    /// Interior grid indices, one per marginal.
    pub indices: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `densities[p][k]`: normalized marginal density of interior point `p` at `nodes[k]`.
    pub densities: Vec<Vec<f64>>,
    problem: Problem,
    log_peak: f64,
    log_mass: f64,
}

#[derive(Clone, Debug)]
struct Problem {
    x: f64,
    y: f64,
    dt: f64,
    c: f64,
    positivity: bool,
    dim: usize,
}

impl Problem {
    fn log_density(&self, v: &[f64]) -> f64 {
        let mut s = 0.0;
        let mut prev = self.x;
        for &h in v {
            s += normal_log_pdf(h, prev, self.dt) - self.c * self.dt * h;
            prev = h;
        }
        s + normal_log_pdf(self.y, prev, self.dt)
    }

    /// Sum of `f(index tuple, weight * density)` over a tensor rule whose
    /// axis `fixed` uses `(fixed_nodes, fixed_weights)`.
    fn tensor<F: FnMut(&[usize], f64)>(
        &self,
        nodes: &[f64],
        weights: &[f64],
        fixed: Option<(usize, &[f64], &[f64])>,
        log_shift: f64,
        mut f: F,
    ) {
        let d = self.dim;
        let axis = |p: usize| -> (&[f64], &[f64]) {
            match fixed {
                Some((q, n, w)) if q == p => (n, w),
                _ => (nodes, weights),
            }
        };
        let lens: Vec<usize> = (0..d).map(|p| axis(p).0.len()).collect();
        let mut idx = vec![0usize; d];
        let mut v = vec![0.0; d];
        loop {
            let mut w = 1.0;
            for p in 0..d {
                let (n, ws) = axis(p);
                v[p] = n[idx[p]];
                w *= ws[idx[p]];
            }
            let val = if self.positivity && v.iter().any(|&h| h <= 0.0) {
                0.0
            } else {
                (self.log_density(&v) - log_shift).exp()
            };
            f(&idx, w * val);
            let mut p = d;
            loop {
                if p == 0 {
                    return;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < lens[p] {
                    break;
                }
                idx[p] = 0;
            }
        }
    }
}

/// Exact one-point marginals of the discrete single-line measure (bridge
/// increments, trapezoidal tilt, optional positivity) on a grid with one to
/// three interior points. Zero and fixed boundaries only.
pub fn exact_small_grid_marginal(
    grid: &GridInterval,
    tilt: &TiltParams,
    boundary: &BoundarySpec,
    positivity: bool,
) -> Result<SmallGridMarginal> {
    let m = grid.steps();
    if !(2..=4).contains(&m) {
        return Err(Error::Unsupported(format!(
            "quadrature oracle needs 1 to 3 interior points, got {}",
            m.saturating_sub(1)
        )));
    }
    let (x, y) = match boundary {
        BoundarySpec::Zero => (0.0, 0.0),
        BoundarySpec::Fixed { left, right } if left.len() == 1 && right.len() == 1 => (left[0], right[0]),
        BoundarySpec::Fixed { .. } => return Err(Error::Unsupported("quadrature oracle is for one line".into())),
        BoundarySpec::Free => return Err(Error::Unsupported("quadrature oracle needs pinned ends".into())),
    };
    let problem = Problem {
        x,
        y,
        dt: grid.dt(),
        c: tilt.coefficient(0),
        positivity,
        dim: m - 1,
    };
    let len = grid.length();
    let sd = (len / 4.0).sqrt();
    let shift = problem.c * len * len / 4.0;
    let mut below = 8.0 * sd + shift;
    let mut above = 8.0 * sd;
    for _ in 0..8 {
        let lo = if positivity { 0.0 } else { x.min(y) - below };
        let hi = x.max(y) + above;
        let out = integrate_marginals(&problem, grid, lo, hi)?;
        let peak = out.densities.iter().flatten().copied().fold(0.0, f64::max);
        let edge_hi = out.densities.iter().map(|d| *d.last().unwrap()).fold(0.0, f64::max);
        let edge_lo = out.densities.iter().map(|d| d[0]).fold(0.0, f64::max);
        let hi_ok = edge_hi < SUPPORT_CUTOFF * peak;
        let lo_ok = positivity || edge_lo < SUPPORT_CUTOFF * peak;
        if hi_ok && lo_ok {
            return Ok(out);
        }
        if !hi_ok {
            above *= 1.5;
        }
        if !lo_ok {
            below *= 1.5;
        }
    }
    Err(Error::Domain("quadrature support did not converge".into()))
}

fn integrate_marginals(problem: &Problem, grid: &GridInterval, lo: f64, hi: f64) -> Result<SmallGridMarginal> {
    let rule = GaussRule::new(NODES, lo, hi);
    let d = problem.dim;
    // locate the peak on the tensor grid to keep exponentials in range
    let mut log_peak = f64::NEG_INFINITY;
    {
        let mut idx = vec![0usize; d];
        let mut v = vec![0.0; d];
        'outer: loop {
            for p in 0..d {
                v[p] = rule.nodes[idx[p]];
            }
            if !(problem.positivity && v.iter().any(|&h| h <= 0.0)) {
                log_peak = log_peak.max(problem.log_density(&v));
            }
            let mut p = d;
            loop {
                if p == 0 {
                    break 'outer;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < NODES {
                    break;
                }
                idx[p] = 0;
            }
        }
    }
    let mut marg = vec![vec![0.0; NODES]; d];
    let mut total = 0.0;
    problem.tensor(&rule.nodes, &rule.weights, None, log_peak, |idx, wv| {
        total += wv;
        for p in 0..d {
            marg[p][idx[p]] += wv;
        }
    });
    if !(total > 0.0) {
        return Err(Error::Domain("quadrature mass vanished".into()));
    }
    for row in marg.iter_mut() {
        for (k, v) in row.iter_mut().enumerate() {
            *v /= total * rule.weights[k];
        }
    }
    Ok(SmallGridMarginal {
        indices: (1..grid.steps()).collect(),
        lo,
        hi,
        nodes: rule.nodes.clone(),
        weights: rule.weights.clone(),
        densities: marg,
        problem: problem.clone(),
        log_peak,
        log_mass: total.ln(),
    })
}

impl SmallGridMarginal {
    /// Marginal probabilities of the bins `[edges[b], edges[b+1])` for interior point `p`.
    pub fn bin_probabilities(&self, p: usize, edges: &[f64]) -> Vec<f64> {
        let mass = self.log_mass.exp();
        edges
            .windows(2)
            .map(|e| {
                let a = e[0].max(self.lo);
                let b = e[1].min(self.hi);
                if !(b > a) {
                    return 0.0;
                }
                let sub = GaussRule::new(BIN_NODES, a, b);
                let mut s = 0.0;
                self.problem.tensor(
                    &self.nodes,
                    &self.weights,
                    Some((p, &sub.nodes, &sub.weights)),
                    self.log_peak,
                    |_, wv| s += wv,
                );
                s / mass
            })
            .collect()
    }

    /// Node of largest marginal density for interior point `p`.
    pub fn mode(&self, p: usize) -> f64 {
        let d = &self.densities[p];
        let k = (0..d.len()).fold(0, |best, k| if d[k] > d[best] { k } else { best });
        self.nodes[k]
    }

    pub fn mean(&self, p: usize) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .zip(&self.densities[p])
            .map(|((x, w), f)| x * w * f)
            .sum()
    }

    /// `sum_k w_k f_k` for interior point `p`; one by construction.
    pub fn total_mass(&self, p: usize) -> f64 {
        self.weights.iter().zip(&self.densities[p]).map(|(w, f)| w * f).sum()
    }
}

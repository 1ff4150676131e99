use tilted_le::coupling::{
    certify_coupling, coupled_pinned_vs_free, detect_stopping_domain, dominated, estimate_pinned_exceedance,
    monotone_coupled_sweep, pinned_ensemble_sample, reverse_coupling_trials, CoupledPair, ReverseCouplingParams,
};
use tilted_le::estimators::{ks_two_sample, mean};
use tilted_le::gibbs::{run_chain, BurnIn, ChainConfig, Observable};
use tilted_le::{BoundarySpec, EnsembleState, GridInterval, RngStream, TiltParams};

fn tilt() -> TiltParams {
    TiltParams::new(1.0, 2.0).unwrap()
}

fn equilibrated(n: usize, grid: GridInterval, boundary: BoundarySpec, seed: u64) -> EnsembleState {
    let cfg = ChainConfig::new(n, grid, tilt(), boundary)
        .with_seed(seed, 0)
        .with_sampling(BurnIn::Sweeps(500), 0, 1);
    run_chain(&cfg, &[]).unwrap().final_state
}

#[test]
fn diagonal_start_stays_on_the_diagonal() {
    let grid = GridInterval::symmetric(2.0, 0.1).unwrap();
    let s = equilibrated(3, grid, BoundarySpec::Free, 1);
    let mut pair = CoupledPair::new(s.clone(), s, RngStream::new(2, 0)).unwrap();
    for _ in 0..1000 {
        assert!(monotone_coupled_sweep(&mut pair).unwrap());
        assert_eq!(pair.low().raw_heights(), pair.high().raw_heights());
    }
}

#[test]
fn shifted_fixed_boundary_stays_above() {
    let grid = GridInterval::symmetric(1.0, 0.1).unwrap();
    let low = equilibrated(2, grid, BoundarySpec::Zero, 3);
    let c = 0.7;
    let high = {
        let mut lines: Vec<Vec<f64>> = (0..2).map(|i| low.line(i).iter().map(|h| h + c).collect()).collect();
        let b = BoundarySpec::Fixed {
            left: vec![2.0 * c, c],
            right: vec![2.0 * c, c],
        };
        lines[0][0] = 2.0 * c;
        lines[0][20] = 2.0 * c;
        EnsembleState::from_lines(grid, &lines, tilt(), b).unwrap()
    };
    let mut pair = CoupledPair::new(low, high, RngStream::new(4, 0)).unwrap();
    assert!(pair.certificate());
    assert_eq!(certify_coupling(&mut pair, 20_000).unwrap(), None);
    assert_eq!(pair.sweeps(), 20_000);
}

#[test]
fn raised_floor_stays_above() {
    let grid = GridInterval::new(0.0, 4.0, 40).unwrap();
    let t = TiltParams::diagnostic(0.0, 1.0).unwrap();
    let b = BoundarySpec::Fixed {
        left: vec![2.0],
        right: vec![2.0],
    };
    let low = EnsembleState::new(grid, 1, t, b.clone()).unwrap();
    let high = EnsembleState::new(grid, 1, t, b).unwrap().with_floor(vec![1.0; 41]).unwrap();
    let low = {
        let mut l = low;
        for j in 1..40 {
            l.set(0, j, high.get(0, j).min(l.get(0, j)));
        }
        l
    };
    let mut pair = CoupledPair::new(low, high, RngStream::new(5, 0)).unwrap();
    assert!(pair.certificate());
    for _ in 0..5000 {
        assert!(monotone_coupled_sweep(&mut pair).unwrap());
    }
}

#[test]
fn mismatched_pairs_are_rejected() {
    let g1 = GridInterval::symmetric(1.0, 0.1).unwrap();
    let g2 = GridInterval::symmetric(1.0, 0.05).unwrap();
    let a = EnsembleState::new(g1, 2, tilt(), BoundarySpec::Zero).unwrap();
    let b = EnsembleState::new(g2, 2, tilt(), BoundarySpec::Zero).unwrap();
    assert!(CoupledPair::new(a, b, RngStream::new(0, 0)).is_err());
}

#[test]
fn coupled_components_have_the_uncoupled_law() {
    let grid = GridInterval::symmetric(1.0, 0.1).unwrap();
    let j0 = grid.nearest_index(0.0);
    let low = EnsembleState::new(grid, 2, tilt(), BoundarySpec::Zero).unwrap();
    let high = EnsembleState::new(grid, 2, tilt(), BoundarySpec::Free).unwrap();
    let high = {
        let mut h = high;
        for i in 0..2 {
            for j in 0..=20 {
                let v = h.get(i, j).max(low.get(i, j)) + 1.0;
                h.set(i, j, v);
            }
        }
        h.check_ordering().unwrap();
        h
    };
    let mut pair = CoupledPair::new(low, high, RngStream::new(6, 0)).unwrap();
    for _ in 0..2000 {
        monotone_coupled_sweep(&mut pair).unwrap();
    }
    let mut coupled = Vec::new();
    for _ in 0..2000 {
        for _ in 0..50 {
            assert!(monotone_coupled_sweep(&mut pair).unwrap());
        }
        coupled.push(pair.low().get(0, j0));
    }
    let cfg = ChainConfig::new(2, grid, tilt(), BoundarySpec::Zero)
        .with_seed(7, 0)
        .with_sampling(BurnIn::Sweeps(2000), 2000, 50);
    let plain = run_chain(&cfg, &[Observable::Height { line: 0, index: j0 }]).unwrap();
    let ks = ks_two_sample(&coupled, plain.series(0)).unwrap();
    assert!(ks.p_value > 0.01, "{ks:?}");
}

fn with_bottom(values: Vec<f64>) -> EnsembleState {
    let m = values.len() - 1;
    let grid = GridInterval::new(0.0, m as f64 * 0.1, m).unwrap();
    let top: Vec<f64> = values.iter().map(|v| v + 1.0).collect();
    let b = BoundarySpec::Fixed {
        left: vec![top[0], values[0]],
        right: vec![top[m], values[m]],
    };
    EnsembleState::from_lines(grid, &[top, values], tilt(), b).unwrap()
}

#[test]
fn stopping_domain_examples() {
    let u = 0.5;
    let d = detect_stopping_domain(&with_bottom(vec![u + 1.0; 11]), u);
    assert_eq!((d.tau_ell, d.tau_r, d.found), (Some(1), Some(9), true));

    let d = detect_stopping_domain(&with_bottom(vec![u - 0.25; 11]), u);
    assert!(!d.found);
    assert_eq!(d.tau_ell, None);

    let mut v = vec![0.1; 11];
    v[4] = u;
    let d = detect_stopping_domain(&with_bottom(v), u);
    assert_eq!((d.tau_ell, d.tau_r, d.found), (Some(4), Some(4), false));
}

#[test]
fn stopping_times_ignore_data_strictly_inside() {
    let grid = GridInterval::symmetric(5.0, 0.1).unwrap();
    let mut rng = RngStream::new(8, 0);
    for seed in 0..10 {
        let s = equilibrated(2, grid, BoundarySpec::Zero, 100 + seed);
        let u = 0.3;
        let d = detect_stopping_domain(&s, u);
        if !d.found {
            continue;
        }
        let (a, b) = (d.tau_ell.unwrap(), d.tau_r.unwrap());
        let mut lines: Vec<Vec<f64>> = (0..2).map(|i| s.line(i).to_vec()).collect();
        for j in a + 1..b {
            lines[1][j] = 2.0 * rng.uniform();
            lines[0][j] = lines[1][j] + 1.0;
        }
        let t = EnsembleState::from_lines(grid, &lines, tilt(), BoundarySpec::Zero).unwrap();
        assert_eq!(detect_stopping_domain(&t, u), d);
    }
}

#[test]
fn pinned_sample_is_zero_at_pins_and_blocks_are_independent() {
    let half = 4.0;
    let s = pinned_ensemble_sample(2, half, 2.0, 0.1, tilt(), 200, 9, 0).unwrap();
    for t in [-2.0, 0.0, 2.0] {
        let j = s.grid().nearest_index(t);
        assert!(s.is_pinned(j));
        assert_eq!(s.column(j), vec![0.0, 0.0]);
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for draw in 0..300 {
        let s = pinned_ensemble_sample(1, half, 2.0, 0.1, tilt(), 100, 10, draw).unwrap();
        a.push(s.get(0, s.grid().nearest_index(-1.0)));
        b.push(s.get(0, s.grid().nearest_index(1.0)));
    }
    let (ma, mb) = (mean(&a), mean(&b));
    let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / 300.0;
    let sd = |v: &[f64], m: f64| (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 300.0).sqrt();
    let corr = cov / (sd(&a, ma) * sd(&b, mb));
    assert!(corr.abs() < 4.0 / 300f64.sqrt(), "{corr}");
    assert!(pinned_ensemble_sample(1, 0.5, 2.0, 0.1, tilt(), 10, 0, 0).is_err());
}

#[test]
fn pinned_ensemble_is_below_the_unpinned_one() {
    let (pair, fail) = coupled_pinned_vs_free(2, 3.0, 2.0, 0.1, tilt(), 5000, 11).unwrap();
    assert_eq!(fail, None);
    assert!(dominated(pair.low(), pair.high()));
}

#[test]
fn exceedance_estimates() {
    let t = tilt();
    let tiny = estimate_pinned_exceedance(2, 1e-9, 2000, 0.05, t, 4, 500, 5, 12).unwrap();
    assert_eq!(tiny.proportion.estimate, 1.0);

    let one = estimate_pinned_exceedance(1, 1.0, 10_000, 0.05, t, 4, 500, 5, 13).unwrap();
    let p = one.proportion;
    assert!(p.lower > 0.0 && p.upper < 1.0, "{p:?}");

    // -log p_k(v) <= C k v^2 with one C across the grid
    let mut rows = Vec::new();
    for k in 1..=3 {
        for v in [1.0, 2.0] {
            let e = estimate_pinned_exceedance(k, v, 20_000, 0.05, t, 4, 500, 2, 14).unwrap();
            rows.push((k as f64 * v * v, e.proportion));
        }
    }
    let c = rows
        .iter()
        .filter(|(_, p)| p.successes > 0)
        .map(|(x, p)| -p.estimate.ln() / x)
        .fold(0.0, f64::max);
    for (x, p) in &rows {
        assert!(p.upper.ln() >= -c * x, "{x}: {p:?} against C = {c}");
    }
}

#[test]
fn reverse_coupling_fails_without_the_event() {
    let p = ReverseCouplingParams {
        n: 2,
        half_width: 5.0,
        u: 1e-6,
        dt: 0.1,
        tilt: tilt(),
        burn_in: 300,
        resample_sweeps: 100,
    };
    for o in reverse_coupling_trials(&p, 15, 10).unwrap() {
        assert!(!o.event_a && !o.success);
    }
}

#[test]
fn reverse_coupling_success_implies_the_event() {
    let p = ReverseCouplingParams {
        n: 2,
        half_width: 10.0,
        u: 1.5,
        dt: 0.1,
        tilt: tilt(),
        burn_in: 2000,
        resample_sweeps: 500,
    };
    let out = reverse_coupling_trials(&p, 16, 20).unwrap();
    assert!(out.iter().any(|o| o.success));
    for o in &out {
        assert!(!o.success || o.event_b);
        assert!(!o.event_b || o.event_a);
        assert!(!o.event_a || o.found);
    }
}

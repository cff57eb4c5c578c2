use std::f64::consts::PI;

use muskat_core::evolve::{cfl_dt, run, step, twin_divergence, EventKind, SimConfig, SimState};
use muskat_core::grid::{Grid, InitialData};
use muskat_core::{Error, GridFunction64, Quadrature64};

fn config(n: usize, init: InitialData<f64>, t_end: f64) -> SimConfig<f64> {
    let grid = Grid::new(PI, n).unwrap();
    let mut cfg = SimConfig::new(grid, init, t_end);
    cfg.quadrature = cfg.quadrature.with_truncation(2.0 * PI);
    cfg
}

fn plan(cfg: &SimConfig<f64>) -> Quadrature64 {
    Quadrature64::new(&cfg.grid, &cfg.quadrature).unwrap()
}

fn max_diff(a: &GridFunction64, b: &GridFunction64) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn constants_are_fixed_bit_exactly() {
    let cfg = config(64, InitialData::Constant(0.1), 1.0);
    let q = plan(&cfg);
    let f = cfg.init.sample(&cfg.grid).unwrap();
    let mut s = SimState::new(f.clone());
    for _ in 0..20 {
        s = step(&s, 0.01, &q).unwrap();
    }
    assert_eq!(s.f, f);
    assert_eq!(s.step_index, 20);
}

#[test]
fn linear_profiles_are_steady_on_the_analytic_path() {
    use muskat_core::nonlocal::{muskat_rhs_at, Linear};
    let line = Linear { slope: 0.7, offset: -0.2 };
    for x in [-1.0, 0.0, 2.5] {
        assert_eq!(muskat_rhs_at(&line, x, 0.01, 50.0).unwrap(), 0.0);
    }
}

#[test]
fn one_step_commutes_with_translation() {
    let cfg = config(64, InitialData::sine(0.3, 1), 1.0);
    let q = plan(&cfg);
    let f = cfg.grid.from_fn(|x| 0.3 * x.sin() + 0.1 * (2.0 * x).cos());
    let dt = cfl_dt(&f, &cfg).unwrap();
    let a = step(&SimState::new(f.shifted(5)), dt, &q).unwrap();
    let b = step(&SimState::new(f), dt, &q).unwrap();
    assert_eq!(a.f, b.f.shifted(5));
}

#[test]
fn time_order_is_at_least_three() {
    let mut cfg = config(64, InitialData::sine(0.3, 1), 0.25);
    cfg.cfl_safety = 0.5;
    let q = plan(&cfg);
    let f = cfg.grid.from_fn(|x| 0.3 * x.sin() + 0.1 * (2.0 * x).cos());
    let solve = |steps: usize| {
        let dt = 0.25 / steps as f64;
        let mut s = SimState::new(f.clone());
        for _ in 0..steps {
            s = step(&s, dt, &q).unwrap();
        }
        s.f
    };
    let (a, b, c) = (solve(16), solve(32), solve(64));
    let order = (max_diff(&a, &b) / max_diff(&b, &c)).log2();
    assert!(order >= 2.8, "observed order {order}");
}

#[test]
fn default_safety_is_stable_for_ten_thousand_steps() {
    let cfg = config(32, InitialData::sine(0.3, 1), 1.0);
    let q = plan(&cfg);
    let mut s = SimState::new(cfg.init.sample(&cfg.grid).unwrap());
    let mut sup = s.f.sup_norm();
    for _ in 0..10_000 {
        let dt = cfl_dt(&s.f, &cfg).unwrap();
        s = step(&s, dt, &q).unwrap();
        let now = s.f.sup_norm();
        assert!(now <= sup + 1e-15, "sup norm grew from {sup} to {now} at t = {}", s.t);
        sup = now;
    }
    assert!(s.f.first_non_finite().is_none());
}

#[test]
fn mean_is_preserved_on_random_data() {
    let cfg = config(
        128,
        InitialData::RandomBandLimited { seed: 3, modes: 12, slope: 0.8 },
        1.0,
    );
    let q = plan(&cfg);
    let f = cfg.init.sample(&cfg.grid).unwrap().map(|v| v + 0.25);
    let mut s = SimState::new(f);
    for _ in 0..20 {
        let dt = cfl_dt(&s.f, &cfg).unwrap();
        s = step(&s, dt, &q).unwrap();
    }
    assert!((s.f.mean() - 0.25).abs() < 1e-13);
}

#[test]
fn zero_data_gives_zero_metrics() {
    let mut cfg = config(32, InitialData::Constant(0.0), 0.5);
    cfg.output_stride = 10;
    let out = run(&cfg).unwrap();
    assert!(!out.halted());
    assert!((out.last.t - 0.5).abs() < 1e-14);
    assert!(out.series.len() > 2);
    for row in &out.series {
        let m = &row.metrics;
        assert_eq!((m.sup_f, m.slope_b, m.hhalf), (0.0, 0.0, 0.0));
        assert!(m.curvature.iter().all(|&(_, v)| v == 0.0));
        assert!(row.slack.iter().all(|&(_, v)| v == 0.0));
        assert_eq!(row.envelope, 0.0);
    }
}

#[test]
fn output_stride_does_not_change_the_trajectory() {
    let mut cfg = config(32, InitialData::sine(0.2, 1), 0.2);
    cfg.output_stride = 1;
    let a = run(&cfg).unwrap();
    cfg.output_stride = 7;
    let b = run(&cfg).unwrap();
    assert_eq!(a.last, b.last);
    assert_eq!(a.ledger, b.ledger);
    assert!(a.series.len() > b.series.len());
}

#[test]
fn injected_nan_halts_with_event() {
    let mut cfg = config(32, InitialData::sine(0.1, 1), 1.0);
    cfg.hooks.inject_nan_at_step = Some(3);
    let out = run(&cfg).unwrap();
    assert!(out.events.contains(EventKind::NanDetected));
    assert_eq!(out.last.step_index, 2);
}

#[test]
fn slope_threshold_halts_with_event() {
    let mut cfg = config(32, InitialData::sine(0.5, 1), 1.0);
    cfg.slope_threshold = 0.4;
    let out = run(&cfg).unwrap();
    assert_eq!(out.events.events().len(), 1);
    assert_eq!(out.events.events()[0].kind, EventKind::SlopeThreshold);
    assert_eq!(out.last.step_index, 1);
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = config(32, InitialData::sine(0.5, 1), 1.0);
    cfg.cfl_safety = 0.0;
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
}

#[test]
fn small_data_obeys_maximum_principles() {
    let mut cfg = config(64, InitialData::sine(0.01, 1), 2.0);
    cfg.cfl_safety = 0.5;
    cfg.output_stride = 4;
    let out = run(&cfg).unwrap();
    assert!(!out.halted(), "{:?}", out.events);
    for w in out.series.windows(2) {
        let (a, b) = (&w[0].metrics, &w[1].metrics);
        let slack = 1e-8 * (w[1].t - w[0].t);
        assert!(b.sup_f <= a.sup_f + slack);
        assert!(b.slope_b <= a.slope_b + slack);
        assert!(b.curvature_norm(2.0).unwrap() <= a.curvature_norm(2.0).unwrap() + slack);
    }
    for row in &out.series {
        assert!(row.metrics.m_inf() <= row.envelope + 1e-6);
        assert!(row.slack.iter().all(|&(_, s)| s >= -1e-8), "{:?}", row.slack);
    }
}

#[test]
fn grid_refinement_changes_little() {
    let solve = |n: usize| {
        let mut cfg = config(n, InitialData::sine(0.3, 1), 0.5);
        cfg.cfl_safety = 0.5;
        cfg.output_stride = 1000;
        run(&cfg).unwrap().last.f
    };
    let coarse = solve(32);
    let fine = solve(64);
    let err = coarse
        .grid()
        .nodes()
        .iter()
        .zip(coarse.values())
        .map(|(&x, v)| (fine.interpolate(x) - v).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-5, "refinement difference {err}");
}

#[test]
fn twin_probe_trivial_cases() {
    let mut cfg = config(32, InitialData::sine(0.05, 1), 0.5);
    cfg.output_stride = 5;
    let same = twin_divergence(&cfg, 0.0).unwrap();
    assert!(same.samples.iter().all(|&(_, d, _)| d == 0.0));
    let eps0 = 1e-6;
    let probe = twin_divergence(&cfg, eps0).unwrap();
    assert_eq!(probe.samples[0].1, eps0);
    assert!(probe.within_envelope(), "{probe:?}");
    assert!(probe.epsilon > 0.0 && probe.epsilon <= PI);
}

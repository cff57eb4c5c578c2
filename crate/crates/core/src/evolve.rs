//! SSP-RK3 time integration, event detection and the twin-trajectory probe.

use serde::Serialize;

use crate::diagnostics::{
    envelope_curvature, estimate_modulus, ledger_update, node_distances, snapshot_metrics, Ledger,
    ModulusEstimate,
};
use crate::grid::{Grid, GridFunction, InitialData, Metrics};
use crate::nonlocal::{Quadrature, QuadratureConfig};
use crate::{Error, Real, Result};

/// Relative per-step tolerance on the drift of the spatial mean.
pub const MEAN_DRIFT_TOLERANCE: f64 = 1e-12;

/// Curvature envelope checks apply only below this initial slope.
pub const SMALL_SLOPE: f64 = 0.05;

/// Absolute slack allowed above the curvature envelope.
pub const ENVELOPE_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SimState<T: Real> {
    pub t: T,
    pub f: GridFunction<T>,
    pub step_index: u64,
}

impl<T: Real> SimState<T> {
    pub fn new(f: GridFunction<T>) -> Self {
        Self { t: T::zero(), f, step_index: 0 }
    }
}

/// Fault injection for exercising error paths.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Hooks {
    /// Overwrite one value with NaN after this many steps.
    pub inject_nan_at_step: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct SimConfig<T: Real> {
    pub grid: Grid<T>,
    pub quadrature: QuadratureConfig<T>,
    pub init: InitialData<T>,
    /// In `(0, 1/2]`.
    pub cfl_safety: T,
    pub t_end: T,
    /// Record metrics every this many steps; the final state is always recorded.
    pub output_stride: usize,
    pub ledger_exponents: Vec<T>,
    /// `‖f'‖_∞` above which the run halts.
    pub slope_threshold: T,
    pub hooks: Hooks,
}

impl<T: Real> SimConfig<T> {
    pub fn new(grid: Grid<T>, init: InitialData<T>, t_end: T) -> Self {
        Self {
            grid,
            quadrature: QuadratureConfig::default(),
            init,
            cfl_safety: T::lit(0.1),
            t_end,
            output_stride: 100,
            ledger_exponents: vec![T::lit(2.0), T::lit(1.5)],
            slope_threshold: T::lit(10.0),
            hooks: Hooks::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl_safety > T::zero() && self.cfl_safety <= T::lit(0.5)) {
            return Err(Error::Config(format!("cfl_safety must lie in (0, 0.5], got {}", self.cfl_safety)));
        }
        if !(self.t_end > T::zero()) || !self.t_end.is_finite() {
            return Err(Error::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(Error::Config("output_stride must be at least 1".into()));
        }
        if !(self.slope_threshold > T::zero()) {
            return Err(Error::Config("slope_threshold must be positive".into()));
        }
        if let Some(&p) = self.ledger_exponents.iter().find(|&&p| !(p > T::one()) || !p.is_finite()) {
            return Err(Error::Config(format!("ledger exponent must be finite and > 1, got {p}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    SlopeThreshold,
    NanDetected,
    EnvelopeViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Event<T> {
    pub t: T,
    pub kind: EventKind,
    pub payload: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EventLog<T> {
    events: Vec<Event<T>>,
}

impl<T: Real> EventLog<T> {
    pub fn push(&mut self, t: T, kind: EventKind, payload: impl Into<String>) {
        debug_assert!(self.events.last().map_or(true, |e| e.t <= t));
        self.events.push(Event { t, kind, payload: payload.into() });
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, kind: EventKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }
}

/// `cfl_safety · h · min(1, 1 + B²)/π`.
pub fn cfl_dt<T: Real>(f: &GridFunction<T>, cfg: &SimConfig<T>) -> Result<T> {
    let b = f.derivative(1)?.sup_norm();
    let weight = (T::one() + b * b).min(T::one());
    Ok(cfg.cfl_safety * f.grid().spacing() * weight / T::PI())
}

fn axpy<T: Real>(a: T, x: &GridFunction<T>, y: &GridFunction<T>) -> Result<GridFunction<T>> {
    y.zip_map(x, |yv, xv| yv + a * xv)
}

/// One three-stage strong-stability-preserving Runge–Kutta step, written in increment form
/// `f₀ + dt Σ bᵢ Lᵢ` so that a vanishing right-hand side leaves `f₀` untouched.
///
/// A non-finite result is reported as [`Error::NonFinite`]; the mean may drift by at most
/// `1e-12 · max(|mean|, ‖f‖_∞)`.
pub fn step<T: Real>(s: &SimState<T>, dt: T, q: &Quadrature<T>) -> Result<SimState<T>> {
    let f0 = &s.f;
    let l0 = q.muskat_rhs(f0)?;
    let f1 = axpy(dt, &l0, f0)?;
    let l1 = q.muskat_rhs(&f1)?;
    let f2 = l0.zip_map(&l1, |a, b| a + b)?;
    let f2 = axpy(dt * T::lit(0.25), &f2, f0)?;
    let l2 = q.muskat_rhs(&f2)?;
    let incr = l0.zip_map(&l1, |a, b| a + b)?.zip_map(&l2, |a, b| a + T::lit(4.0) * b)?;
    let f3 = axpy(dt / T::lit(6.0), &incr, f0)?;
    if let Some(index) = f3.first_non_finite() {
        return Err(Error::NonFinite { index });
    }
    let before = f0.mean();
    let drift = (f3.mean() - before).abs();
    let scale = before.abs().max(f0.sup_norm());
    let tolerance = T::lit(MEAN_DRIFT_TOLERANCE) * scale;
    if drift > tolerance {
        return Err(Error::MeanDrift {
            drift: drift.to_f64_lossy(),
            tolerance: tolerance.to_f64_lossy(),
        });
    }
    Ok(SimState {
        t: s.t + dt,
        f: f3,
        step_index: s.step_index + 1,
    })
}

/// One recorded output time.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub step_index: u64,
    pub metrics: Metrics<T>,
    /// `‖f‖_{L²}`
    pub l2: T,
    /// Curvature envelope at `t`; `NaN` outside the small-slope regime.
    pub envelope: T,
    /// Ledger slack per exponent, in the order of [`SimConfig::ledger_exponents`].
    pub slack: Vec<(T, T)>,
}

#[derive(Clone, Debug)]
pub struct RunOutput<T: Real> {
    pub series: Vec<Sample<T>>,
    pub events: EventLog<T>,
    pub ledger: Ledger<T>,
    pub last: SimState<T>,
}

impl<T: Real> RunOutput<T> {
    pub fn halted(&self) -> bool {
        !self.events.is_empty()
    }
}

/// Stepping loop shared by [`run`] and [`twin_divergence`].
struct Driver<T: Real> {
    q: Quadrature<T>,
    dt_max: T,
    t_end: T,
}

impl<T: Real> Driver<T> {
    fn new(cfg: &SimConfig<T>) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            q: Quadrature::new(&cfg.grid, &cfg.quadrature)?,
            dt_max: cfg.cfl_safety * cfg.grid.spacing() / T::PI(),
            t_end: cfg.t_end,
        })
    }

    /// Step length from `s`, clipped to land on `t_end`; `None` once there.
    fn next_dt(&self, s: &SimState<T>, cfg: &SimConfig<T>) -> Result<Option<T>> {
        let remaining = self.t_end - s.t;
        if remaining <= self.dt_max * T::lit(1e-9) {
            return Ok(None);
        }
        Ok(Some(cfl_dt(&s.f, cfg)?.min(remaining)))
    }
}

pub fn run<T: Real>(cfg: &SimConfig<T>) -> Result<RunOutput<T>> {
    let driver = Driver::new(cfg)?;
    let f0 = cfg.init.sample(&cfg.grid)?;
    let mut state = SimState::new(f0);
    let mut ledger = Ledger::new(&state.f, &cfg.ledger_exponents)?;
    let mut events = EventLog::default();
    let m0 = snapshot_metrics(&state.f)?;
    let b0 = m0.slope_b;
    let small = b0 <= T::lit(SMALL_SLOPE);
    let envelope = |t: T| -> Result<T> {
        if !small {
            Ok(T::nan())
        } else if m0.m_inf() == T::zero() {
            Ok(T::zero())
        } else {
            envelope_curvature(t, m0.m_inf(), b0)
        }
    };
    let sample = |state: &SimState<T>, ledger: &Ledger<T>, metrics: Metrics<T>| -> Result<Sample<T>> {
        Ok(Sample {
            t: state.t,
            step_index: state.step_index,
            metrics,
            l2: state.f.lp_norm(T::lit(2.0))?,
            envelope: envelope(state.t)?,
            slack: ledger.entries.iter().map(|e| (e.p, e.slack())).collect(),
        })
    };
    let mut series = vec![sample(&state, &ledger, m0.clone())?];

    while let Some(dt) = driver.next_dt(&state, cfg)? {
        let mut next = match step(&state, dt, &driver.q) {
            Ok(s) => s,
            Err(Error::NonFinite { index }) => {
                events.push(state.t + dt, EventKind::NanDetected, format!("non-finite value at node {index}"));
                break;
            }
            Err(e) => return Err(e),
        };
        if cfg.hooks.inject_nan_at_step == Some(next.step_index) {
            let mut v = next.f.into_values();
            v[0] = T::nan();
            next.f = GridFunction::from_raw(&cfg.grid, v);
        }
        if let Some(index) = next.f.first_non_finite() {
            events.push(next.t, EventKind::NanDetected, format!("non-finite value at node {index}"));
            break;
        }
        ledger_update(&mut ledger, &next.f, dt)?;
        state = next;

        let finished = driver.next_dt(&state, cfg)?.is_none();
        let due = state.step_index % cfg.output_stride as u64 == 0 || finished;
        let slope = state.f.derivative(1)?.sup_norm();
        let mut halt = false;
        if slope > cfg.slope_threshold {
            events.push(state.t, EventKind::SlopeThreshold, format!("slope {slope:e} exceeds {}", cfg.slope_threshold));
            halt = true;
        }
        if due || halt {
            let metrics = snapshot_metrics(&state.f)?;
            let row = sample(&state, &ledger, metrics)?;
            if small && row.metrics.m_inf() > row.envelope + T::lit(ENVELOPE_SLACK) {
                events.push(
                    state.t,
                    EventKind::EnvelopeViolation,
                    format!("curvature {:e} above envelope {:e}", row.metrics.m_inf(), row.envelope),
                );
                halt = true;
            }
            series.push(row);
        }
        if halt {
            break;
        }
    }
    Ok(RunOutput {
        series,
        events,
        ledger,
        last: state,
    })
}

/// Sup-norm divergence of two trajectories against the uniqueness envelope
/// `‖g(0)‖_∞ exp(2B² t/ε)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwinReport<T> {
    /// Largest sampled distance with `ρ̂(ε) ≤ 1/2`, capped at the half period.
    pub epsilon: T,
    /// Largest slope over both trajectories and all steps.
    pub slope_bound: T,
    /// `(t, ‖f₁ − f₂‖_∞, envelope)`
    pub samples: Vec<(T, T, T)>,
    /// Smallest `envelope − divergence` over the samples.
    pub worst_margin: T,
}

impl<T: Real> TwinReport<T> {
    pub fn within_envelope(&self) -> bool {
        self.worst_margin >= T::zero()
    }
}

/// Unit-height periodized Gaussian centred at `x = 0`.
pub fn twin_bump<T: Real>(grid: &Grid<T>) -> Result<GridFunction<T>> {
    let bump = InitialData::Gaussian {
        amplitude: T::one(),
        sigma: T::lit(0.5) * grid.half_length() / T::PI(),
        center: T::zero(),
    }
    .sample(grid)?;
    let peak = bump.sup_norm();
    Ok(bump.map(|v| v / peak))
}

/// Runs `f₀` and `f₀ + ε₀·bump` with identical step sequences.
pub fn twin_divergence<T: Real>(cfg: &SimConfig<T>, eps0: T) -> Result<TwinReport<T>> {
    let driver = Driver::new(cfg)?;
    let f0 = cfg.init.sample(&cfg.grid)?;
    let bump = twin_bump(&cfg.grid)?;
    let f1 = axpy(eps0, &bump, &f0)?;
    let mut a = SimState::new(f1);
    let mut b = SimState::new(f0);
    let distances = node_distances(&b.f);
    let modulus_of = |s: &SimState<T>| -> Result<(T, ModulusEstimate<T>)> {
        let fp = s.f.derivative(1)?;
        Ok((fp.sup_norm(), estimate_modulus(&fp, &distances)?))
    };
    let (slope_b, mut rho) = modulus_of(&b)?;
    let mut slope = slope_b.max(a.f.derivative(1)?.sup_norm());
    let divergence = |a: &SimState<T>, b: &SimState<T>| -> Result<T> {
        Ok(a.f.zip_map(&b.f, |x, y| x - y)?.sup_norm())
    };
    let mut raw = vec![(T::zero(), divergence(&a, &b)?)];
    while let Some(dt) = driver.next_dt(&b, cfg)? {
        let dt = dt.min(cfl_dt(&a.f, cfg)?);
        a = step(&a, dt, &driver.q)?;
        b = step(&b, dt, &driver.q)?;
        let (sb, rb) = modulus_of(&b)?;
        rho.merge(&rb);
        slope = slope.max(sb).max(a.f.derivative(1)?.sup_norm());
        if b.step_index % cfg.output_stride as u64 == 0 || driver.next_dt(&b, cfg)?.is_none() {
            raw.push((b.t, divergence(&a, &b)?));
        }
    }
    let cap = cfg.grid.half_length();
    let epsilon = rho.largest_below(T::lit(0.5)).unwrap_or(cfg.grid.spacing()).min(cap);
    let g0 = raw[0].1;
    let rate = T::lit(2.0) * slope * slope / epsilon;
    let samples: Vec<(T, T, T)> = raw.iter().map(|&(t, d)| (t, d, g0 * (rate * t).exp())).collect();
    let worst_margin = samples
        .iter()
        .map(|&(_, d, e)| e - d)
        .fold(T::infinity(), T::min);
    Ok(TwinReport {
        epsilon,
        slope_bound: slope,
        samples,
        worst_margin,
    })
}

//! Norms, moduli of continuity, inequality checks and energy ledgers.

use serde::Serialize;

use crate::bounds::{cubic_lower_bound, fppp_lower_bound, l_b, lp_lower_bound, Modulus, Variant};
use crate::grid::{GridFunction, Metrics, Spectrum};
use crate::nonlocal::Quadrature;
use crate::summation::Compensated;
use crate::{Error, Real, Result};

/// Exponents reported in [`Metrics::curvature`].
pub const CURVATURE_EXPONENTS: [f64; 4] = [1.5, 2.0, 3.0, f64::INFINITY];

/// Nodes with `|f''| < EXCLUSION · M_∞` are left out of checks and ratios built on `|f''|`.
pub const EXCLUSION: f64 = 1e-10;

/// Largest admissible spectral tail ratio for pointwise checks.
pub const RESOLUTION_LIMIT: f64 = 1e-10;

/// Tolerance of the pointwise checks, relative to the largest dissipation value.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

pub fn snapshot_metrics<T: Real>(f: &GridFunction<T>) -> Result<Metrics<T>> {
    let fpp = f.derivative(2)?;
    let curvature = CURVATURE_EXPONENTS
        .iter()
        .map(|&p| {
            let p = T::lit(p);
            fpp.lp_norm(p).map(|v| (p, v))
        })
        .collect::<Result<_>>()?;
    Ok(Metrics {
        sup_f: f.sup_norm(),
        slope_b: f.derivative(1)?.sup_norm(),
        curvature,
        hhalf: fpp.hhalf_seminorm(),
    })
}

/// Outcome of one inequality check; `pass ⇔ worst_margin ≥ −tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport<T> {
    pub name: String,
    pub pass: bool,
    pub worst_margin: T,
    pub worst_location: T,
    pub tolerance: T,
    /// Reason the check was not run; such reports always pass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl<T: Real> CheckReport<T> {
    /// Worst of `(location, margin)` pairs; an empty set counts as margin zero.
    pub fn from_margins(name: impl Into<String>, margins: impl IntoIterator<Item = (T, T)>, tolerance: T) -> Self {
        let mut worst = (T::zero(), T::infinity());
        for (x, m) in margins {
            if m < worst.1 || m.is_nan() {
                worst = (x, m);
                if m.is_nan() {
                    break;
                }
            }
        }
        if worst.1.is_infinite() {
            worst.1 = T::zero();
        }
        Self {
            name: name.into(),
            pass: worst.1 >= -tolerance,
            worst_margin: worst.1,
            worst_location: worst.0,
            tolerance,
            skipped: None,
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass: true,
            worst_margin: T::zero(),
            worst_location: T::zero(),
            tolerance: T::zero(),
            skipped: Some(reason.into()),
        }
    }
}

/// Sampled modulus of continuity `ρ̂(d) = max_{x, |α| ≤ d} |δα f'(x)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModulusEstimate<T> {
    pub distances: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> ModulusEstimate<T> {
    /// Value at the smallest sampled distance `≥ d`, which dominates `ρ̂(d)`.
    pub fn upper(&self, d: T) -> Option<T> {
        let i = self.distances.partition_point(|&x| x < d);
        self.values.get(i).copied()
    }

    /// Largest sampled distance with `ρ̂ ≤ level`.
    pub fn largest_below(&self, level: T) -> Option<T> {
        self.distances
            .iter()
            .zip(&self.values)
            .take_while(|(_, &v)| v <= level)
            .last()
            .map(|(&d, _)| d)
    }

    /// Pointwise maximum with another estimate on the same distances.
    pub fn merge(&mut self, other: &Self) {
        debug_assert_eq!(self.distances, other.distances);
        for (a, &b) in self.values.iter_mut().zip(&other.values) {
            *a = a.max(b);
        }
    }
}

/// Largest node count scanned exhaustively by [`estimate_modulus`].
pub const MODULUS_SCAN_LIMIT: usize = 2048;

/// Maximum of `|f'(x_j) − f'(x_j − s h)|` for every shift `s ≤ N/2`; indexed by `s`.
fn shift_maxima<T: Real>(fp: &GridFunction<T>) -> Vec<T> {
    let n = fp.len();
    let v = fp.values();
    let stride = (n / MODULUS_SCAN_LIMIT).max(1);
    let mut out = vec![T::zero(); n / 2 + 1];
    for (s, o) in out.iter_mut().enumerate().skip(1) {
        let mut m = T::zero();
        for j in (0..n).step_by(stride) {
            let d = (v[j] - v[(j + n - s) % n]).abs();
            if d > m {
                m = d;
            }
        }
        *o = m;
    }
    out
}

/// Periodic distances are `min(s, N − s)·h`; for `N > 2048` the base points are subsampled.
pub fn estimate_modulus<T: Real>(fp: &GridFunction<T>, distances: &[T]) -> Result<ModulusEstimate<T>> {
    if distances.iter().any(|&d| !(d > T::zero())) || distances.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "modulus distances must be positive and sorted".into(),
        ));
    }
    let h = fp.grid().spacing();
    let maxima = shift_maxima(fp);
    let mut running = Vec::with_capacity(maxima.len());
    let mut m = T::zero();
    for &v in &maxima {
        m = m.max(v);
        running.push(m);
    }
    let values = distances
        .iter()
        .map(|&d| {
            let s = (d / h + T::lit(1e-9)).floor().to_usize().unwrap_or(usize::MAX);
            running[s.min(running.len() - 1)]
        })
        .collect();
    Ok(ModulusEstimate {
        distances: distances.to_vec(),
        values,
    })
}

/// Node distances `h, 2h, …, L`.
pub fn node_distances<T: Real>(fp: &GridFunction<T>) -> Vec<T> {
    let h = fp.grid().spacing();
    (1..=fp.len() / 2).map(|s| T::count(s) * h).collect()
}

/// Options for [`check_pointwise_bounds`].
#[derive(Clone, Debug)]
pub struct BoundChecks<T> {
    /// Modulus obeyed by `f'`; enables the `L_B` check.
    pub modulus: Option<Modulus<T>>,
    /// Multiplies every lower bound. Anything but one is a harness sensitivity test.
    pub bound_scale: T,
}

impl<T: Real> Default for BoundChecks<T> {
    fn default() -> Self {
        Self {
            modulus: None,
            bound_scale: T::one(),
        }
    }
}

fn ensure_resolved<T: Real>(f: &GridFunction<T>) -> Result<()> {
    let ratio = Spectrum::of(f).tail_ratio();
    if ratio > T::lit(RESOLUTION_LIMIT) {
        return Err(Error::Unresolved {
            ratio: ratio.to_f64_lossy(),
            limit: RESOLUTION_LIMIT,
        });
    }
    Ok(())
}

/// Pointwise lower bounds for `𝒟_f[f'']`, `𝒟_f[f''']` and the kernel comparison
/// `𝒟_f[f''] ≥ 𝒟[f'']/(1 + B²)`, one report each.
pub fn check_pointwise_bounds<T: Real>(
    f: &GridFunction<T>,
    q: &Quadrature<T>,
    opts: &BoundChecks<T>,
) -> Result<Vec<CheckReport<T>>> {
    ensure_resolved(f)?;
    let grid = f.grid();
    let x = grid.nodes();
    let fpp = f.derivative(2)?;
    let fppp = f.derivative(3)?;
    let b = f.derivative(1)?.sup_norm();
    let minf = fpp.sup_norm();
    let m2 = fpp.lp_norm(T::lit(2.0))?;
    let d = q.apply_df(f, &fpp)?;
    let d3 = q.apply_df(f, &fppp)?;
    let flat = q.apply_df(&grid.zeros(), &fpp)?;
    let tol = |v: &GridFunction<T>| T::lit(QUADRATURE_TOLERANCE) * v.sup_norm();
    let scale = opts.bound_scale;
    let cutoff = T::lit(EXCLUSION) * minf;
    let kept: Vec<usize> = (0..f.len())
        .filter(|&j| minf > T::zero() && fpp.values()[j].abs() >= cutoff)
        .collect();
    let on_kept = |bound: &dyn Fn(T) -> Result<T>| -> Result<Vec<(T, T)>> {
        kept.iter()
            .map(|&j| Ok((x[j], d.values()[j] - scale * bound(fpp.values()[j].abs())?)))
            .collect()
    };

    let mut reports = Vec::new();
    reports.push(CheckReport::from_margins(
        "cubic_lower_bound",
        on_kept(&|m| cubic_lower_bound(m, b))?,
        tol(&d),
    ));
    reports.push(CheckReport::from_margins(
        "lp_lower_bound_p2",
        on_kept(&|m| lp_lower_bound(m, b, T::lit(2.0), m2, Variant::D))?,
        tol(&d),
    ));
    let third = if minf > T::zero() {
        (0..f.len())
            .map(|j| {
                let bound = fppp_lower_bound(fppp.values()[j].abs(), minf, b)?;
                Ok((x[j], d3.values()[j] - scale * bound))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    reports.push(CheckReport::from_margins("fppp_lower_bound", third, tol(&d3)));
    let weight = (T::one() + b * b).recip();
    reports.push(CheckReport::from_margins(
        "kernel_comparison",
        (0..f.len()).map(|j| (x[j], d.values()[j] - scale * weight * flat.values()[j])),
        tol(&d),
    ));
    if let Some(rho) = &opts.modulus {
        reports.push(CheckReport::from_margins(
            "modulus_lower_bound",
            on_kept(&|m| l_b(m, rho, b))?,
            tol(&d),
        ));
    }
    Ok(reports)
}

/// `M₀/(1 + M₀ t/(100B))`.
pub fn envelope_curvature<T: Real>(t: T, m0: T, b: T) -> Result<T> {
    if !(b > T::zero()) {
        return Err(Error::InvalidArgument(format!("slope bound must be positive, got {b}")));
    }
    Ok(m0 / (T::one() + m0 * t / (T::lit(100.0) * b)))
}

/// Integral identities and the pointwise square identity for the pair `(f, g)`.
///
/// The second report covers `p ∈ {3/2, 2}`, relative to `‖g‖_p^p`.
pub fn check_identities<T: Real>(f: &GridFunction<T>, g: &GridFunction<T>, q: &Quadrature<T>) -> Result<Vec<CheckReport<T>>> {
    f.check_same_grid(g)?;
    let grid = f.grid();
    let x = grid.nodes();

    let flat = q.apply_df(&grid.zeros(), g)?;
    let target = g.hhalf_seminorm_sq();
    let err = (flat.integral() - target).abs();
    let seminorm = CheckReport::from_margins("hhalf_identity", [(T::zero(), -err)], T::lit(0.01) * target);

    let mut relative = Vec::new();
    for p in [T::lit(1.5), T::lit(2.0)] {
        let u = g.map(|v| v.abs().powf(p));
        let total = q.apply_lf(f, &u)?.integral().abs();
        let norm = g.lp_norm_pow(p)?;
        relative.push((p, if norm > T::zero() { -total / norm } else { -total }));
    }
    let integrated = CheckReport::from_margins("transport_identity", relative, T::lit(1e-6));

    let sq = g.map(|v| v * v);
    let lsq = q.apply_lf(f, &sq)?;
    let lg = q.apply_lf(f, g)?;
    let dg = q.apply_df(f, g)?;
    let scale = dg.sup_norm().max(lsq.sup_norm());
    let tol = T::lit(1e-8) * scale;
    let square = CheckReport::from_margins(
        "square_identity",
        (0..f.len()).map(|j| {
            let r = lsq.values()[j] - T::lit(2.0) * g.values()[j] * lg.values()[j] + dg.values()[j];
            (x[j], -r.abs())
        }),
        tol,
    );
    Ok(vec![seminorm, integrated, square])
}

/// Summary of the per-node ratios of [`empirical_constants`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport<T> {
    pub max: T,
    pub median: T,
    pub argmax: T,
    pub nodes: usize,
    pub excluded: usize,
}

/// `(|T₁| + … + |T₄|) / (B |f''|²/ε² + ε B² 𝒟[f'']/|f''|)` per node; reported, not asserted.
pub fn empirical_constants<T: Real>(f: &GridFunction<T>, eps: T, q: &Quadrature<T>) -> Result<RatioReport<T>> {
    if !(eps > T::zero() && eps <= T::one()) {
        return Err(Error::InvalidArgument(format!("ε must lie in (0, 1], got {eps}")));
    }
    let fpp = f.derivative(2)?;
    let b = f.derivative(1)?.sup_norm();
    let minf = fpp.sup_norm();
    let terms = q.t_terms(f)?;
    let d = q.apply_df(f, &fpp)?;
    let x = f.grid().nodes();
    let cutoff = T::lit(EXCLUSION) * minf;
    let mut ratios = Vec::new();
    for j in 0..f.len() {
        let m = fpp.values()[j].abs();
        if minf == T::zero() || m < cutoff {
            continue;
        }
        let num = [&terms.t1, &terms.t2, &terms.t3, &terms.t4]
            .iter()
            .map(|t| t.values()[j].abs())
            .collect::<Compensated<T>>()
            .value();
        let den = b * m * m / (eps * eps) + eps * b * b * d.values()[j] / m;
        ratios.push((num / den, x[j]));
    }
    if ratios.is_empty() {
        return Err(Error::InvalidArgument("every node has vanishing curvature".into()));
    }
    let nodes = ratios.len();
    let (max, argmax) = ratios
        .iter()
        .copied()
        .fold((T::neg_infinity(), T::zero()), |a, r| if r.0 > a.0 { r } else { a });
    let mut sorted: Vec<T> = ratios.iter().map(|r| r.0).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let median = if nodes % 2 == 1 {
        sorted[nodes / 2]
    } else {
        (sorted[nodes / 2 - 1] + sorted[nodes / 2]) * T::lit(0.5)
    };
    Ok(RatioReport {
        max,
        median,
        argmax,
        nodes,
        excluded: f.len() - nodes,
    })
}

/// One exponent of the curvature energy ledger.
///
/// Tracks `M_p(t)^p + c₁ ∫‖|f''|^{p/2}‖²_{Ḣ^{1/2}} + c₂ ∫ M_{p+1}^{p+1}` against `M_p(0)^p`.
/// For `p ≥ 2`, `c₁ = 1/(p²(1 + B²))` and `c₂ = 1/(200B(1 + B²))`; for `p ∈ (1, 2)`,
/// `c₁ = 0` and `c₂ = 1/(400B(1 + B²))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry<T> {
    pub p: T,
    pub b: T,
    pub c1: T,
    pub c2: T,
    pub start: T,
    pub current: T,
    pub dissipation: T,
    pub nonlinear: T,
    rates: (T, T),
}

impl<T: Real> LedgerEntry<T> {
    /// `M_p(0)^p − [M_p(t)^p + c₁·dissipation + c₂·nonlinear]`.
    pub fn slack(&self) -> T {
        self.start - (self.current + self.c1 * self.dissipation + self.c2 * self.nonlinear)
    }
}

/// Energy ledgers for a list of exponents, owned by a single run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ledger<T> {
    pub t: T,
    pub entries: Vec<LedgerEntry<T>>,
}

/// `(M_p^p, ‖|f''|^{p/2}‖²_{Ḣ^{1/2}}, M_{p+1}^{p+1})`
fn ledger_rates<T: Real>(fpp: &GridFunction<T>, p: T) -> Result<(T, T, T)> {
    let half = fpp.map(|v| v.abs().powf(p * T::lit(0.5)));
    Ok((
        fpp.lp_norm_pow(p)?,
        half.hhalf_seminorm_sq(),
        fpp.lp_norm_pow(p + T::one())?,
    ))
}

impl<T: Real> Ledger<T> {
    /// Ledger at `t = 0` with the slope bound `B` taken from `f` itself.
    pub fn new(f: &GridFunction<T>, exponents: &[T]) -> Result<Self> {
        let b = f.derivative(1)?.sup_norm();
        Self::with_slope(f, exponents, b)
    }

    pub fn with_slope(f: &GridFunction<T>, exponents: &[T], b: T) -> Result<Self> {
        let fpp = f.derivative(2)?;
        let one = T::one();
        let weight = one + b * b;
        let entries = exponents
            .iter()
            .map(|&p| {
                if !(p > one) || !p.is_finite() {
                    return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
                }
                let (c1, c2) = if p >= T::lit(2.0) {
                    ((p * p * weight).recip(), T::lit(200.0) * b * weight)
                } else {
                    (T::zero(), T::lit(400.0) * b * weight)
                };
                let c2 = if b > T::zero() { c2.recip() } else { T::zero() };
                let (mp, diss, nl) = ledger_rates(&fpp, p)?;
                Ok(LedgerEntry {
                    p,
                    b,
                    c1,
                    c2,
                    start: mp,
                    current: mp,
                    dissipation: T::zero(),
                    nonlinear: T::zero(),
                    rates: (diss, nl),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { t: T::zero(), entries })
    }

    pub fn entry(&self, p: T) -> Option<&LedgerEntry<T>> {
        self.entries.iter().find(|e| e.p == p)
    }
}

/// Advance the ledger to the state `f` reached after a step of length `dt` (trapezoid rule).
pub fn ledger_update<T: Real>(ledger: &mut Ledger<T>, f: &GridFunction<T>, dt: T) -> Result<()> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let fpp = f.derivative(2)?;
    let half = T::lit(0.5) * dt;
    for e in &mut ledger.entries {
        let (mp, diss, nl) = ledger_rates(&fpp, e.p)?;
        e.dissipation = e.dissipation + half * (e.rates.0 + diss);
        e.nonlinear = e.nonlinear + half * (e.rates.1 + nl);
        e.rates = (diss, nl);
        e.current = mp;
    }
    ledger.t = ledger.t + dt;
    Ok(())
}

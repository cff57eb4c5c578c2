//! Principal-value quadrature for the α-integrals of the equation.
//!
//! Every operator here is an integral over `α ∈ ℝ` of
//! `(n₀ + n₁ α) · K^q` with `K = 1/((δα f)² + α²)`, where `n₀`, `n₁` depend on
//! differences `δα u = u(x) − u(x − α)` of a few sampled fields. The integral is
//! discretised by the midpoint rule on the staggered nodes `±(m + ½) h_α`; each `±`
//! pair is summed before accumulation, which is what makes the principal value finite.
//!
//! Off-grid samples `u(x − α)` come from exact trigonometric interpolation, realised
//! as circulant convolutions with fractional-shift kernels so that every operator
//! commutes bit-exactly with circular shifts of its inputs.
//!
//! Nodes beyond the truncation radius `A` are handled by [`TailModel`]: with
//! [`TailModel::Asymptotic`] (the default) the midpoint rule is continued to infinity in
//! closed form, using periodicity of the sampled fields and Hurwitz-zeta sums over
//! periods; [`TailModel::None`] simply drops them.

mod engine;
mod integrands;
mod remainder;

pub use engine::Prepared;
pub use remainder::{muskat_rhs_at, remainders, remainders_at, removable_limit, Linear, Profile, Remainders};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::grid::{Grid, GridFunction};
use crate::special::{digamma, hurwitz_zeta};
use crate::{Error, Real, Result};

use integrands::*;

/// Treatment of α-nodes beyond the truncation radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TailModel {
    /// Closed-form continuation of the midpoint sum to `|α| → ∞`.
    #[default]
    Asymptotic,
    /// Plain truncation at `|α| < A`.
    None,
}

/// User-facing quadrature parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureConfig<T> {
    /// `h_α`; defaults to the grid spacing.
    pub alpha_spacing: Option<T>,
    /// `A`; defaults to `8L`.
    pub truncation_radius: Option<T>,
    pub tail: TailModel,
    /// Split the node loop across the rayon pool. Results are bitwise identical either way.
    pub parallel: bool,
}

impl<T> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            alpha_spacing: None,
            truncation_radius: None,
            tail: TailModel::Asymptotic,
            parallel: true,
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn with_truncation(mut self, a: T) -> Self {
        self.truncation_radius = Some(a);
        self
    }

    pub fn with_spacing(mut self, h: T) -> Self {
        self.alpha_spacing = Some(h);
        self
    }

    pub fn with_tail(mut self, tail: TailModel) -> Self {
        self.tail = tail;
        self
    }

    pub fn sequential(mut self) -> Self {
        self.parallel = false;
        self
    }
}

/// Where a node samples a field: `u(x_j − s) = shifted[slot][j + base]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tap {
    pub slot: usize,
    pub base: usize,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct AlphaNode<T> {
    pub alpha: T,
    pub plus: Tap,
    pub minus: Tap,
}

const MAX_ZETA_ORDER: usize = 192;
const REFINEMENT: usize = 8;

/// A quadrature plan bound to one grid.
#[derive(Clone)]
pub struct Quadrature<T: Real> {
    grid: Grid<T>,
    spacing: T,
    radius: T,
    tail: TailModel,
    parallel: bool,
    nodes: Vec<AlphaNode<T>>,
    /// Fractional shifts `φ` (in units of `h`) with their interpolation kernels; slot 0 is `φ = 0`.
    fractions: Vec<T>,
    kernels: Vec<Vec<T>>,
    /// Nodes per period, the `β` nodes of the asymptotic tail.
    period_nodes: usize,
    zeta: Vec<OnceLock<Vec<T>>>,
    refined: OnceLock<Box<Quadrature<T>>>,
}

impl<T: Real> std::fmt::Debug for Quadrature<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Quadrature")
            .field("grid", &self.grid)
            .field("alpha_spacing", &self.spacing)
            .field("truncation_radius", &self.radius)
            .field("tail", &self.tail)
            .field("pairs", &self.nodes.len())
            .finish()
    }
}

fn near_integer(x: f64) -> Option<i64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * x.abs().max(1.0)).then_some(r as i64)
}

impl<T: Real> Quadrature<T> {
    pub fn new(grid: &Grid<T>, config: &QuadratureConfig<T>) -> Result<Self> {
        let h = grid.spacing();
        let spacing = config.alpha_spacing.unwrap_or(h);
        let radius = config
            .truncation_radius
            .unwrap_or(T::lit(8.0) * grid.half_length());
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::Config(format!("alpha_spacing must be positive, got {spacing}")));
        }
        if !(radius >= grid.half_length()) || !radius.is_finite() {
            return Err(Error::Config(format!(
                "truncation_radius must be finite and at least L = {}, got {radius}",
                grid.half_length()
            )));
        }
        let period = grid.period();
        let mut period_nodes = 0;
        if config.tail == TailModel::Asymptotic {
            let per_period = (period / spacing).to_f64_lossy();
            let periods = (radius / period).to_f64_lossy();
            match (near_integer(per_period), near_integer(periods)) {
                (Some(k), Some(m)) if k > 0 && m > 0 => period_nodes = k as usize,
                _ => {
                    return Err(Error::Config(format!(
                        "the asymptotic tail needs the period 2L to be a multiple of alpha_spacing \
                         and truncation_radius to be a multiple of 2L (2L = {period}, h_α = {spacing}, A = {radius})"
                    )))
                }
            }
        }

        Ok(Self::build(grid, spacing, radius, config.tail, config.parallel, period_nodes))
    }

    fn build(grid: &Grid<T>, spacing: T, radius: T, tail: TailModel, parallel: bool, period_nodes: usize) -> Self {
        let h = grid.spacing();
        let ratio = (radius / spacing).to_f64_lossy();
        let pairs = match near_integer(ratio) {
            Some(m) => m as usize,
            None => ratio.ceil() as usize,
        };
        let n = grid.len() as i64;
        let step = (spacing / h).to_f64_lossy();
        let mut slots: BTreeMap<i64, usize> = BTreeMap::new();
        let mut fractions = vec![T::zero()];
        slots.insert(0, 0);
        let mut tap = |s_over_h: f64| -> Tap {
            let mut whole = s_over_h.floor();
            let mut frac = s_over_h - whole;
            if frac > 1.0 - 1e-9 {
                whole += 1.0;
                frac = 0.0;
            } else if frac < 1e-9 {
                frac = 0.0;
            }
            let key = (frac * 1e9).round() as i64;
            let slot = *slots.entry(key).or_insert_with(|| {
                fractions.push(T::lit(frac));
                fractions.len() - 1
            });
            Tap {
                slot,
                base: (-(whole as i64)).rem_euclid(n) as usize,
            }
        };
        let nodes: Vec<AlphaNode<T>> = (0..pairs)
            .map(|m| {
                let half = m as f64 + 0.5;
                AlphaNode {
                    alpha: (T::count(m) + T::lit(0.5)) * spacing,
                    plus: tap(half * step),
                    minus: tap(-half * step),
                }
            })
            .collect();

        let kernels = fractions
            .iter()
            .map(|&phi| {
                let s = phi * h;
                let nyq = grid.len() / 2;
                grid.cache().kernel_from_multiplier(|bin| {
                    let theta = grid.wavenumber(bin) * s;
                    if bin == nyq {
                        rustfft::num_complex::Complex::new(theta.cos(), T::zero())
                    } else {
                        rustfft::num_complex::Complex::new(theta.cos(), -theta.sin())
                    }
                })
            })
            .collect();

        Self {
            grid: grid.clone(),
            spacing,
            radius,
            tail,
            parallel,
            nodes,
            fractions,
            kernels,
            period_nodes,
            zeta: (0..=MAX_ZETA_ORDER).map(|_| OnceLock::new()).collect(),
            refined: OnceLock::new(),
        }
    }

    /// The same plan on an α-grid `REFINEMENT` times finer, for integrands that are
    /// only Hölder continuous.
    fn refined(&self) -> &Quadrature<T> {
        self.refined.get_or_init(|| {
            Box::new(Self::build(
                &self.grid,
                self.spacing / T::count(REFINEMENT),
                self.radius,
                self.tail,
                self.parallel,
                self.period_nodes * REFINEMENT,
            ))
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn alpha_spacing(&self) -> T {
        self.spacing
    }

    pub fn truncation_radius(&self) -> T {
        self.radius
    }

    pub fn tail(&self) -> TailModel {
        self.tail
    }

    /// Number of `±` node pairs inside the truncation radius.
    pub fn pair_count(&self) -> usize {
        self.nodes.len()
    }

    /// Positive α-nodes `(m + ½) h_α`.
    pub fn alpha_nodes(&self) -> Vec<T> {
        self.nodes.iter().map(|n| n.alpha).collect()
    }

    /// Distinct fractional offsets (in grid spacings) at which fields are resampled.
    pub fn fractional_offsets(&self) -> &[T] {
        &self.fractions
    }

    /// The same plan with the two members of every `±` pair enumerated in the opposite
    /// order. Results are bitwise identical to the original plan.
    pub fn mirrored(&self) -> Self {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.alpha = -node.alpha;
            std::mem::swap(&mut node.plus, &mut node.minus);
        }
        out.refined = OnceLock::new();
        out
    }

    pub(crate) fn nodes(&self) -> &[AlphaNode<T>] {
        &self.nodes
    }

    pub(crate) fn kernels(&self) -> &[Vec<T>] {
        &self.kernels
    }

    pub(crate) fn period_nodes(&self) -> usize {
        self.period_nodes
    }

    pub(crate) fn is_parallel(&self) -> bool {
        self.parallel
    }

    /// `Σ_{n≥m} (β_k + nP)^{−s}` at every `β` node, with `m = A/P`. For `s = 1` the
    /// divergent sum is replaced by its regularisation `−ψ(m + β/P)/P`.
    pub(crate) fn zeta_table(&self, s: usize) -> Result<&[T]> {
        if s == 0 || s > MAX_ZETA_ORDER {
            return Err(Error::InvalidArgument(format!("tail order {s} outside 1..={MAX_ZETA_ORDER}")));
        }
        Ok(self.zeta[s].get_or_init(|| {
            let period = self.grid.period();
            let m = (self.radius / period).round();
            (0..self.period_nodes)
                .map(|k| {
                    let beta = (T::count(k) + T::lit(0.5)) * self.spacing;
                    let q = m + beta / period;
                    let sf = T::count(s);
                    if s == 1 {
                        -digamma(q) / period
                    } else if s < 8 {
                        period.powf(-sf) * hurwitz_zeta(sf, q)
                    } else {
                        let first = self.radius + beta;
                        let mut acc = crate::summation::Compensated::new();
                        let mut n = 0usize;
                        loop {
                            let term = (first + T::count(n) * period).powf(-sf);
                            acc.add(term);
                            n += 1;
                            if term <= T::epsilon() * T::lit(1e-3) * acc.value() || n > 100_000 {
                                break;
                            }
                        }
                        acc.value()
                    }
                })
                .collect()
        }))
    }

    /// Centre a field and resample it at every fractional offset.
    pub fn prepare(&self, g: &GridFunction<T>) -> Result<Prepared<T>> {
        if g.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "field on {:?}, quadrature on {:?}",
                g.grid(),
                self.grid
            )));
        }
        if let Some(index) = g.first_non_finite() {
            return Err(Error::NonFinite { index });
        }
        Ok(Prepared::new(self, g))
    }

    fn check(&self, g: &GridFunction<T>) -> Result<()> {
        if g.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "field on {:?}, quadrature on {:?}",
                g.grid(),
                self.grid
            )));
        }
        if let Some(index) = g.first_non_finite() {
            return Err(Error::NonFinite { index });
        }
        Ok(())
    }

    fn wrap(&self, values: Vec<T>) -> Result<GridFunction<T>> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GridFunction::from_raw(&self.grid, values))
    }

    /// `∂t f = PV∫ (f'(x) α − δα f) K dα`.
    pub fn muskat_rhs(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check(f)?;
        let fp = f.derivative(1)?;
        let pf = self.prepare(f)?;
        self.rhs_prepared(&pf, &fp)
    }

    pub(crate) fn rhs_prepared(&self, pf: &Prepared<T>, fp: &GridFunction<T>) -> Result<GridFunction<T>> {
        let out = engine::integrate(self, [pf], &Rhs { fp: fp.values() }, false, 0)?;
        self.wrap(out.sums)
    }

    /// Half the innermost pair value of the right-hand-side integrand at every node;
    /// tends to [`removable_limit`] as `h_α → 0`.
    pub fn innermost_rhs_samples(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check(f)?;
        let fp = f.derivative(1)?;
        let pf = self.prepare(f)?;
        let out = engine::integrate(self, [&pf], &Rhs { fp: fp.values() }, true, 0)?;
        let head = out.head.expect("head values requested");
        self.wrap(head.iter().map(|h| h[0] / T::lit(2.0)).collect())
    }

    /// `v = −PV∫ α K dα`.
    pub fn velocity(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        let pf = self.prepare(f)?;
        let out = engine::integrate(self, [&pf], &Velocity, false, 0)?;
        self.wrap(out.sums)
    }

    /// `ℒ_f[g] = PV∫ δα g K dα`.
    pub fn apply_lf(&self, f: &GridFunction<T>, g: &GridFunction<T>) -> Result<GridFunction<T>> {
        f.check_same_grid(g)?;
        let (pf, pg) = (self.prepare(f)?, self.prepare(g)?);
        self.lf_prepared(&pf, &pg)
    }

    pub(crate) fn lf_prepared(&self, pf: &Prepared<T>, pg: &Prepared<T>) -> Result<GridFunction<T>> {
        let out = engine::integrate(self, [pf, pg], &Linear1, false, 0)?;
        self.wrap(out.sums)
    }

    /// `𝒟_f[g] = ∫ (δα g)² K dα`.
    pub fn apply_df(&self, f: &GridFunction<T>, g: &GridFunction<T>) -> Result<GridFunction<T>> {
        f.check_same_grid(g)?;
        let (pf, pg) = (self.prepare(f)?, self.prepare(g)?);
        let out = engine::integrate(self, [&pf, &pg], &Quadratic1, false, 0)?;
        self.wrap(out.sums)
    }

    /// `𝒟ᵖ_f[g] = ∫ |δα g|^p K dα` for `1 < p < 2`.
    ///
    /// The paired integrand behaves like `|α|^{p−2}` at the origin and has `|·|^p` kinks
    /// where `δα g` changes sign, so it is summed on a finer α-grid. The midpoint sum is
    /// corrected at the origin by the leading terms of the generalised Euler–Maclaurin
    /// expansion, with coefficients fitted from the three innermost pairs.
    pub fn apply_dp(&self, f: &GridFunction<T>, g: &GridFunction<T>, p: T) -> Result<GridFunction<T>> {
        if !(p > T::one() && p < T::lit(2.0)) {
            return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
        }
        f.check_same_grid(g)?;
        let integrand = PowerP { p };
        let fine = self.refined();
        let (ff, fg) = (fine.prepare(f)?, fine.prepare(g)?);
        let inner = engine::integrate(fine, [&ff, &fg], &integrand, true, 0)?;
        let head = inner.head.expect("head values requested");
        // Near the origin δα g ≈ g'α − g''α²/2, so the pair integrand is |α|^{p−2} times an
        // even series when g' ≠ 0 and |α|^{2p−2} times one where g' vanishes.
        let regular = EndpointModel::new(fine, p - T::lit(2.0));
        let degenerate = EndpointModel::new(fine, T::lit(2.0) * p - T::lit(2.0));
        let gp = g.derivative(1)?;
        let gpp = g.derivative(2)?;
        let reach = T::lit(4.0) * fine.nodes[2].alpha;
        let values = (0..f.len())
            .map(|j| {
                let model = if (T::lit(2.0) * gp.values()[j]).abs() >= reach * gpp.values()[j].abs() {
                    &regular
                } else {
                    &degenerate
                };
                inner.sums[j] - model.correction(&head[j])
            })
            .collect();
        self.wrap(values)
    }

    /// `∂t f' = −v ∂x f' − ℒ_f[f'] + 2∫(δα f − α f') δα f δα f' K² dα`.
    pub fn fprime_rhs(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        self.check(f)?;
        let fp = f.derivative(1)?;
        let fpp = f.derivative(2)?;
        let (pf, pfp) = (self.prepare(f)?, self.prepare(&fp)?);
        let v = engine::integrate(self, [&pf], &Velocity, false, 0)?.sums;
        let l = self.lf_prepared(&pf, &pfp)?;
        let quad = engine::integrate(self, [&pf, &pfp], &FprimeQuadratic { fp: fp.values() }, false, 0)?.sums;
        let values = (0..f.len())
            .map(|j| -v[j] * fpp.values()[j] - l.values()[j] + quad[j])
            .collect();
        self.wrap(values)
    }

    /// The terms `T₁ … T₅` of the equation for `f''`.
    pub fn t_terms(&self, f: &GridFunction<T>) -> Result<TTerms<T>> {
        self.check(f)?;
        let fp = f.derivative(1)?;
        let fpp = f.derivative(2)?;
        let (pf, pfp, pfpp) = (self.prepare(f)?, self.prepare(&fp)?, self.prepare(&fpp)?);
        let fields = [&pf, &pfp, &pfpp];
        let t = TermCoefficients {
            fp: fp.values(),
            fpp: fpp.values(),
        };
        let run = |which: TermKind| -> Result<GridFunction<T>> {
            let out = match which {
                TermKind::T4 => engine::integrate(self, fields, &CubicTerm(t), false, 0)?,
                _ => engine::integrate(self, fields, &SquareTerm { t, which }, false, 0)?,
            };
            self.wrap(out.sums)
        };
        Ok(TTerms {
            t1: run(TermKind::T1)?,
            t2: run(TermKind::T2)?,
            t3: run(TermKind::T3)?,
            t4: run(TermKind::T4)?,
            t5: run(TermKind::T5)?,
        })
    }

    /// `−v f''' − ℒ_f[f''] + T₁ + T₂ + T₃ + T₄`, the right side of the `f''` equation.
    pub fn fpp_rhs(&self, f: &GridFunction<T>) -> Result<GridFunction<T>> {
        let t = self.t_terms(f)?;
        let fpp = f.derivative(2)?;
        let fppp = f.derivative(3)?;
        let v = self.velocity(f)?;
        let l = self.apply_lf(f, &fpp)?;
        let values = (0..f.len())
            .map(|j| {
                -v.values()[j] * fppp.values()[j] - l.values()[j]
                    + t.t1.values()[j]
                    + t.t2.values()[j]
                    + t.t3.values()[j]
                    + t.t4.values()[j]
            })
            .collect();
        self.wrap(values)
    }
}

/// Midpoint-rule error of `α^γ (Φ₀ + Φ₂ α² + Φ₄ α⁴)` on `(0, ∞)`:
/// `Σ_k Φ_{2k} ζ(−γ−2k, ½) h^{γ+2k+1}`.
struct EndpointModel<T> {
    gamma: T,
    alpha: [T; 3],
    coeff: [T; 3],
}

impl<T: Real> EndpointModel<T> {
    fn new(plan: &Quadrature<T>, gamma: T) -> Self {
        let h = plan.spacing;
        let half = T::lit(0.5);
        Self {
            gamma,
            alpha: std::array::from_fn(|m| plan.nodes[m].alpha),
            coeff: std::array::from_fn(|k| {
                hurwitz_zeta(-gamma - T::count(2 * k), half) * h.powf(gamma + T::count(2 * k + 1))
            }),
        }
    }

    fn correction(&self, head: &[T; 3]) -> T {
        let u: [T; 3] = std::array::from_fn(|m| head[m] * self.alpha[m].powf(-self.gamma));
        let phi = fit_even_quadratic(&self.alpha, &u);
        phi[0] * self.coeff[0] + phi[1] * self.coeff[1] + phi[2] * self.coeff[2]
    }
}

/// Coefficients `(Φ₀, Φ₂, Φ₄)` of `u(α) = Φ₀ + Φ₂ α² + Φ₄ α⁴` through three points.
fn fit_even_quadratic<T: Real>(alpha: &[T], u: &[T]) -> [T; 3] {
    let x: Vec<T> = alpha.iter().map(|a| *a * *a).collect();
    let d01 = (u[1] - u[0]) / (x[1] - x[0]);
    let d12 = (u[2] - u[1]) / (x[2] - x[1]);
    let d012 = (d12 - d01) / (x[2] - x[0]);
    // Newton form u0 + d01 (x − x0) + d012 (x − x0)(x − x1)
    let c2 = d012;
    let c1 = d01 - d012 * (x[0] + x[1]);
    let c0 = u[0] - d01 * x[0] + d012 * x[0] * x[1];
    [c0, c1, c2]
}

/// The five nonlocal terms of the `f''` equation; `T₅ = ∂x v`.
#[derive(Clone, Debug, PartialEq)]
pub struct TTerms<T: Real> {
    pub t1: GridFunction<T>,
    pub t2: GridFunction<T>,
    pub t3: GridFunction<T>,
    pub t4: GridFunction<T>,
    pub t5: GridFunction<T>,
}

impl<T: Real> TTerms<T> {
    pub fn as_array(&self) -> [&GridFunction<T>; 5] {
        [&self.t1, &self.t2, &self.t3, &self.t4, &self.t5]
    }
}

//! Periodic spatial discretization.
//!
//! The interface lives on the torus `[−L, L)`; every `∫ dx` is a one-period integral.
//! Spectral operators are applied as circulant convolutions with precomputed kernels,
//! summed in a fixed offset order, so they commute bit-exactly with circular shifts of
//! the input.

mod csv;
mod sample;
mod spectral;

pub use self::csv::{read_csv, write_csv};
pub use sample::{InitialData, SineMode};
pub use spectral::{Spectrum, SpectralOp};
pub(crate) use spectral::circulant;

use std::fmt;
use std::sync::Arc;

use crate::summation::{invariant_mean, Compensated};
use crate::{Error, Real, Result};

/// Uniform periodic grid on `[−L, L)` with `N` nodes.
#[derive(Clone)]
pub struct Grid<T: Real> {
    half_length: T,
    n: usize,
    spacing: T,
    spectral: Arc<spectral::SpectralCache<T>>,
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("half_length", &self.half_length)
            .field("n", &self.n)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length
    }
}

impl<T: Real> Grid<T> {
    /// `N` must be a power of two no smaller than 8 and `L` positive and finite.
    pub fn new(half_length: T, n: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Config(format!(
                "node count must be a power of two >= 8, got {n}"
            )));
        }
        if !(half_length > T::zero()) || !half_length.is_finite() {
            return Err(Error::Config(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        let spacing = (half_length + half_length) / T::count(n);
        Ok(Self {
            half_length,
            n,
            spacing,
            spectral: Arc::new(spectral::SpectralCache::new(n)),
        })
    }

    pub fn half_length(&self) -> T {
        self.half_length
    }

    /// Length of one period, `2L`.
    pub fn period(&self) -> T {
        self.half_length + self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// `x_j = −L + j h`.
    pub fn node(&self, j: usize) -> T {
        -self.half_length + T::count(j) * self.spacing
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Wavenumber `π k / L` of FFT bin `k`; the Nyquist bin reports `+π N / (2L)`.
    pub fn wavenumber(&self, bin: usize) -> T {
        let signed = if bin <= self.n / 2 {
            T::count(bin)
        } else {
            -T::count(self.n - bin)
        };
        signed * T::PI() / self.half_length
    }

    pub(crate) fn cache(&self) -> &spectral::SpectralCache<T> {
        &self.spectral
    }

    pub fn zeros(&self) -> GridFunction<T> {
        GridFunction {
            grid: self.clone(),
            values: vec![T::zero(); self.n],
        }
    }

    /// Grid function from a closure evaluated at the nodes.
    pub fn from_fn(&self, f: impl Fn(T) -> T) -> GridFunction<T> {
        GridFunction {
            grid: self.clone(),
            values: self.nodes().into_iter().map(f).collect(),
        }
    }
}

/// Samples of a periodic function at the nodes of a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Real> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    pub fn new(grid: &Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Skips the finiteness check; the evolution uses it to detect blow-up itself.
    pub(crate) fn from_raw(grid: &Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self::from_raw(&self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self::from_raw(
            &self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn first_non_finite(&self) -> Option<usize> {
        self.values.iter().position(|v| !v.is_finite())
    }

    /// Mean over the period, independent of the ordering of the samples.
    pub fn mean(&self) -> T {
        invariant_mean(&self.values)
    }

    /// `h Σ_j g_j`.
    pub fn integral(&self) -> T {
        self.values.iter().copied().collect::<Compensated<T>>().value() * self.grid.spacing
    }

    /// Circular shift: output node `j` holds input node `j − shift`.
    pub fn shifted(&self, shift: isize) -> Self {
        let n = self.len() as isize;
        let s = shift.rem_euclid(n) as usize;
        let mut values = self.values.clone();
        values.rotate_right(s);
        Self::from_raw(&self.grid, values)
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// `(h Σ |g_j|^p)^{1/p}` for finite `p > 1`, `max |g_j|` for `p = ∞`.
    pub fn lp_norm(&self, p: T) -> Result<T> {
        if p.is_infinite() && p > T::zero() {
            return Ok(self.sup_norm());
        }
        if !(p > T::one()) || p.is_nan() {
            return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
        }
        Ok(self.lp_norm_pow(p)?.powf(p.recip()))
    }

    /// `h Σ |g_j|^p`, the `p`-th power of [`lp_norm`](Self::lp_norm).
    pub fn lp_norm_pow(&self, p: T) -> Result<T> {
        if !(p > T::zero()) || !p.is_finite() {
            return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
        }
        Ok(self
            .values
            .iter()
            .map(|v| v.abs().powf(p))
            .collect::<Compensated<T>>()
            .value()
            * self.grid.spacing)
    }

    /// Spectral derivative of order 1 to 4; odd orders drop the Nyquist mode.
    pub fn derivative(&self, order: usize) -> Result<Self> {
        let op = match order {
            1 => SpectralOp::Derivative1,
            2 => SpectralOp::Derivative2,
            3 => SpectralOp::Derivative3,
            4 => SpectralOp::Derivative4,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "derivative order must be 1..=4, got {order}"
                )))
            }
        };
        Ok(self.apply(op))
    }

    /// `Λg`, the Fourier multiplier `π|κ|`.
    pub fn lambda(&self) -> Self {
        self.apply(SpectralOp::Lambda)
    }

    /// Hilbert transform with multiplier `−iπ sign κ`, so that `Λ = H ∂x`.
    pub fn hilbert(&self) -> Self {
        self.apply(SpectralOp::Hilbert)
    }

    /// `‖g‖_{Ḣ^{1/2}}`, normalised so that its square equals `∫ 𝒟[g] dx`.
    pub fn hhalf_seminorm(&self) -> T {
        self.hhalf_seminorm_sq().sqrt()
    }

    pub fn hhalf_seminorm_sq(&self) -> T {
        let spec = Spectrum::of(self);
        let mut acc = Compensated::new();
        for (bin, c) in spec.coefficients().iter().enumerate() {
            acc.add(self.grid.wavenumber(bin).abs() * c.norm_sqr());
        }
        acc.value() * hhalf_fourier_constant::<T>() * self.grid.period()
    }

    /// Apply a zero-mean spectral operator by circulant convolution.
    pub fn apply(&self, op: SpectralOp) -> Self {
        let kernel = self.grid.cache().kernel(&self.grid, op);
        let centred = self.centred();
        Self::from_raw(&self.grid, spectral::circulant(&kernel, &centred))
    }

    /// Samples with the mean removed; a constant maps to exact zeros.
    pub fn centred(&self) -> Vec<T> {
        let m = self.mean();
        self.values.iter().map(|&v| v - m).collect()
    }

    /// Trigonometric interpolant evaluated at an arbitrary point.
    pub fn interpolate(&self, x: T) -> T {
        Spectrum::of(self).evaluate(&self.grid, x)
    }
}

/// Fourier constant of the `Ḣ^{1/2}` seminorm.
///
/// `∫|1 − e^{−iκα}|² α^{−2} dα = 2π|κ|`, hence `∫𝒟[g]dx = 2L · 2π Σ_k |κ_k| |ĝ_k|²`.
pub fn hhalf_fourier_constant<T: Real>() -> T {
    T::TAU()
}

/// Norm snapshot of an interface profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Metrics<T> {
    /// `‖f‖_∞`
    pub sup_f: T,
    /// `‖f'‖_∞`
    pub slope_b: T,
    /// `(p, ‖f''‖_{L^p})`, with `p = ∞` allowed.
    pub curvature: Vec<(T, T)>,
    /// `‖f''‖_{Ḣ^{1/2}}`
    pub hhalf: T,
}

impl<T: Real> Metrics<T> {
    pub fn curvature_norm(&self, p: T) -> Option<T> {
        self.curvature
            .iter()
            .find(|(q, _)| *q == p)
            .map(|&(_, v)| v)
    }

    pub fn m_inf(&self) -> T {
        self.curvature_norm(T::infinity()).unwrap_or_else(T::nan)
    }
}

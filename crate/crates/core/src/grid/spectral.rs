use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{Grid, GridFunction};
use crate::summation::Compensated;
use crate::Real;

/// Zero-mean Fourier multipliers available as circulant kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpectralOp {
    Derivative1,
    Derivative2,
    Derivative3,
    Derivative4,
    Lambda,
    Hilbert,
}

impl SpectralOp {
    const ALL: [SpectralOp; 6] = [
        SpectralOp::Derivative1,
        SpectralOp::Derivative2,
        SpectralOp::Derivative3,
        SpectralOp::Derivative4,
        SpectralOp::Lambda,
        SpectralOp::Hilbert,
    ];

    fn slot(self) -> usize {
        Self::ALL.iter().position(|&o| o == self).unwrap()
    }

    fn multiplier<T: Real>(self, kappa: T, nyquist: bool) -> Complex<T> {
        let zero = T::zero();
        let odd_nyquist = |c: Complex<T>| if nyquist { Complex::new(zero, zero) } else { c };
        match self {
            SpectralOp::Derivative1 => odd_nyquist(Complex::new(zero, kappa)),
            SpectralOp::Derivative2 => Complex::new(-kappa * kappa, zero),
            SpectralOp::Derivative3 => odd_nyquist(Complex::new(zero, -kappa * kappa * kappa)),
            SpectralOp::Derivative4 => Complex::new(kappa.powi(4), zero),
            SpectralOp::Lambda => Complex::new(T::PI() * kappa.abs(), zero),
            SpectralOp::Hilbert => odd_nyquist(Complex::new(zero, -T::PI() * kappa.signum())),
        }
    }
}

pub(crate) struct SpectralCache<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    kernels: [OnceLock<Arc<Vec<T>>>; 6],
}

impl<T: Real> SpectralCache<T> {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            kernels: Default::default(),
        }
    }

    pub(crate) fn kernel(&self, grid: &Grid<T>, op: SpectralOp) -> Arc<Vec<T>> {
        self.kernels[op.slot()]
            .get_or_init(|| {
                let nyq = self.n / 2;
                Arc::new(self.kernel_from_multiplier(|bin| {
                    if bin == 0 {
                        Complex::new(T::zero(), T::zero())
                    } else {
                        op.multiplier(grid.wavenumber(bin), bin == nyq)
                    }
                }))
            })
            .clone()
    }

    /// Real circulant kernel `w_d = N⁻¹ Σ_k m_k e^{2πikd/N}` of a Hermitian multiplier.
    pub(crate) fn kernel_from_multiplier(&self, m: impl Fn(usize) -> Complex<T>) -> Vec<T> {
        let mut buf: Vec<Complex<T>> = (0..self.n).map(m).collect();
        self.inverse.process(&mut buf);
        let scale = T::count(self.n).recip();
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    pub(crate) fn forward(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut buf: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward.process(&mut buf);
        let scale = T::count(self.n).recip();
        buf.iter_mut().for_each(|c| *c = *c * scale);
        buf
    }
}

/// Circulant product `out_j = Σ_d w_d g_{(j−d) mod N}`.
///
/// The offset loop is outermost and each output keeps its own compensated
/// accumulator, so the result at node `j` depends only on relative indices.
pub(crate) fn circulant<T: Real>(kernel: &[T], g: &[T]) -> Vec<T> {
    let n = g.len();
    debug_assert_eq!(kernel.len(), n);
    let doubled: Vec<T> = g.iter().chain(g.iter()).copied().collect();
    let mut acc = vec![Compensated::new(); n];
    for (d, &w) in kernel.iter().enumerate() {
        let src = &doubled[n - d..2 * n - d];
        for (a, &v) in acc.iter_mut().zip(src) {
            a.add(w * v);
        }
    }
    acc.into_iter().map(|a| a.value()).collect()
}

/// Normalised discrete Fourier coefficients `c_k = N⁻¹ Σ_j g_j e^{−2πijk/N}`.
#[derive(Clone, Debug)]
pub struct Spectrum<T: Real> {
    coefficients: Vec<Complex<T>>,
}

impl<T: Real> Spectrum<T> {
    pub fn of(g: &GridFunction<T>) -> Self {
        Self {
            coefficients: g.grid().cache().forward(g.values()),
        }
    }

    pub fn coefficients(&self) -> &[Complex<T>] {
        &self.coefficients
    }

    /// Trigonometric interpolant at `x`; the Nyquist mode is taken as a cosine.
    pub fn evaluate(&self, grid: &Grid<T>, x: T) -> T {
        let n = self.coefficients.len();
        let phase = x + grid.half_length();
        let mut acc = Compensated::new();
        for (bin, c) in self.coefficients.iter().enumerate() {
            let theta = grid.wavenumber(bin) * phase;
            if bin == n / 2 {
                acc.add(c.re * theta.cos());
            } else {
                acc.add(c.re * theta.cos() - c.im * theta.sin());
            }
        }
        acc.value()
    }

    /// Largest coefficient magnitude at `|k| ≥ N/4` relative to the largest non-constant
    /// coefficient; zero for a constant.
    pub fn tail_ratio(&self) -> T {
        let n = self.coefficients.len();
        let mut peak = T::zero();
        let mut tail = T::zero();
        for (bin, c) in self.coefficients.iter().enumerate().skip(1) {
            let k = bin.min(n - bin);
            let a = c.norm();
            peak = peak.max(a);
            if k >= n / 4 {
                tail = tail.max(a);
            }
        }
        if peak == T::zero() {
            T::zero()
        } else {
            tail / peak
        }
    }
}

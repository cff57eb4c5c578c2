//! Numerical laboratory for the one-dimensional Muskat interface equation
//!
//! ```text
//! ∂t f(x) = PV ∫ (f'(x) α − δα f(x)) / ((δα f(x))² + α²) dα,   δα f(x) = f(x) − f(x − α)
//! ```
//!
//! posed here on the torus `[−L, L)`. The crate is organised bottom-up:
//!
//! * [`grid`]: periodic sampling, spectral derivatives, norms and the Fourier-side
//!   operators `Λ`, `H` and the `Ḣ^{1/2}` seminorm.
//! * [`nonlocal`]: the staggered symmetric-pair principal-value quadrature and every
//!   α-integral built on it (right-hand side, velocity, `ℒ_f`, `𝒟_f`, `𝒟ᵖ_f`, the
//!   T-terms and the Taylor remainders).
//! * [`bounds`]: closed-form and root-finding evaluators for the nonlinear lower bounds.
//! * [`evolve`]: SSP-RK3 time integration, event detection and the twin-trajectory probe.
//! * [`diagnostics`]: metrics, modulus estimation, inequality checks and energy ledgers.
//!
//! All numerics are generic over [`Real`] (`f32`/`f64`); the `*64` aliases at the crate
//! root fix the scalar to `f64`, which is what the CLI and the acceptance suite use.

pub mod bounds;
pub mod diagnostics;
mod error;
pub mod evolve;
pub mod grid;
pub mod nonlocal;
pub mod special;
pub mod summation;

pub use error::{Error, Result};

use std::fmt::{Debug, Display, LowerExp};

/// Scalar type the crate is generic over.
pub trait Real:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::Signed
    + rustfft::FftNum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion from a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type Grid64 = grid::Grid<f64>;
pub type GridFunction64 = grid::GridFunction<f64>;
pub type Metrics64 = grid::Metrics<f64>;
pub type InitialData64 = grid::InitialData<f64>;
pub type QuadratureConfig64 = nonlocal::QuadratureConfig<f64>;
pub type Quadrature64 = nonlocal::Quadrature<f64>;
pub type TTerms64 = nonlocal::TTerms<f64>;
pub type Modulus64 = bounds::Modulus<f64>;
pub type SimConfig64 = evolve::SimConfig<f64>;
pub type SimState64 = evolve::SimState<f64>;
pub type Ledger64 = diagnostics::Ledger<f64>;

pub type Grid32 = grid::Grid<f32>;
pub type GridFunction32 = grid::GridFunction<f32>;
pub type Quadrature32 = nonlocal::Quadrature<f32>;

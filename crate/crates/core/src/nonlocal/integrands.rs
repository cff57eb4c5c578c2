//! Numerators `n₀ + n₁ α` of the integrands `(n₀ + n₁ α) K^q`.
//!
//! `d[0]` is always `δα f`; further entries are the differences of the other prepared
//! fields in the order they are passed to the engine.

use crate::Real;

pub(crate) trait Integrand<T: Real, const F: usize>: Sync {
    const POWER: usize;
    fn coefficients(&self, j: usize, d: &[T; F]) -> (T, T);
}

pub(crate) struct Rhs<'a, T> {
    pub fp: &'a [T],
}

impl<T: Real> Integrand<T, 1> for Rhs<'_, T> {
    const POWER: usize = 1;
    #[inline(always)]
    fn coefficients(&self, j: usize, d: &[T; 1]) -> (T, T) {
        (-d[0], self.fp[j])
    }
}

pub(crate) struct Velocity;

impl<T: Real> Integrand<T, 1> for Velocity {
    const POWER: usize = 1;
    #[inline(always)]
    fn coefficients(&self, _: usize, _: &[T; 1]) -> (T, T) {
        (T::zero(), -T::one())
    }
}

/// `δg K`
pub(crate) struct Linear1;

impl<T: Real> Integrand<T, 2> for Linear1 {
    const POWER: usize = 1;
    #[inline(always)]
    fn coefficients(&self, _: usize, d: &[T; 2]) -> (T, T) {
        (d[1], T::zero())
    }
}

/// `(δg)² K`
pub(crate) struct Quadratic1;

impl<T: Real> Integrand<T, 2> for Quadratic1 {
    const POWER: usize = 1;
    #[inline(always)]
    fn coefficients(&self, _: usize, d: &[T; 2]) -> (T, T) {
        (d[1] * d[1], T::zero())
    }
}

/// `|δg|^p K`
pub(crate) struct PowerP<T> {
    pub p: T,
}

impl<T: Real> Integrand<T, 2> for PowerP<T> {
    const POWER: usize = 1;
    #[inline(always)]
    fn coefficients(&self, _: usize, d: &[T; 2]) -> (T, T) {
        (d[1].abs().powf(self.p), T::zero())
    }
}

/// `2 (δf − α f') δf δf' K²`
pub(crate) struct FprimeQuadratic<'a, T> {
    pub fp: &'a [T],
}

impl<T: Real> Integrand<T, 2> for FprimeQuadratic<'_, T> {
    const POWER: usize = 2;
    #[inline(always)]
    fn coefficients(&self, j: usize, d: &[T; 2]) -> (T, T) {
        let two = T::lit(2.0);
        let w = two * d[0] * d[1];
        (w * d[0], -w * self.fp[j])
    }
}

#[derive(Clone, Copy)]
pub(crate) struct TermCoefficients<'a, T> {
    pub fp: &'a [T],
    pub fpp: &'a [T],
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum TermKind {
    T1,
    T2,
    T3,
    T4,
    T5,
}

/// The `K²` terms of the `f''` equation; fields are `f, f', f''`.
pub(crate) struct SquareTerm<'a, T> {
    pub t: TermCoefficients<'a, T>,
    pub which: TermKind,
}

impl<T: Real> Integrand<T, 3> for SquareTerm<'_, T> {
    const POWER: usize = 2;
    #[inline(always)]
    fn coefficients(&self, j: usize, d: &[T; 3]) -> (T, T) {
        let (df, dfp, dfpp) = (d[0], d[1], d[2]);
        let (fp, fpp) = (self.t.fp[j], self.t.fpp[j]);
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        match self.which {
            // 4 (δf' − α f'') δf δf'
            TermKind::T1 => (four * df * dfp * dfp, -four * fpp * df * dfp),
            // 2 (δf − α f') (δf')²
            TermKind::T2 => (two * df * dfp * dfp, -two * fp * dfp * dfp),
            // 2 (δf − α f') δf δf''
            TermKind::T3 => (two * df * df * dfpp, -two * fp * df * dfpp),
            // 2 α δf δf'
            TermKind::T5 => (T::zero(), two * df * dfp),
            TermKind::T4 => unreachable!("T4 carries K³"),
        }
    }
}

/// `−8 (δf − α f') (δf)² (δf')² K³`
pub(crate) struct CubicTerm<'a, T>(pub TermCoefficients<'a, T>);

impl<T: Real> Integrand<T, 3> for CubicTerm<'_, T> {
    const POWER: usize = 3;
    #[inline(always)]
    fn coefficients(&self, j: usize, d: &[T; 3]) -> (T, T) {
        let (df, dfp) = (d[0], d[1]);
        let w = T::lit(8.0) * df * df * dfp * dfp;
        (-w * df, w * self.0.fp[j])
    }
}

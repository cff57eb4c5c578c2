//! Taylor remainders and the continuous-profile evaluation path.

use crate::grid::{GridFunction, Spectrum};
use crate::summation::Compensated;
use crate::{Error, Real, Result};

/// `ℛ₁ = Δα f'(x) − f''(x)` and `ℛ₂ = Δα f(x) − f'(x) + (α/2) f''(x)`,
/// with `Δα u = δα u / α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Remainders<T> {
    pub r1: T,
    pub r2: T,
}

/// Remainders of a gridded profile at node `j`; `f(x_j − α)` and `f'(x_j − α)` come
/// from the trigonometric interpolant.
pub fn remainders<T: Real>(f: &GridFunction<T>, j: usize, alpha: T) -> Result<Remainders<T>> {
    if alpha == T::zero() || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("remainders need finite α ≠ 0, got {alpha}")));
    }
    if j >= f.len() {
        return Err(Error::InvalidArgument(format!("node {j} outside grid of {}", f.len())));
    }
    let fp = f.derivative(1)?;
    let fpp = f.derivative(2)?;
    let x = f.grid().node(j);
    let back = Spectrum::of(f).evaluate(f.grid(), x - alpha);
    let back_p = Spectrum::of(&fp).evaluate(f.grid(), x - alpha);
    Ok(assemble(
        f.values()[j] - back,
        fp.values()[j] - back_p,
        fp.values()[j],
        fpp.values()[j],
        alpha,
    ))
}

fn assemble<T: Real>(df: T, dfp: T, fp: T, fpp: T, alpha: T) -> Remainders<T> {
    Remainders {
        r1: dfp / alpha - fpp,
        r2: df / alpha - fp + alpha / T::lit(2.0) * fpp,
    }
}

/// A profile given in closed form on the whole line.
///
/// The differences default to subtracting point values; profiles for which that
/// loses exactness can supply them directly.
pub trait Profile<T: Real> {
    fn value(&self, x: T) -> T;
    fn d1(&self, x: T) -> T;
    fn d2(&self, x: T) -> T;

    /// `δα f(x)`
    fn delta(&self, x: T, alpha: T) -> T {
        self.value(x) - self.value(x - alpha)
    }

    /// `δα f'(x)`
    fn delta_d1(&self, x: T, alpha: T) -> T {
        self.d1(x) - self.d1(x - alpha)
    }
}

/// `f(x) = c x + b`, with exact differences `δα f = c α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linear<T> {
    pub slope: T,
    pub offset: T,
}

impl<T: Real> Profile<T> for Linear<T> {
    fn value(&self, x: T) -> T {
        self.slope * x + self.offset
    }
    fn d1(&self, _: T) -> T {
        self.slope
    }
    fn d2(&self, _: T) -> T {
        T::zero()
    }
    fn delta(&self, _: T, alpha: T) -> T {
        self.slope * alpha
    }
    fn delta_d1(&self, _: T, _: T) -> T {
        T::zero()
    }
}

pub fn remainders_at<T: Real, P: Profile<T> + ?Sized>(f: &P, x: T, alpha: T) -> Result<Remainders<T>> {
    if alpha == T::zero() || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("remainders need finite α ≠ 0, got {alpha}")));
    }
    Ok(assemble(f.delta(x, alpha), f.delta_d1(x, alpha), f.d1(x), f.d2(x), alpha))
}

/// Right-hand side at one point for a profile on the line, by symmetric midpoint
/// pairs `±(m + ½) h_α` with `|α| < A` and no tail correction.
pub fn muskat_rhs_at<T: Real, P: Profile<T> + ?Sized>(f: &P, x: T, alpha_spacing: T, radius: T) -> Result<T> {
    if !(alpha_spacing > T::zero()) || !(radius > alpha_spacing) {
        return Err(Error::Config(format!(
            "need 0 < alpha_spacing < truncation_radius, got {alpha_spacing} and {radius}"
        )));
    }
    let pairs = (radius / alpha_spacing).to_f64_lossy().round() as usize;
    let fp = f.d1(x);
    let mut acc = Compensated::new();
    for m in 0..pairs {
        let a = (T::count(m) + T::lit(0.5)) * alpha_spacing;
        let dp = f.delta(x, a);
        let dm = f.delta(x, -a);
        acc.add((fp * a - dp) / (dp * dp + a * a) + (-fp * a - dm) / (dm * dm + a * a));
    }
    Ok(acc.value() * alpha_spacing)
}

/// `lim_{α→0}` of the pair-averaged right-hand-side integrand, `f''/(2(1 + f'²))`.
pub fn removable_limit<T: Real>(fp: T, fpp: T) -> T {
    fpp / (T::lit(2.0) * (T::one() + fp * fp))
}

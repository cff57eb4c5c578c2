//! Nonlinear lower bounds for `𝒟_f[f'']` and the Taylor-remainder envelopes.
//!
//! Everything here is a closed-form evaluator except [`solve_r`], which finds the
//! radius `r(y)` defined by `r ∫_{r/2}^∞ ρ(α) α⁻³ dα = y/6` by a geometric scan
//! followed by bisection.

use crate::{Error, Real, Result};

/// A bounded, non-decreasing modulus of continuity `ρ` with `ρ(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Modulus<T> {
    /// `K α^β`. Unbounded; accepted for `0 < β < 2` so the tail integral converges.
    Power { k: T, beta: T },
    /// `min(K α^β, M)`.
    CappedPower { k: T, beta: T, cap: T },
    /// Piecewise-linear through `(0, 0)` and the given points, constant past the last one.
    Table { distances: Vec<T>, values: Vec<T> },
}

impl<T: Real> Modulus<T> {
    /// `ρ(α) = √α`.
    pub fn sqrt() -> Self {
        Self::Power {
            k: T::one(),
            beta: T::lit(0.5),
        }
    }

    /// `min(√α, 2B)`, the built-in power modulus capped by the largest possible `|δα f'|`.
    pub fn capped_sqrt(slope_bound: T) -> Self {
        Self::CappedPower {
            k: T::one(),
            beta: T::lit(0.5),
            cap: T::lit(2.0) * slope_bound,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: String| Err(Error::Config(format!("modulus {}: {why}", self.describe())));
        match self {
            Self::Power { k, beta } => {
                if !(*k >= T::zero()) || !(*beta > T::zero() && *beta < T::lit(2.0)) {
                    return bad("needs K >= 0 and 0 < beta < 2".into());
                }
            }
            Self::CappedPower { k, beta, cap } => {
                if !(*k >= T::zero()) || !(*beta > T::zero()) || !(*cap >= T::zero()) || !cap.is_finite() {
                    return bad("needs K >= 0, beta > 0 and a finite cap >= 0".into());
                }
            }
            Self::Table { distances, values } => {
                if distances.is_empty() || distances.len() != values.len() {
                    return bad("needs equally many distances and values, at least one".into());
                }
                if !(distances[0] > T::zero()) || !(values[0] >= T::zero()) {
                    return bad("distances must be positive and values non-negative".into());
                }
                for w in distances.windows(2) {
                    if !(w[1] > w[0]) {
                        return bad("distances must be strictly increasing".into());
                    }
                }
                for w in values.windows(2) {
                    if !(w[1] >= w[0]) {
                        return bad("values must be non-decreasing".into());
                    }
                }
                if values.iter().chain(distances).any(|v| !v.is_finite()) {
                    return bad("entries must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Power { k, beta } => format!("power(K={k}, beta={beta})"),
            Self::CappedPower { k, beta, cap } => format!("capped-power(K={k}, beta={beta}, cap={cap})"),
            Self::Table { distances, .. } => format!("table({} points)", distances.len()),
        }
    }

    pub fn eval(&self, alpha: T) -> T {
        let a = alpha.abs();
        match self {
            Self::Power { k, beta } => *k * a.powf(*beta),
            Self::CappedPower { k, beta, cap } => (*k * a.powf(*beta)).min(*cap),
            Self::Table { distances, values } => {
                let last = distances.len() - 1;
                if a >= distances[last] {
                    return values[last];
                }
                let i = distances.partition_point(|d| *d <= a);
                let (d0, v0) = if i == 0 {
                    (T::zero(), T::zero())
                } else {
                    (distances[i - 1], values[i - 1])
                };
                v0 + (values[i] - v0) * (a - d0) / (distances[i] - d0)
            }
        }
    }

    /// `∫_{r/2}^∞ ρ(α) α⁻³ dα`, in closed form for every family.
    pub fn tail_integral(&self, r: T) -> Result<T> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::InvalidArgument(format!("tail integral needs r > 0, got {r}")));
        }
        self.validate()?;
        let a = r / T::lit(2.0);
        let two = T::lit(2.0);
        Ok(match self {
            Self::Power { k, beta } => *k * a.powf(*beta - two) / (two - *beta),
            Self::CappedPower { k, beta, cap } => {
                if *k == T::zero() || *cap == T::zero() {
                    return Ok(T::zero());
                }
                let cross = (*cap / *k).powf(beta.recip());
                if a >= cross {
                    *cap / (two * a * a)
                } else {
                    let inner = if (*beta - two).abs() < T::epsilon() {
                        *k * (cross / a).ln()
                    } else {
                        *k * (a.powf(*beta - two) - cross.powf(*beta - two)) / (two - *beta)
                    };
                    inner + *cap / (two * cross * cross)
                }
            }
            Self::Table { distances, values } => {
                // ρ = c₀ + s α on each piece: ∫ (c₀ α⁻³ + s α⁻²) = c₀(1/(2u²) − 1/(2w²)) + s(1/u − 1/w)
                let piece = |u: T, w: T, d0: T, v0: T, d1: T, v1: T| {
                    let s = (v1 - v0) / (d1 - d0);
                    let c0 = v0 - s * d0;
                    c0 * ((two * u * u).recip() - (two * w * w).recip()) + s * (u.recip() - w.recip())
                };
                let mut total = T::zero();
                let mut prev = (T::zero(), T::zero());
                for (&d, &v) in distances.iter().zip(values) {
                    if d > a {
                        total = total + piece(a.max(prev.0), d, prev.0, prev.1, d, v);
                    }
                    prev = (d, v);
                }
                total + prev.1 / (two * a.max(prev.0) * a.max(prev.0))
            }
        })
    }
}

fn positive_slope<T: Real>(b: T) -> Result<()> {
    if !(b > T::zero()) || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("slope bound B must be positive, got {b}")));
    }
    Ok(())
}

fn open_unit_exponent<T: Real>(p: T) -> Result<()> {
    if !(p > T::one() && p < T::lit(2.0)) {
        return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
    }
    Ok(())
}

/// `m³ / (24 B (1 + B²))`, a pointwise lower bound for `𝒟_f[f''](x)` with `m = |f''(x)|`.
pub fn cubic_lower_bound<T: Real>(m: T, b: T) -> Result<T> {
    positive_slope(b)?;
    Ok(m.abs().powi(3) / (T::lit(24.0) * b * (T::one() + b * b)))
}

/// `m^{p+1} / (96 B (1 + B²))`, the lower bound for `𝒟ᵖ_f[f''](x)`.
pub fn dp_lower_bound<T: Real>(m: T, b: T, p: T) -> Result<T> {
    positive_slope(b)?;
    open_unit_exponent(p)?;
    Ok(m.abs().powf(p + T::one()) / (T::lit(96.0) * b * (T::one() + b * b)))
}

/// Which dissipation operator an `L^p`-based bound refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    D,
    Dp,
}

/// Lower bounds in terms of `M_p = ‖f''‖_{L^p}`:
/// `m^{2+p}/(8^p M_p^p (1+B²))` for `𝒟` and `m^{2p}/(128 M_p^p (1+B²))` for `𝒟ᵖ`.
pub fn lp_lower_bound<T: Real>(m: T, b: T, p: T, mp: T, variant: Variant) -> Result<T> {
    if !(mp > T::zero()) || !mp.is_finite() {
        return Err(Error::InvalidArgument(format!("M_p must be positive, got {mp}")));
    }
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
    }
    if !(b >= T::zero()) {
        return Err(Error::InvalidArgument(format!("slope bound must be non-negative, got {b}")));
    }
    let m = m.abs();
    let scale = mp.powf(p) * (T::one() + b * b);
    Ok(match variant {
        Variant::D => m.powf(T::lit(2.0) + p) / (T::lit(8.0).powf(p) * scale),
        Variant::Dp => {
            open_unit_exponent(p)?;
            m.powf(T::lit(2.0) * p) / (T::lit(128.0) * scale)
        }
    })
}

/// `m₃³ / (24 M_∞ (1 + B²))` with `m₃ = |f'''(x)|`, a lower bound for `𝒟_f[f''']`.
pub fn fppp_lower_bound<T: Real>(m3: T, minf: T, b: T) -> Result<T> {
    if !(minf > T::zero()) || !minf.is_finite() {
        return Err(Error::InvalidArgument(format!("M_inf must be positive, got {minf}")));
    }
    Ok(m3.abs().powi(3) / (T::lit(24.0) * minf * (T::one() + b * b)))
}

/// Slope bound, exponent and curvature norms used by the `L^p` bounds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundParams<T> {
    pub b: T,
    pub p: T,
    pub mp: T,
    pub minf: T,
}

impl<T: Real> BoundParams<T> {
    pub fn new(b: T, p: T, mp: T, minf: T) -> Result<Self> {
        if !(b > T::zero()) || !(p > T::one()) || !(mp >= T::zero()) || !(minf >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "bound parameters need B > 0, p > 1, M_p >= 0, M_inf >= 0; got B={b}, p={p}, M_p={mp}, M_inf={minf}"
            )));
        }
        Ok(Self { b, p, mp, minf })
    }
}

/// Smallest `r > 0` with `r · ∫_{r/2}^∞ ρ α⁻³ dα = y/6`.
///
/// Scans `r = 10⁻¹² · 2^k` upward until the left side drops below `y/6`, then bisects
/// the first bracket to full precision.
pub fn solve_r<T: Real>(y: T, rho: &Modulus<T>) -> Result<T> {
    if !(y > T::zero()) || !y.is_finite() {
        return Err(Error::InvalidArgument(format!("solve_r needs y > 0, got {y}")));
    }
    rho.validate()?;
    let target = y / T::lit(6.0);
    let excess = |r: T| -> Result<T> { Ok(r * rho.tail_integral(r)? - target) };
    let fail = |reason: &str| Error::NoBracket {
        modulus: rho.describe(),
        reason: reason.to_string(),
    };
    let mut lo = T::lit(1e-12);
    if excess(lo)? <= T::zero() {
        return Err(fail("r·tail(r) is already below y/6 at r = 1e-12; the modulus is Lipschitz-like at 0"));
    }
    let mut hi = lo;
    let mut found = false;
    for _ in 0..400 {
        hi = lo * T::lit(2.0);
        if !hi.is_finite() {
            break;
        }
        if excess(hi)? <= T::zero() {
            found = true;
            break;
        }
        lo = hi;
    }
    if !found {
        return Err(fail("no sign change found while doubling r"));
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid)? > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // whichever end satisfies the equation better
    if excess(lo)?.abs() < excess(hi)?.abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// `L_B(y) = y² / ((1 + B²) r(y))`.
pub fn l_b<T: Real>(y: T, rho: &Modulus<T>, b: T) -> Result<T> {
    let r = solve_r(y, rho)?;
    Ok(y * y / ((T::one() + b * b) * r))
}

/// Constants `(C_p, C'_p)` of the remainder envelopes, from Hölder's inequality:
/// `C_p = ((p−1)/(p+1))^{(p−1)/p}` and `C'_p = C_p p/(2p+1)`.
pub fn remainder_constants<T: Real>(p: T) -> Result<(T, T)> {
    if !(p > T::one() && p <= T::lit(2.0)) {
        return Err(Error::UnsupportedExponent(p.to_f64_lossy()));
    }
    let one = T::one();
    let c = ((p - one) / (p + one)).powf((p - one) / p);
    Ok((c, c * p / (T::lit(2.0) * p + one)))
}

/// `(C_p |α|^{1/p} D^{1/p}, C'_p |α|^{(p+1)/p} D^{1/p})`, bounds on `|ℛ₁|` and `|ℛ₂|` in
/// terms of `D = 𝒟ᵖ[f''](x)` (`𝒟[f''](x)` at `p = 2`).
pub fn remainder_envelope<T: Real>(alpha: T, dval: T, p: T) -> Result<(T, T)> {
    if alpha == T::zero() || !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("envelope needs finite α ≠ 0, got {alpha}")));
    }
    if !(dval >= T::zero()) {
        return Err(Error::InvalidArgument(format!("dissipation value must be >= 0, got {dval}")));
    }
    let (c1, c2) = remainder_constants(p)?;
    let a = alpha.abs();
    let root = dval.powf(p.recip());
    Ok((c1 * a.powf(p.recip()) * root, c2 * a.powf((p + T::one()) / p) * root))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert!((cubic_lower_bound::<f64>(2.0, 1.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((cubic_lower_bound::<f64>(1.0, 0.5).unwrap() - 1.0 / 15.0).abs() < 1e-16);
        assert_eq!(cubic_lower_bound(0.0, 3.0).unwrap(), 0.0);
        assert!(cubic_lower_bound(1.0, 0.0).is_err());

        assert!((dp_lower_bound::<f64>(1.0, 1.0, 1.5).unwrap() - 1.0 / 192.0).abs() < 1e-16);
        assert!((dp_lower_bound::<f64>(2.0, 1.0, 1.5).unwrap() - 2f64.powf(2.5) / 192.0).abs() < 1e-15);
        assert_eq!(dp_lower_bound(0.0, 1.0, 1.5).unwrap(), 0.0);
        assert!(dp_lower_bound(1.0, 1.0, 2.0).is_err());

        assert!((lp_lower_bound::<f64>(1.0, 0.0, 2.0, 1.0, Variant::D).unwrap() - 1.0 / 64.0).abs() < 1e-16);
        assert!((lp_lower_bound::<f64>(1.0, 1.0, 1.5, 1.0, Variant::Dp).unwrap() - 1.0 / 256.0).abs() < 1e-16);
        assert_eq!(lp_lower_bound(0.0, 1.0, 2.0, 1.0, Variant::D).unwrap(), 0.0);
        assert!(lp_lower_bound(1.0, 1.0, 2.0, 0.0, Variant::D).is_err());
        assert!(lp_lower_bound(1.0, 1.0, 2.5, 1.0, Variant::Dp).is_err());

        assert!((fppp_lower_bound::<f64>(1.0, 1.0, 0.0).unwrap() - 1.0 / 24.0).abs() < 1e-16);
        assert!((fppp_lower_bound::<f64>(2.0, 0.5, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(fppp_lower_bound(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(fppp_lower_bound(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn bounds_are_monotone_in_m() {
        let ms: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        for w in ms.windows(2) {
            assert!(cubic_lower_bound(w[1], 0.7).unwrap() >= cubic_lower_bound(w[0], 0.7).unwrap());
            assert!(dp_lower_bound(w[1], 0.7, 1.3).unwrap() >= dp_lower_bound(w[0], 0.7, 1.3).unwrap());
            for v in [Variant::D, Variant::Dp] {
                assert!(
                    lp_lower_bound(w[1], 0.7, 1.5, 2.0, v).unwrap()
                        >= lp_lower_bound(w[0], 0.7, 1.5, 2.0, v).unwrap()
                );
            }
            assert!(fppp_lower_bound(w[1], 2.0, 0.7).unwrap() >= fppp_lower_bound(w[0], 2.0, 0.7).unwrap());
        }
    }

    #[test]
    fn sqrt_tail_and_radius_closed_forms() {
        let rho = Modulus::<f64>::sqrt();
        for r in [0.01, 0.3, 1.0, 7.0] {
            let exact = (2.0 / 3.0) * (r / 2.0f64).powf(-1.5);
            assert!((rho.tail_integral(r).unwrap() - exact).abs() <= 1e-14 * exact);
        }
        for (y, r) in [(6.0, 128.0 / 36.0), (12.0, 128.0 / 144.0)] {
            let got = solve_r(y, &rho).unwrap();
            assert!((got - r).abs() <= 1e-10 * r, "y={y}: {got} vs {r}");
        }
        let zero = Modulus::Power { k: 0.0, beta: 0.5 };
        assert_eq!(zero.tail_integral(1.0).unwrap(), 0.0);
        assert!(rho.tail_integral(0.0).is_err());
    }

    #[test]
    fn lipschitz_modulus_has_no_bracket() {
        let lip = Modulus::CappedPower { k: 1.0, beta: 1.0, cap: 2.0 };
        match solve_r(60.0, &lip) {
            Err(Error::NoBracket { modulus, .. }) => assert!(modulus.contains("capped-power")),
            other => panic!("expected NoBracket, got {other:?}"),
        }
    }

    #[test]
    fn radius_decreases_and_lb_outgrows_cubic() {
        let rho = Modulus::<f64>::capped_sqrt(0.5);
        let ys: Vec<f64> = (0..30).map(|i| 0.5 * 1.4f64.powi(i)).collect();
        let rs: Vec<f64> = ys.iter().map(|&y| solve_r(y, &rho).unwrap()).collect();
        for w in rs.windows(2) {
            assert!(w[1] < w[0]);
        }
        let sqrt = Modulus::<f64>::sqrt();
        let ratios: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&y| l_b(y, &sqrt, 0.3).unwrap() / (y * y * y))
            .collect();
        assert!(ratios[0] < ratios[1] && ratios[1] < ratios[2]);
        for y in [0.5, 3.0, 40.0] {
            let a = l_b(y, &sqrt, 0.0).unwrap();
            let b = l_b(y, &sqrt, 2.0).unwrap() * 5.0;
            assert!((a - b).abs() <= 1e-12 * a);
            let closed = y.powi(4) / 128.0;
            assert!((a - closed).abs() <= 1e-10 * closed);
        }
    }

    #[test]
    fn remainder_envelope_examples() {
        assert_eq!(remainder_envelope(1.0, 0.0, 2.0).unwrap(), (0.0, 0.0));
        let (r1, r2) = remainder_envelope(1.0f64, 3.0, 2.0).unwrap();
        assert!((r1 - 1.0).abs() < 1e-15);
        assert!((r2 - 0.4).abs() < 1e-15);
        assert!(remainder_envelope(0.0, 1.0, 2.0).is_err());
        let (c1, c2) = remainder_constants(2.0f64).unwrap();
        assert!((c1 - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((c2 - 2.0 / (5.0 * 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn modulus_validation() {
        assert!(Modulus::Power { k: 1.0, beta: 2.0 }.validate().is_err());
        assert!(Modulus::Table { distances: vec![1.0, 0.5], values: vec![0.0, 1.0] }.validate().is_err());
        assert!(Modulus::Table { distances: vec![0.5, 1.0], values: vec![1.0, 0.5] }.validate().is_err());
        let t = Modulus::Table { distances: vec![0.5, 1.0], values: vec![0.25, 0.75] };
        assert!(t.validate().is_ok());
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.eval(0.25), 0.125);
        assert_eq!(t.eval(0.75), 0.5);
        assert_eq!(t.eval(3.0), 0.75);
    }
}

//! Hurwitz zeta and digamma functions.
//!
//! Both are needed to sum the staggered α-nodes beyond the truncation radius in closed
//! form and to correct the midpoint rule near algebraic endpoint singularities.

use crate::Real;

/// `B_{2j}` for `j = 1..=15`.
const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Hurwitz zeta `ζ(s, q) = Σ_{k≥0} (q + k)^{−s}`, analytically continued to all real
/// `s ≠ 1`, for `q > 0`.
///
/// Euler–Maclaurin summation after shifting the argument past `|s|`.
pub fn hurwitz_zeta<T: Real>(s: T, q: T) -> T {
    assert!(q > T::zero(), "hurwitz_zeta needs q > 0");
    assert!(s != T::one(), "hurwitz_zeta has a pole at s = 1");
    let eps = T::epsilon();
    let shift = 10 + s.abs().to_f64_lossy().ceil() as usize;
    let mut direct = crate::summation::Compensated::new();
    for k in 0..shift {
        direct.add((q + T::count(k)).powf(-s));
    }
    let big_q = q + T::count(shift);
    let mut total = direct.value()
        + big_q.powf(T::one() - s) / (s - T::one())
        + T::lit(0.5) * big_q.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) divided by (2j)!
    let mut rising = s;
    let mut factorial = T::lit(2.0);
    let mut power = big_q.powf(-s - T::one());
    let q2 = big_q * big_q;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        if j > 0 {
            let jj = T::count(2 * j);
            rising = rising * (s + jj - T::one()) * (s + jj);
            factorial = factorial * (jj + T::one()) * (jj + T::lit(2.0));
            power = power / q2;
        }
        let term = T::lit(*b) * rising / factorial * power;
        total = total + term;
        if term.abs() <= eps * total.abs() {
            break;
        }
    }
    total
}

/// Digamma `ψ(q)` for `q > 0`.
pub fn digamma<T: Real>(q: T) -> T {
    assert!(q > T::zero(), "digamma needs q > 0");
    let mut x = q;
    let mut acc = T::zero();
    while x < T::lit(12.0) {
        acc = acc - x.recip();
        x = x + T::one();
    }
    let inv2 = (x * x).recip();
    let mut series = T::zero();
    let mut pow = inv2;
    for (j, b) in BERNOULLI_EVEN.iter().take(8).enumerate() {
        series = series + T::lit(*b) / T::count(2 * (j + 1)) * pow;
        pow = pow * inv2;
    }
    acc + x.ln() - T::lit(0.5) / x - series
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn brute(s: f64, q: f64) -> f64 {
        // direct sum plus integral tail estimate, only used for s >= 2
        let n = 200_000usize;
        let mut acc = crate::summation::Compensated::new();
        for k in 0..n {
            acc.add((q + k as f64).powf(-s));
        }
        let big = q + n as f64;
        acc.value() + big.powf(1.0 - s) / (s - 1.0) + 0.5 * big.powf(-s)
    }

    #[test]
    fn riemann_special_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-15);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-15);
        // ζ(0, q) = 1/2 − q and ζ(−1, q) = −B₂(q)/2
        assert!((hurwitz_zeta(0.0f64, 0.5)).abs() < 1e-14);
        assert!((hurwitz_zeta(-1.0f64, 0.5) - 1.0 / 24.0).abs() < 1e-14);
        // ζ(1/2) = −1.4603545088095868
        assert!((hurwitz_zeta(0.5f64, 1.0) + 1.460_354_508_809_586_8).abs() < 1e-13);
    }

    #[test]
    fn matches_direct_summation() {
        for &(s, q) in &[(2.0, 4.0), (3.0, 4.37), (7.0, 1.9), (12.0, 8.5), (2.5, 0.5)] {
            let z = hurwitz_zeta(s, q);
            assert!((z - brute(s, q)).abs() <= 1e-13 * z.abs(), "s={s} q={q}");
        }
    }

    #[test]
    fn large_order_is_dominated_by_first_term() {
        let z = hurwitz_zeta(60.0, 4.0);
        let lead = 4.0f64.powf(-60.0);
        assert!((z / lead - 1.0 - (4.0f64 / 5.0).powi(60)).abs() < 1e-10);
    }

    #[test]
    fn digamma_values() {
        let euler = 0.577_215_664_901_532_9;
        assert!((digamma(1.0f64) + euler).abs() < 1e-15);
        assert!((digamma(0.5) + euler + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!((digamma(10.0) - (-euler + (1..10).map(|k| 1.0 / k as f64).sum::<f64>())).abs() < 1e-14);
    }
}

//! Compensated and order-independent summation.

use crate::Real;

/// Error-free transformation `a + b = s + e` (Knuth's TwoSum).
#[inline(always)]
pub fn two_sum<T: Real>(a: T, b: T) -> (T, T) {
    let s = a + b;
    let bp = s - a;
    let e = (a - (s - bp)) + (b - bp);
    (s, e)
}

/// Running sum with a separately accumulated rounding error (Ogita–Rump–Oishi `Sum2`).
///
/// Branch-free, so loops over independent accumulators vectorise.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Compensated<T> {
    sum: T,
    err: T,
}

impl<T: Real> Compensated<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            err: T::zero(),
        }
    }

    #[inline(always)]
    pub fn add(&mut self, x: T) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.err = self.err + e;
    }

    #[inline(always)]
    pub fn value(&self) -> T {
        self.sum + self.err
    }
}

impl<T: Real> FromIterator<T> for Compensated<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice in index order.
pub fn compensated_sum<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().collect::<Compensated<T>>().value()
}

/// Sum whose result depends only on the multiset of inputs.
///
/// Values are sorted by magnitude before a compensated sweep, so any permutation of the
/// input (in particular a circular shift of a grid function) gives the bit-identical
/// result. A slice of equal values of power-of-two length sums exactly.
pub fn permutation_invariant_sum<T: Real>(xs: &[T]) -> T {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| {
        a.abs()
            .partial_cmp(&b.abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    });
    pairwise(&sorted)
}

fn pairwise<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n => {
            let (lo, hi) = xs.split_at(n / 2);
            let (s, e) = two_sum(pairwise(lo), pairwise(hi));
            s + e
        }
    }
}

/// Arithmetic mean computed with [`permutation_invariant_sum`].
pub fn invariant_mean<T: Real>(xs: &[T]) -> T {
    permutation_invariant_sum(xs) / T::count(xs.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_recovers_cancellation() {
        let xs = [1.0e16, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(&xs), 2.0);
        assert_ne!(xs.iter().sum::<f64>(), 2.0);
    }

    #[test]
    fn invariant_sum_ignores_order() {
        let xs: Vec<f64> = (0..64).map(|i| ((i * 37 % 64) as f64 * 0.1).sin()).collect();
        let mut ys = xs.clone();
        ys.rotate_left(17);
        assert_eq!(
            permutation_invariant_sum(&xs).to_bits(),
            permutation_invariant_sum(&ys).to_bits()
        );
    }

    #[test]
    fn mean_of_constant_is_exact() {
        for c in [0.1, -3.7, 1.0 / 3.0, 12345.678] {
            let xs = vec![c; 512];
            assert_eq!(invariant_mean(&xs), c);
        }
    }
}

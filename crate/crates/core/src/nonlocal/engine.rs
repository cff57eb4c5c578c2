use rayon::prelude::*;

use super::integrands::Integrand;
use super::{Quadrature, TailModel};
use crate::grid::GridFunction;
use crate::summation::Compensated;
use crate::{Error, Real, Result};

/// A field with its mean removed and resampled at every fractional offset of a plan.
///
/// Each resampled copy is stored twice in a row so a node's samples form one
/// contiguous window.
#[derive(Clone, Debug)]
pub struct Prepared<T> {
    centred: Vec<T>,
    shifted: Vec<Vec<T>>,
}

impl<T: Real> Prepared<T> {
    pub(crate) fn new(plan: &Quadrature<T>, g: &GridFunction<T>) -> Self {
        let centred = g.centred();
        let shifted = plan
            .kernels()
            .iter()
            .enumerate()
            .map(|(slot, kernel)| {
                let once = if slot == 0 {
                    centred.clone()
                } else {
                    crate::grid::circulant(kernel, &centred)
                };
                once.iter().chain(once.iter()).copied().collect()
            })
            .collect();
        Self { centred, shifted }
    }

    /// Largest magnitude over the nodes and all resampled copies.
    fn reach(&self) -> T {
        self.shifted
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

pub(crate) struct Integrated<T> {
    pub sums: Vec<T>,
    /// Unweighted pair values at the three innermost nodes.
    pub head: Option<Vec<[T; 3]>>,
}

/// Per-order data of the asymptotic tail: `c_i`, `Z_{2q+2i}` and `Z_{2q+2i−1}`.
struct TailTerm<'a, T> {
    c: T,
    even: &'a [T],
    odd: &'a [T],
}

/// Number of terms of `(δ² + α²)^{−q} = Σ_i c_i δ^{2i} α^{−2q−2i}` needed at `|δ|/A ≤ ratio`.
fn series_length<T: Real>(ratio: T, q: usize) -> Result<usize> {
    if ratio > T::lit(0.5) {
        return Err(Error::Config(format!(
            "interface oscillation is {ratio} times the truncation radius; the asymptotic tail \
             needs at most 0.5, increase truncation_radius"
        )));
    }
    let r2 = ratio * ratio;
    let target = T::epsilon() * T::lit(1e-3);
    let mut binom = T::one();
    let mut pow = T::one();
    for i in 1..80 {
        binom = binom * T::count(q + i - 1) / T::count(i);
        pow = pow * r2;
        if binom * pow < target {
            return Ok(i - 1);
        }
    }
    Ok(79)
}

pub(crate) fn integrate<T: Real, I: Integrand<T, F>, const F: usize>(
    plan: &Quadrature<T>,
    fields: [&Prepared<T>; F],
    integrand: &I,
    head: bool,
    skip: usize,
) -> Result<Integrated<T>> {
    let n = plan.grid().len();
    let q = I::POWER;
    let nodes = plan.nodes();

    let mut tail_terms = Vec::new();
    if plan.tail() == TailModel::Asymptotic {
        let ratio = T::lit(2.0) * fields[0].reach() / plan.truncation_radius();
        let terms = series_length(ratio, q)?;
        let mut c = T::one();
        for i in 0..=terms {
            if i > 0 {
                c = -c * T::count(q + i - 1) / T::count(i);
            }
            tail_terms.push(TailTerm {
                c,
                even: plan.zeta_table(2 * q + 2 * i)?,
                odd: plan.zeta_table(2 * q + 2 * i - 1)?,
            });
        }
    }
    let beta_nodes = if tail_terms.is_empty() { 0 } else { plan.period_nodes() };

    let chunk = |start: usize, out: &mut [T], heads: Option<&mut [[T; 3]]>| {
        let len = out.len();
        let mut acc = vec![Compensated::new(); len];
        let mut heads = heads;
        for (k, node) in nodes.iter().enumerate() {
            let a = node.alpha;
            let a2 = a * a;
            let side = a.signum();
            let plus: [&[T]; F] =
                std::array::from_fn(|f| &fields[f].shifted[node.plus.slot][node.plus.base + start..]);
            let minus: [&[T]; F] =
                std::array::from_fn(|f| &fields[f].shifted[node.minus.slot][node.minus.base + start..]);
            let with_tail = k < beta_nodes;
            for jj in 0..len {
                let j = start + jj;
                let dp: [T; F] = std::array::from_fn(|f| fields[f].centred[j] - plus[f][jj]);
                let dm: [T; F] = std::array::from_fn(|f| fields[f].centred[j] - minus[f][jj]);
                let sp = dp[0] * dp[0];
                let sm = dm[0] * dm[0];
                let kp = (sp + a2).recip();
                let km = (sm + a2).recip();
                let (kqp, kqm) = match q {
                    1 => (kp, km),
                    2 => (kp * kp, km * km),
                    _ => (kp * kp * kp, km * km * km),
                };
                let (n0p, n1p) = integrand.coefficients(j, &dp);
                let (n0m, n1m) = integrand.coefficients(j, &dm);
                let pair = (n0p + n1p * a) * kqp + (n0m - n1m * a) * kqm;
                if k >= skip {
                    acc[jj].add(pair);
                }
                if k < 3 {
                    if let Some(h) = heads.as_deref_mut() {
                        h[jj][k] = pair;
                    }
                }
                if with_tail {
                    let mut pp = T::one();
                    let mut pm = T::one();
                    let mut t = T::zero();
                    for term in &tail_terms {
                        t = t + term.c
                            * ((n0p * pp + n0m * pm) * term.even[k] + side * (n1p * pp - n1m * pm) * term.odd[k]);
                        pp = pp * sp;
                        pm = pm * sm;
                    }
                    acc[jj].add(t);
                }
            }
        }
        let h = plan.alpha_spacing();
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = a.value() * h;
        }
    };

    let mut sums = vec![T::zero(); n];
    let mut heads = head.then(|| vec![[T::zero(); 3]; n]);
    const CHUNK: usize = 64;
    if plan.is_parallel() && n > CHUNK {
        match heads.as_mut() {
            Some(hv) => sums
                .par_chunks_mut(CHUNK)
                .zip(hv.par_chunks_mut(CHUNK))
                .enumerate()
                .for_each(|(c, (out, h))| chunk(c * CHUNK, out, Some(h))),
            None => sums
                .par_chunks_mut(CHUNK)
                .enumerate()
                .for_each(|(c, out)| chunk(c * CHUNK, out, None)),
        }
    } else {
        chunk(0, &mut sums, heads.as_deref_mut());
    }
    Ok(Integrated { sums, head: heads })
}

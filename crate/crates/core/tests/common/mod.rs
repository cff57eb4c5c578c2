//! Independent reference implementations used only by the tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use muskat_core::grid::{Grid, GridFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `Σ_k a_k cos(k ω x) + b_k sin(k ω x)` with `ω = π/L`.
#[derive(Clone, Debug)]
pub struct Trig {
    pub omega: f64,
    pub cos: Vec<(u32, f64)>,
    pub sin: Vec<(u32, f64)>,
}

impl Trig {
    pub fn on(half_length: f64) -> Self {
        Self {
            omega: PI / half_length,
            cos: vec![],
            sin: vec![],
        }
    }

    pub fn cos(mut self, k: u32, a: f64) -> Self {
        self.cos.push((k, a));
        self
    }

    pub fn sin(mut self, k: u32, b: f64) -> Self {
        self.sin.push((k, b));
        self
    }

    pub fn value(&self, x: f64) -> f64 {
        let w = self.omega;
        self.cos.iter().map(|&(k, a)| a * (k as f64 * w * x).cos()).sum::<f64>()
            + self.sin.iter().map(|&(k, b)| b * (k as f64 * w * x).sin()).sum::<f64>()
    }

    pub fn d1(&self, x: f64) -> f64 {
        let w = self.omega;
        self.cos.iter().map(|&(k, a)| -a * k as f64 * w * (k as f64 * w * x).sin()).sum::<f64>()
            + self.sin.iter().map(|&(k, b)| b * k as f64 * w * (k as f64 * w * x).cos()).sum::<f64>()
    }

    /// `u(x) − u(x − α)` through product formulas, free of cancellation for small `α`.
    pub fn delta(&self, x: f64, alpha: f64) -> f64 {
        let w = self.omega;
        let mut acc = 0.0;
        for &(k, a) in &self.cos {
            let kw = k as f64 * w;
            acc += -2.0 * a * (kw * (x - alpha / 2.0)).sin() * (kw * alpha / 2.0).sin();
        }
        for &(k, b) in &self.sin {
            let kw = k as f64 * w;
            acc += 2.0 * b * (kw * (x - alpha / 2.0)).cos() * (kw * alpha / 2.0).sin();
        }
        acc
    }

    pub fn derivative(&self) -> Trig {
        let w = self.omega;
        Trig {
            omega: w,
            cos: self.sin.iter().map(|&(k, b)| (k, b * k as f64 * w)).collect(),
            sin: self.cos.iter().map(|&(k, a)| (k, -a * k as f64 * w)).collect(),
        }
    }

    pub fn sample(&self, grid: &Grid<f64>) -> GridFunction<f64> {
        grid.from_fn(|x| self.value(x))
    }

    pub fn max_mode(&self) -> u32 {
        self.cos.iter().chain(&self.sin).map(|m| m.0).max().unwrap_or(0)
    }
}

/// Random trigonometric polynomial with modes `1..=modes` and `k⁻²` decay.
pub fn random_trig(seed: u64, half_length: f64, modes: u32, scale: f64) -> Trig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Trig::on(half_length);
    for k in 1..=modes {
        let d = scale / (k * k) as f64;
        t = t.cos(k, rng.gen_range(-d..d)).sin(k, rng.gen_range(-d..d));
    }
    t
}

/// Trigonometric interpolant of grid samples, by a direct `O(N²)` DFT.
pub struct Interpolant {
    half_length: f64,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Interpolant {
    pub fn new(g: &GridFunction<f64>) -> Self {
        let n = g.len();
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for k in 0..n {
            for (j, v) in g.values().iter().enumerate() {
                let th = -2.0 * PI * (k * j % n) as f64 / n as f64;
                re[k] += v * th.cos() / n as f64;
                im[k] += v * th.sin() / n as f64;
            }
        }
        Self {
            half_length: g.grid().half_length(),
            re,
            im,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.re.len();
        let t = x + self.half_length;
        let w = PI / self.half_length;
        let mut acc = self.re[0];
        for k in 1..n / 2 {
            let th = k as f64 * w * t;
            acc += 2.0 * (self.re[k] * th.cos() - self.im[k] * th.sin());
        }
        acc + self.re[n / 2] * ((n / 2) as f64 * w * t).cos()
    }
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`, weights evaluated in
/// distance-to-endpoint form so endpoint singularities are integrated accurately.
pub fn tanh_sinh(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = (b - a) / 2.0;
    let mut prev = f64::NAN;
    let mut step = 0.5;
    for _ in 0..10 {
        let mut acc = 0.0;
        let mut k = 0i64;
        loop {
            let t = k as f64 * step;
            let s = PI / 2.0 * t.sinh();
            let c = PI / 2.0 * t.cosh();
            let w = c / s.cosh().powi(2);
            // distance of the node from the nearer endpoint, 1 − tanh(s) = 2/(e^{2s}+1)
            let gap = 2.0 / ((2.0 * s).exp() + 1.0) * half;
            if gap < 1e-100 * half || w < 1e-300 {
                break;
            }
            let fr = f(b - gap);
            acc += w * fr;
            if k > 0 {
                acc += w * f(a + gap);
            }
            k += 1;
        }
        let total = acc * half * step;
        if (total - prev).abs() <= 1e-14 * total.abs().max(1e-300) {
            return total;
        }
        prev = total;
        step /= 2.0;
    }
    prev
}

/// `Σ_n (β + nP)^{−2} = (π/P)² / sin²(πβ/P)`.
pub fn periodic_kernel(beta: f64, period: f64) -> f64 {
    let s = (PI * beta / period).sin();
    (PI / period).powi(2) / (s * s)
}

/// `PV ∫_ℝ w(δα g(x)) α⁻² dα` for `f ≡ 0`, folded onto one period and symmetrised.
pub fn flat_integral(g: &Trig, x: f64, period: f64, w: impl Fn(f64) -> f64) -> f64 {
    tanh_sinh(0.0, period / 2.0, |beta| {
        (w(g.delta(x, beta)) + w(g.delta(x, -beta))) * periodic_kernel(beta, period)
    })
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    max_diff(got, want) / max_abs(want)
}

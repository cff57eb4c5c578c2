use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Grid, GridFunction};
use crate::{Error, Real, Result};

/// One term `a · sin(k π x / L + φ)`; on `[−π, π)` this is `a · sin(k x + φ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SineMode<T> {
    pub amplitude: T,
    pub mode: u32,
    pub phase: T,
}

/// Built-in initial-data families.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialData<T> {
    Constant(T),
    Sine(SineMode<T>),
    Sines(Vec<SineMode<T>>),
    /// `a Σ_n exp(−(x − c + 2nL)² / (2σ²))`, the Gaussian wrapped onto the torus.
    Gaussian { amplitude: T, sigma: T, center: T },
    /// Explicit nodal values, one per grid node.
    Table(Vec<T>),
    /// Random trigonometric polynomial with modes `1..=modes`, coefficients decaying like
    /// `k⁻²`, rescaled so that the discrete `‖f'‖_∞` equals `slope`.
    RandomBandLimited { seed: u64, modes: u32, slope: T },
}

impl<T: Real> InitialData<T> {
    pub fn sine(amplitude: T, mode: u32) -> Self {
        Self::Sine(SineMode {
            amplitude,
            mode,
            phase: T::zero(),
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::Constant(_) => "constant",
            Self::Sine(_) => "sine",
            Self::Sines(_) => "sines",
            Self::Gaussian { .. } => "gaussian",
            Self::Table(_) => "table",
            Self::RandomBandLimited { .. } => "random",
        }
    }

    /// Exact samples at the grid nodes.
    pub fn sample(&self, grid: &Grid<T>) -> Result<GridFunction<T>> {
        let scale = T::PI() / grid.half_length();
        let sine = |m: &SineMode<T>, x: T| {
            m.amplitude * (T::from_u32(m.mode).unwrap() * scale * x + m.phase).sin()
        };
        match self {
            Self::Constant(c) => GridFunction::new(grid, vec![*c; grid.len()]),
            Self::Sine(m) => GridFunction::new(grid, grid.nodes().into_iter().map(|x| sine(m, x)).collect()),
            Self::Sines(ms) => GridFunction::new(
                grid,
                grid.nodes()
                    .into_iter()
                    .map(|x| ms.iter().fold(T::zero(), |acc, m| acc + sine(m, x)))
                    .collect(),
            ),
            Self::Gaussian {
                amplitude,
                sigma,
                center,
            } => {
                if !(*sigma > T::zero()) {
                    return Err(Error::Config(format!("gaussian sigma must be positive, got {sigma}")));
                }
                Ok(grid.from_fn(|x| *amplitude * periodized_gaussian(x - *center, *sigma, grid.period())))
            }
            Self::Table(values) => {
                if values.len() != grid.len() {
                    return Err(Error::GridMismatch(format!(
                        "table has {} values but the grid has {} nodes",
                        values.len(),
                        grid.len()
                    )));
                }
                GridFunction::new(grid, values.clone())
            }
            Self::RandomBandLimited { seed, modes, slope } => {
                random_band_limited(grid, *seed, *modes, *slope)
            }
        }
    }
}

/// `Σ_n exp(−(y + nP)²/(2σ²))`, truncated once terms fall below `e^{−40²/2}`.
pub(crate) fn periodized_gaussian<T: Real>(y: T, sigma: T, period: T) -> T {
    let reach = ((T::lit(40.0) * sigma) / period).ceil().to_f64_lossy() as i64 + 1;
    let two_var = T::lit(2.0) * sigma * sigma;
    (-reach..=reach)
        .map(|n| {
            let z = y + T::from_i64(n).unwrap() * period;
            (-(z * z) / two_var).exp()
        })
        .fold(T::zero(), |a, b| a + b)
}

fn random_band_limited<T: Real>(grid: &Grid<T>, seed: u64, modes: u32, slope: T) -> Result<GridFunction<T>> {
    if modes == 0 || modes as usize >= grid.len() / 4 {
        return Err(Error::Config(format!(
            "random data needs 1 <= modes < N/4, got {modes} for N = {}",
            grid.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<SineMode<T>> = (1..=modes)
        .map(|k| {
            let amp: f64 = rng.gen_range(-1.0..1.0) / f64::from(k * k);
            let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            SineMode {
                amplitude: T::lit(amp),
                mode: k,
                phase: T::lit(phase),
            }
        })
        .collect();
    let raw = InitialData::Sines(terms).sample(grid)?;
    let b = raw.derivative(1)?.sup_norm();
    if b == T::zero() {
        return Ok(raw);
    }
    let factor = slope / b;
    Ok(raw.map(|v| v * factor))
}

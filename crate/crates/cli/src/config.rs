//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use muskat_core::bounds::Modulus;
use muskat_core::evolve::{Hooks, SimConfig};
use muskat_core::grid::{Grid, InitialData, SineMode};
use muskat_core::nonlocal::{QuadratureConfig, TailModel};
use muskat_core::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub init: InitSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    pub t_end: f64,
    #[serde(default = "default_stride")]
    pub output_stride: usize,
    #[serde(default = "default_ledger")]
    pub ledger_exponents: Vec<f64>,
    #[serde(default = "default_slope_threshold")]
    pub slope_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusSpec>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Seed for the random test functions of the verification suites.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub suite: Suite,
    #[serde(default)]
    pub hooks: HookSpec,
}

fn default_cfl() -> f64 {
    0.1
}
fn default_stride() -> usize {
    100
}
fn default_ledger() -> Vec<f64> {
    vec![2.0, 1.5]
}
fn default_slope_threshold() -> f64 {
    10.0
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
}

/// Initial-data families, selected by `family`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Constant {
        c: f64,
    },
    Sine {
        a: f64,
        #[serde(default = "one")]
        k: u32,
        #[serde(default)]
        phase: f64,
    },
    Sines {
        modes: Vec<SineSpec>,
    },
    Gaussian {
        a: f64,
        sigma: f64,
        #[serde(default)]
        center: f64,
    },
    Table {
        values: Vec<f64>,
    },
    Random {
        /// Falls back to the top-level `seed`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        modes: u32,
        slope: f64,
    },
}

pub const FAMILIES: [&str; 6] = ["constant", "sine", "sines", "gaussian", "table", "random"];

fn one() -> u32 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SineSpec {
    pub a: f64,
    pub k: u32,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Defaults to the grid spacing.
    #[serde(default)]
    pub alpha_spacing: Option<f64>,
    /// Defaults to `8L`.
    #[serde(default)]
    pub truncation_radius: Option<f64>,
    #[serde(default)]
    pub tail: TailSpec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSpec {
    #[default]
    Asymptotic,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusSpec {
    Power {
        #[serde(rename = "K")]
        k: f64,
        beta: f64,
    },
    CappedPower {
        #[serde(rename = "K")]
        k: f64,
        beta: f64,
        cap: f64,
    },
    Table {
        distances: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    #[default]
    Operators,
    Bounds,
    Theorems,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HookSpec {
    /// Overwrite a value with NaN after this many steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_nan_at_step: Option<u64>,
    /// Multiplies every lower bound in the bounds suite.
    #[serde(default = "unit")]
    pub bound_scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for HookSpec {
    fn default() -> Self {
        Self {
            inject_nan_at_step: None,
            bound_scale: 1.0,
        }
    }
}

/// Read, validate and complete a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))?;
    from_value(value).with_context(|| format!("invalid config {}", path.display()))
}

/// Validate and complete a configuration given as a JSON value.
pub fn from_value(value: Value) -> Result<RunConfig> {
    if let Some(family) = value.pointer("/init/family").and_then(Value::as_str) {
        if !FAMILIES.contains(&family) {
            return Err(Error::UnknownFamily(family.to_owned()).into());
        }
    }
    let mut cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("at `{path}`: {}", e.into_inner())
    })?;
    cfg.complete()?;
    Ok(cfg)
}

impl RunConfig {
    /// Fill quadrature defaults so the emitted configuration is fully explicit.
    fn complete(&mut self) -> Result<()> {
        let grid = self.make_grid()?;
        self.quadrature.alpha_spacing.get_or_insert(grid.spacing());
        self.quadrature.truncation_radius.get_or_insert(8.0 * grid.half_length());
        if let InitSpec::Random { seed, .. } = &mut self.init {
            seed.get_or_insert(self.seed);
        }
        self.sim_config()?.validate()?;
        if let Some(m) = &self.modulus {
            m.to_modulus().validate()?;
        }
        if !(self.hooks.bound_scale > 0.0) {
            bail!("hooks.bound_scale must be positive");
        }
        Ok(())
    }

    pub fn make_grid(&self) -> Result<Grid<f64>> {
        Ok(Grid::new(self.grid.l, self.grid.n)?)
    }

    pub fn quadrature_config(&self) -> QuadratureConfig<f64> {
        QuadratureConfig {
            alpha_spacing: self.quadrature.alpha_spacing,
            truncation_radius: self.quadrature.truncation_radius,
            tail: match self.quadrature.tail {
                TailSpec::Asymptotic => TailModel::Asymptotic,
                TailSpec::None => TailModel::None,
            },
            parallel: true,
        }
    }

    pub fn initial_data(&self) -> InitialData<f64> {
        match &self.init {
            InitSpec::Constant { c } => InitialData::Constant(*c),
            InitSpec::Sine { a, k, phase } => InitialData::Sine(SineMode {
                amplitude: *a,
                mode: *k,
                phase: *phase,
            }),
            InitSpec::Sines { modes } => InitialData::Sines(
                modes
                    .iter()
                    .map(|m| SineMode {
                        amplitude: m.a,
                        mode: m.k,
                        phase: m.phase,
                    })
                    .collect(),
            ),
            InitSpec::Gaussian { a, sigma, center } => InitialData::Gaussian {
                amplitude: *a,
                sigma: *sigma,
                center: *center,
            },
            InitSpec::Table { values } => InitialData::Table(values.clone()),
            InitSpec::Random { seed, modes, slope } => InitialData::RandomBandLimited {
                seed: seed.unwrap_or(self.seed),
                modes: *modes,
                slope: *slope,
            },
        }
    }

    pub fn sim_config(&self) -> Result<SimConfig<f64>> {
        let mut cfg = SimConfig::new(self.make_grid()?, self.initial_data(), self.t_end);
        cfg.quadrature = self.quadrature_config();
        cfg.cfl_safety = self.cfl_safety;
        cfg.output_stride = self.output_stride;
        cfg.ledger_exponents = self.ledger_exponents.clone();
        cfg.slope_threshold = self.slope_threshold;
        cfg.hooks = Hooks {
            inject_nan_at_step: self.hooks.inject_nan_at_step,
        };
        Ok(cfg)
    }

    pub fn modulus(&self) -> Option<Modulus<f64>> {
        self.modulus.as_ref().map(ModulusSpec::to_modulus)
    }
}

impl ModulusSpec {
    pub fn to_modulus(&self) -> Modulus<f64> {
        match self {
            Self::Power { k, beta } => Modulus::Power { k: *k, beta: *beta },
            Self::CappedPower { k, beta, cap } => Modulus::CappedPower {
                k: *k,
                beta: *beta,
                cap: *cap,
            },
            Self::Table { distances, values } => Modulus::Table {
                distances: distances.clone(),
                values: values.clone(),
            },
        }
    }
}

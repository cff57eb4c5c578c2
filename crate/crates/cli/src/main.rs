//! `muskat`: simulation, verification, single-operator evaluation and parameter sweeps.
//!
//! Exit codes: 0 success, 1 configuration or I/O failure, 2 a run halted on an event or a
//! verification check failed.

mod config;
mod output;
mod sweep;
mod verify;

use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use muskat_core::evolve::run;
use muskat_core::grid::{read_csv, GridFunction};
use muskat_core::nonlocal::{Quadrature, QuadratureConfig, TailModel};

use config::{parse_config, Suite};

#[derive(Parser)]
#[command(name = "muskat", version, about = "Numerical laboratory for the 1D Muskat interface equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate in time; writes series.csv, events.json, final.csv and config.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; writes report.json.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one operator to a sampled function: lambda, hilbert, velocity, rhs, Lf, Df, Dp, tterms.
    Op {
        #[arg(long)]
        name: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// Second argument of Lf, Df and Dp.
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Exponent of Dp.
        #[arg(long, default_value_t = 1.5)]
        p: f64,
        #[arg(long)]
        alpha_spacing: Option<f64>,
        #[arg(long)]
        truncation_radius: Option<f64>,
        /// Drop α-nodes beyond the truncation radius instead of summing the asymptotic tail.
        #[arg(long)]
        no_tail: bool,
    },
    /// Run the Cartesian product of parameter values; writes sweep.csv and one directory per run.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// JSON object of dotted keys to value lists, inline or as a file path.
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

const EXIT_EVENT: u8 = 2;

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MUSKAT_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("MUSKAT_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("MUSKAT_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn read_function(path: &Path) -> Result<GridFunction<f64>> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_csv(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

fn cmd_simulate(config: &Path, out: Option<PathBuf>) -> Result<u8> {
    let mut cfg = parse_config(config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let result = run(&cfg.sim_config()?)?;
    output::write_json(&cfg.output_dir.join("config.json"), &cfg)?;
    output::write_run(&cfg.output_dir, &result)?;
    for e in result.events.events() {
        eprintln!("event at t = {:e}: {}", e.t, e.payload);
    }
    Ok(if result.halted() { EXIT_EVENT } else { 0 })
}

fn cmd_verify(config: &Path, suite: Option<Suite>, out: Option<PathBuf>) -> Result<u8> {
    let mut cfg = parse_config(config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let suite = suite.unwrap_or(cfg.suite);
    let reports = verify::run_suite(&cfg, suite)?;
    output::write_json(&cfg.output_dir.join("report.json"), &reports)?;
    for r in &reports {
        let status = match (&r.skipped, r.pass) {
            (Some(_), _) => "SKIP",
            (None, true) => "PASS",
            (None, false) => "FAIL",
        };
        eprintln!("{status} {} (worst margin {:e}, tolerance {:e})", r.name, r.worst_margin, r.tolerance);
    }
    Ok(if verify::all_pass(&reports) { 0 } else { EXIT_EVENT })
}

#[allow(clippy::too_many_arguments)]
fn cmd_op(
    name: &str,
    input: &Path,
    g: Option<&Path>,
    out: &Path,
    p: f64,
    alpha_spacing: Option<f64>,
    truncation_radius: Option<f64>,
    no_tail: bool,
) -> Result<u8> {
    let f = read_function(input)?;
    let grid = f.grid().clone();
    let qc = QuadratureConfig {
        alpha_spacing,
        truncation_radius,
        tail: if no_tail { TailModel::None } else { TailModel::Asymptotic },
        parallel: true,
    };
    let second = || -> Result<GridFunction<f64>> {
        let path = g.with_context(|| format!("operator {name} needs --g"))?;
        let g = read_function(path)?;
        f.check_same_grid(&g)?;
        Ok(g)
    };
    let plan = || Quadrature::new(&grid, &qc);
    let result = match name {
        "lambda" => f.lambda(),
        "hilbert" => f.hilbert(),
        "velocity" => plan()?.velocity(&f)?,
        "rhs" => plan()?.muskat_rhs(&f)?,
        "Lf" => plan()?.apply_lf(&f, &second()?)?,
        "Df" => plan()?.apply_df(&f, &second()?)?,
        "Dp" => plan()?.apply_dp(&f, &second()?, p)?,
        "tterms" => {
            let terms = plan()?.t_terms(&f)?;
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("tterms");
            for (i, t) in terms.as_array().iter().enumerate() {
                output::write_function(&out.with_file_name(format!("{stem}_t{}.csv", i + 1)), t)?;
            }
            return Ok(0);
        }
        other => bail!("unknown operator `{other}`; expected lambda, hilbert, velocity, rhs, Lf, Df, Dp or tterms"),
    };
    output::write_function(out, &result)?;
    Ok(0)
}

fn cmd_sweep(config: &Path, grid: &str, out: Option<PathBuf>) -> Result<u8> {
    let mut cfg = parse_config(config)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let params = sweep::parse_grid(grid)?;
    let base = serde_json::to_value(&cfg)?;
    let n = sweep::sweep(base, &params, &cfg.output_dir)?;
    eprintln!("{n} runs written to {}", cfg.output_dir.join("sweep.csv").display());
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::Verify { suite, config, out } => cmd_verify(&config, suite, out),
        Command::Op {
            name,
            input,
            g,
            out,
            p,
            alpha_spacing,
            truncation_radius,
            no_tail,
        } => cmd_op(&name, &input, g.as_deref(), &out, p, alpha_spacing, truncation_radius, no_tail),
        Command::Sweep { config, grid, out } => cmd_sweep(&config, &grid, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

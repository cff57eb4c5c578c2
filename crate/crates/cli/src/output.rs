//! File writers. Floats use Rust's shortest round-trip formatting.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use muskat_core::evolve::{RunOutput, Sample};
use muskat_core::grid::{write_csv, GridFunction};

pub const SERIES_HEADER: &str = "t,sup_f,B,M_2,M_inf,hhalf,envelope,ledger_slack_p2";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

pub fn series_row(s: &Sample<f64>) -> String {
    let m = &s.metrics;
    let slack = s.slack.iter().find(|(p, _)| *p == 2.0).map_or(f64::NAN, |&(_, v)| v);
    format!(
        "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
        s.t,
        m.sup_f,
        m.slope_b,
        m.curvature_norm(2.0).unwrap_or(f64::NAN),
        m.m_inf(),
        m.hhalf,
        s.envelope,
        slack
    )
}

pub fn write_series(path: &Path, series: &[Sample<f64>]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{SERIES_HEADER}")?;
    for s in series {
        writeln!(out, "{}", series_row(s))?;
    }
    out.flush().with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush().with_context(|| format!("cannot write {}", path.display()))
}

pub fn write_function(path: &Path, g: &GridFunction<f64>) -> Result<()> {
    let mut out = create(path)?;
    write_csv(g, &mut out)?;
    out.flush().with_context(|| format!("cannot write {}", path.display()))
}

/// `series.csv`, `events.json` and `final.csv` of one run.
pub fn write_run(dir: &Path, out: &RunOutput<f64>) -> Result<()> {
    write_series(&dir.join("series.csv"), &out.series)?;
    write_json(&dir.join("events.json"), &out.events)?;
    write_function(&dir.join("final.csv"), &out.last.f)
}

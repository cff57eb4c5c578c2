//! Cartesian parameter sweeps over dotted configuration keys.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::{Map, Value};

use muskat_core::evolve::run;

use crate::config::from_value;
use crate::output::write_run;

/// `{"init.a": [0.005, 0.01], ...}` read from a file or given inline.
pub fn parse_grid(arg: &str) -> Result<Vec<(String, Vec<Value>)>> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_owned()
    } else {
        std::fs::read_to_string(arg).with_context(|| format!("cannot read sweep grid {arg}"))?
    };
    let map: Map<String, Value> = serde_json::from_str(&text).context("sweep grid must be a JSON object")?;
    if map.is_empty() {
        bail!("sweep grid is empty");
    }
    map.into_iter()
        .map(|(k, v)| match v {
            Value::Array(vs) if !vs.is_empty() => Ok((k, vs)),
            Value::Array(_) => bail!("sweep parameter `{k}` has no values"),
            _ => bail!("sweep parameter `{k}` must be an array"),
        })
        .collect()
}

fn set_path(root: &mut Value, dotted: &str, value: Value) -> Result<()> {
    let mut node = root;
    let parts: Vec<&str> = dotted.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .with_context(|| format!("`{dotted}`: `{}` is not an object", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            obj.insert((*part).to_owned(), value);
            return Ok(());
        }
        node = obj.entry(*part).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split yields at least one part")
}

fn points(grid: &[(String, Vec<Value>)]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::new()];
    for (_, values) in grid {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v.clone());
                    p
                })
            })
            .collect();
    }
    out
}

struct Row {
    params: Vec<Value>,
    final_b: f64,
    final_m_inf: f64,
    max_envelope_slack: f64,
    event: String,
}

fn run_point(base: &Value, grid: &[(String, Vec<Value>)], params: Vec<Value>, dir: &Path) -> Row {
    let mut row = Row {
        params: params.clone(),
        final_b: f64::NAN,
        final_m_inf: f64::NAN,
        max_envelope_slack: f64::NAN,
        event: String::new(),
    };
    let result = (|| -> Result<()> {
        let mut value = base.clone();
        for ((key, _), v) in grid.iter().zip(params) {
            set_path(&mut value, key, v)?;
        }
        set_path(&mut value, "output_dir", Value::String(dir.display().to_string()))?;
        let cfg = from_value(value)?;
        let out = run(&cfg.sim_config()?)?;
        write_run(dir, &out)?;
        crate::output::write_json(&dir.join("config.json"), &cfg)?;
        let last = out.series.last().expect("series holds the initial sample");
        row.final_b = last.metrics.slope_b;
        row.final_m_inf = last.metrics.m_inf();
        row.max_envelope_slack = out
            .series
            .iter()
            .map(|s| s.metrics.m_inf() - s.envelope)
            .fold(f64::NAN, f64::max);
        row.event = out.events.events().first().map_or(String::new(), |e| {
            serde_json::to_value(e.kind).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
        });
        Ok(())
    })();
    if let Err(e) = result {
        row.event = format!("error: {e:#}").replace([',', '\n'], ";");
    }
    row
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.replace(',', ";"),
        other => other.to_string().replace(',', ";"),
    }
}

/// Runs every grid point into `<output_dir>/run_NNN` and writes `<output_dir>/sweep.csv`.
pub fn sweep(base: Value, grid: &[(String, Vec<Value>)], out_dir: &Path) -> Result<usize> {
    let pts = points(grid);
    let rows: Vec<Row> = pts
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| run_point(&base, grid, p, &out_dir.join(format!("run_{i:03}"))))
        .collect();
    std::fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let path = out_dir.join("sweep.csv");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
    let keys: Vec<&str> = grid.iter().map(|(k, _)| k.as_str()).collect();
    writeln!(w, "run,{},final_B,final_M_inf,max_envelope_slack,event", keys.join(","))?;
    for (i, r) in rows.iter().enumerate() {
        let params: Vec<String> = r.params.iter().map(csv_value).collect();
        writeln!(
            w,
            "{i},{},{:e},{:e},{:e},{}",
            params.join(","),
            r.final_b,
            r.final_m_inf,
            r.max_envelope_slack,
            r.event
        )?;
    }
    w.flush()?;
    Ok(rows.len())
}

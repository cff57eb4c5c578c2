use std::io::{BufRead, Write};

use super::{Grid, GridFunction};
use crate::{Error, Real, Result};

/// Writes `x,value` rows with 17 significant digits.
pub fn write_csv<T: Real, W: Write>(g: &GridFunction<T>, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::Csv(e.to_string());
    writeln!(out, "x,value").map_err(io)?;
    for (x, v) in g.grid().nodes().into_iter().zip(g.values()) {
        writeln!(out, "{:.16e},{:.16e}", x.to_f64_lossy(), v.to_f64_lossy()).map_err(io)?;
    }
    Ok(())
}

/// Reads a two-column `x,value` file and reconstructs its grid from the `x` column.
pub fn read_csv<T: Real, R: BufRead>(input: R) -> Result<GridFunction<T>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Csv("empty input".into()))?
        .map_err(|e| Error::Csv(e.to_string()))?;
    if header.trim() != "x,value" {
        return Err(Error::Csv(format!("expected header `x,value`, found `{}`", header.trim())));
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Csv(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let mut field = |name: &str| -> Result<f64> {
            cols.next()
                .ok_or_else(|| Error::Csv(format!("row {}: missing {name}", i + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Csv(format!("row {}: {name}: {e}", i + 2)))
        };
        xs.push(field("x")?);
        vs.push(field("value")?);
    }
    if xs.is_empty() {
        return Err(Error::Csv("no data rows".into()));
    }
    let half_length = -xs[0];
    let grid = Grid::new(T::lit(half_length), xs.len())?;
    let tol = 1e-9 * half_length.abs().max(1.0);
    for (j, &x) in xs.iter().enumerate() {
        if (x - grid.node(j).to_f64_lossy()).abs() > tol {
            return Err(Error::Csv(format!(
                "row {}: x = {x} is not node {j} of the periodic grid on [{}, {})",
                j + 2,
                -half_length,
                half_length
            )));
        }
    }
    GridFunction::new(&grid, vs.into_iter().map(T::lit).collect())
}

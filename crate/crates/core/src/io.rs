//! Field serialization: `x,value` CSV plus a JSON sidecar with grid and tail metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid1D, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub grid: Grid1D,
    pub left_limit: f64,
    pub right_limit: f64,
    pub tail_power: Option<f64>,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Write `path` (CSV) and `path.with_extension("json")` (metadata).
pub fn write_field(f: &ScalarField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "value"])?;
    for (i, v) in f.values.iter().enumerate() {
        w.write_record([format!("{:e}", f.grid.x(i)), format!("{v:e}")])?;
    }
    w.flush()?;
    let meta = FieldMeta {
        grid: f.grid,
        left_limit: f.left_limit,
        right_limit: f.right_limit,
        tail_power: f.tail_power,
    };
    fs::write(sidecar(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let meta: FieldMeta = serde_json::from_str(&fs::read_to_string(sidecar(path))?)?;
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::with_capacity(meta.grid.n);
    for rec in r.records() {
        let rec = rec?;
        let v = rec
            .get(1)
            .ok_or_else(|| Error::InvalidArgument("CSV row without a value column".into()))?;
        values.push(
            v.trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidArgument(format!("bad value {v:?}: {e}")))?,
        );
    }
    ScalarField::new(meta.grid, values, meta.left_limit, meta.right_limit, meta.tail_power)
}

/// Write several columns sharing one `x` axis: header `x,<names...>`.
pub fn write_columns(path: &Path, grid: &Grid1D, columns: &[(&str, &[f64])]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x".to_string()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    w.write_record(&header)?;
    for i in 0..grid.n {
        let mut rec = vec![format!("{:e}", grid.x(i))];
        for (_, c) in columns {
            rec.push(format!("{:e}", c[i]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a single column of reals (optionally under a header) from CSV.
pub fn read_positions(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for line in text.lines() {
        let cell = line.split(',').next().unwrap_or("").trim();
        if cell.is_empty() {
            continue;
        }
        match cell.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if out.is_empty() => continue, // header
            Err(e) => return Err(Error::InvalidArgument(format!("bad position {cell:?}: {e}"))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid1D::new(0.0, 3.0, 16).unwrap();
        let f = ScalarField::from_fn(g, |x| x.atan(), -1.5, 1.5, Some(1.0)).unwrap();
        let path = dir.path().join("phi.csv");
        write_field(&f, &path).unwrap();
        let back = read_field(&path).unwrap();
        assert_eq!(back.grid, f.grid);
        assert_eq!(back.tail_power, Some(1.0));
        for (a, b) in back.values.iter().zip(&f.values) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("x,value\n"));
    }

    #[test]
    fn positions_skip_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        fs::write(&path, "y\n-1.0\n0.5\n2\n").unwrap();
        assert_eq!(read_positions(&path).unwrap(), vec![-1.0, 0.5, 2.0]);
    }
}

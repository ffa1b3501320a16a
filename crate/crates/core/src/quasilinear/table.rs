//! Operators defined by coefficient tables on rectangular grids.
//!
//! The table format mirrors the shared grid CSV layout: a short header
//! (`dim`, `shape`, `origin`, `spacing`), a `fields` row naming the
//! upper-triangle entries of `a` followed by `b`, a `values` marker, then one
//! row-major line of comma-separated numbers per grid node. Coefficients
//! depend on `x` only (multilinear interpolation); their `(r, p)`-derivatives
//! vanish identically.

use std::sync::Arc;

use thiserror::Error;

use crate::symkernel::SymMatrix;

use super::{CoeffMatrixDpFn, CoeffMatrixFn, CoeffScalarFn, CoeffVectorFn, QuasiLinearOperator};

#[derive(Debug, Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("table declares {expected} fields but row has {got} (line {line})")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("table has {got} value rows but shape requires {expected}")]
    RowCount { expected: usize, got: usize },
    #[error("fields row must list the a upper triangle then b; got {0:?}")]
    BadFields(Vec<String>),
}

struct CoefficientTable {
    dim: usize,
    shape: Vec<usize>,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    /// node-major rows, each `dim*(dim+1)/2 + 1` values: a upper triangle then b
    rows: Vec<Vec<f64>>,
}

impl CoefficientTable {
    fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// Clamped multilinear interpolation of every field at `x`.
    fn interpolate(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut base = vec![0usize; d];
        let mut frac = vec![0.0f64; d];
        for k in 0..d {
            let t = (x[k] - self.origin[k]) / self.spacing[k];
            let t = t.clamp(0.0, (self.shape[k] - 1) as f64);
            let i = (t.floor() as usize).min(self.shape[k].saturating_sub(2));
            base[k] = i;
            frac[k] = if self.shape[k] == 1 { 0.0 } else { t - i as f64 };
        }
        let fields = self.rows[0].len();
        let mut acc = vec![0.0; fields];
        // iterate over the 2^d corners of the containing cell
        for corner in 0..(1usize << d) {
            let mut weight = 1.0;
            let mut flat = 0usize;
            for k in 0..d {
                let hi = (corner >> k) & 1 == 1;
                let idx = base[k] + if hi && self.shape[k] > 1 { 1 } else { 0 };
                weight *= if hi { frac[k] } else { 1.0 - frac[k] };
                flat = flat * self.shape[k] + idx;
            }
            if weight == 0.0 {
                continue;
            }
            for (f, a) in acc.iter_mut().enumerate() {
                *a += weight * self.rows[flat][f];
            }
        }
        acc
    }
}

fn parse_table(text: &str) -> Result<CoefficientTable, TableError> {
    let mut dim = None;
    let mut shape = None;
    let mut origin = None;
    let mut spacing = None;
    let mut fields: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut in_values = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if in_values {
            let row: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse()).collect();
            let row = row.map_err(|e| TableError::Parse {
                line: line_no,
                message: format!("bad number: {e}"),
            })?;
            rows.push((line_no, row));
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let key = parts.next().unwrap_or("").trim();
        let rest = parts.next().unwrap_or("").trim();
        match key {
            "dim" => {
                dim = Some(rest.parse().map_err(|e| TableError::Parse {
                    line: line_no,
                    message: format!("bad dim: {e}"),
                })?)
            }
            "shape" => shape = Some(parse_list::<usize>(rest, line_no)?),
            "origin" => origin = Some(parse_list::<f64>(rest, line_no)?),
            "spacing" => spacing = Some(parse_list::<f64>(rest, line_no)?),
            "fields" => {
                fields = Some(rest.split(',').map(|s| s.trim().to_string()).collect());
            }
            "values" => in_values = true,
            other => {
                return Err(TableError::Parse {
                    line: line_no,
                    message: format!("unknown header key {other:?}"),
                })
            }
        }
    }

    let dim = dim.ok_or(TableError::Parse {
        line: 0,
        message: "missing dim".into(),
    })?;
    let shape = shape.ok_or(TableError::Parse {
        line: 0,
        message: "missing shape".into(),
    })?;
    let origin = origin.ok_or(TableError::Parse {
        line: 0,
        message: "missing origin".into(),
    })?;
    let spacing = spacing.ok_or(TableError::Parse {
        line: 0,
        message: "missing spacing".into(),
    })?;
    let fields = fields.ok_or(TableError::Parse {
        line: 0,
        message: "missing fields".into(),
    })?;

    let expected_fields = dim * (dim + 1) / 2 + 1;
    if fields.len() != expected_fields || fields.last().map(String::as_str) != Some("b") {
        return Err(TableError::BadFields(fields));
    }
    for (line, row) in &rows {
        if row.len() != expected_fields {
            return Err(TableError::FieldCount {
                line: *line,
                expected: expected_fields,
                got: row.len(),
            });
        }
    }
    let table = CoefficientTable {
        dim,
        shape,
        origin,
        spacing,
        rows: rows.into_iter().map(|(_, r)| r).collect(),
    };
    if table.rows.len() != table.node_count() {
        return Err(TableError::RowCount {
            expected: table.node_count(),
            got: table.rows.len(),
        });
    }
    Ok(table)
}

fn parse_list<T: std::str::FromStr>(rest: &str, line: usize) -> Result<Vec<T>, TableError>
where
    T::Err: std::fmt::Display,
{
    rest.split(',')
        .map(|v| {
            v.trim().parse::<T>().map_err(|e| TableError::Parse {
                line,
                message: format!("bad value {v:?}: {e}"),
            })
        })
        .collect()
}

/// Build a linear operator from a coefficient table. The interpolated upper
/// triangle is mirrored into a symmetric `a`; `b` is the last field.
pub fn operator_from_table(text: &str) -> Result<QuasiLinearOperator, TableError> {
    let table = Arc::new(parse_table(text)?);
    let m = table.dim;

    let t_a = table.clone();
    let a: CoeffMatrixFn = Arc::new(move |x, _r, _p| {
        let vals = t_a.interpolate(x);
        let mut flat = 0usize;
        let mut upper = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                upper[i][j] = vals[flat];
                flat += 1;
            }
        }
        SymMatrix::from_fn(m, |i, j| upper[i][j])
    });
    let t_b = table.clone();
    let b: CoeffScalarFn = Arc::new(move |x, _r, _p| *t_b.interpolate(x).last().unwrap());
    let da_dr: CoeffMatrixFn = Arc::new(move |_x, _r, _p| SymMatrix::zeros(m));
    let da_dp: CoeffMatrixDpFn = Arc::new(move |_x, _r, _p, _k| SymMatrix::zeros(m));
    let db_dr: CoeffScalarFn = Arc::new(|_x, _r, _p| 0.0);
    let db_dp: CoeffVectorFn = Arc::new(move |_x, _r, _p| vec![0.0; m]);
    Ok(QuasiLinearOperator::new(m, "table", a, b)
        .with_analytic_derivatives(da_dr, da_dp, db_dr, db_dp))
}

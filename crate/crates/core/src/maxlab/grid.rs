//! Axis-aligned rectangular grid functions: the discrete stand-in for the
//! semicontinuous comparands, with centered finite-difference jets and the
//! shared CSV interchange format.

use thiserror::Error;

use crate::quasilinear::Jet2;
use crate::symkernel::SymMatrix;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("shape product {product} does not match {got} values")]
    ShapeMismatch { product: usize, got: usize },
    #[error("grid metadata lengths disagree: origin {origin}, spacing {spacing}, shape {shape}")]
    MetadataMismatch {
        origin: usize,
        spacing: usize,
        shape: usize,
    },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("spacing must be positive on every axis")]
    BadSpacing,
    #[error("every axis needs at least 2 nodes, got {0:?}")]
    DegenerateAxis(Vec<usize>),
    #[error("node {0:?} is not interior; finite-difference stencils need one-node margins")]
    NotInterior(Vec<usize>),
    #[error("index {index:?} out of bounds for shape {shape:?}")]
    OutOfBounds { index: Vec<usize>, shape: Vec<usize> },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
}

/// Nodal real values on a rectangular grid, row-major with the last axis
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        if origin.len() != spacing.len() || origin.len() != shape.len() {
            return Err(GridError::MetadataMismatch {
                origin: origin.len(),
                spacing: spacing.len(),
                shape: shape.len(),
            });
        }
        if spacing.iter().any(|&h| !(h > 0.0)) {
            return Err(GridError::BadSpacing);
        }
        if shape.iter().any(|&n| n < 2) {
            return Err(GridError::DegenerateAxis(shape));
        }
        let product: usize = shape.iter().product();
        if product != values.len() {
            return Err(GridError::ShapeMismatch {
                product,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(bad));
        }
        Ok(GridFunction {
            origin,
            spacing,
            shape,
            values,
        })
    }

    /// Sample `f` at every node.
    pub fn from_fn(
        origin: Vec<f64>,
        spacing: Vec<f64>,
        shape: Vec<usize>,
        f: impl Fn(&[f64]) -> f64,
    ) -> Result<Self, GridError> {
        let mut grid = GridFunction::new(
            origin,
            spacing,
            shape.clone(),
            vec![0.0; shape.iter().product()],
        )?;
        for flat in 0..grid.values.len() {
            let idx = grid.unflatten(flat);
            let x = grid.coords(&idx);
            grid.values[flat] = f(&x);
        }
        if let Some(bad) = grid.values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(bad));
        }
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn node_count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Matching layout: same origin, spacing and shape up to exact equality.
    pub fn layout_matches(&self, other: &GridFunction) -> bool {
        self.origin == other.origin && self.spacing == other.spacing && self.shape == other.shape
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim());
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            flat = flat * self.shape[k] + i;
        }
        flat
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[self.flatten(idx)]
    }

    pub fn coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.origin[k] + self.spacing[k] * i as f64)
            .collect()
    }

    /// Row-major iteration over all node indices.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.node_count()).map(|flat| self.unflatten(flat))
    }

    /// Interior nodes have a one-node margin on every axis, so centered
    /// second-order stencils fit.
    pub fn is_interior(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.shape)
            .all(|(&i, &n)| i >= 1 && i + 1 < n)
    }

    fn check_interior(&self, idx: &[usize]) -> Result<(), GridError> {
        for (&i, &n) in idx.iter().zip(&self.shape) {
            if i >= n {
                return Err(GridError::OutOfBounds {
                    index: idx.to_vec(),
                    shape: self.shape.clone(),
                });
            }
        }
        if !self.is_interior(idx) {
            return Err(GridError::NotInterior(idx.to_vec()));
        }
        Ok(())
    }

    fn shifted(&self, idx: &[usize], axis: usize, step: isize) -> f64 {
        let mut idx = idx.to_vec();
        idx[axis] = (idx[axis] as isize + step) as usize;
        self.value(&idx)
    }

    /// Centered first derivatives at an interior node.
    pub fn fd_gradient(&self, idx: &[usize]) -> Result<Vec<f64>, GridError> {
        self.check_interior(idx)?;
        Ok((0..self.dim())
            .map(|k| {
                (self.shifted(idx, k, 1) - self.shifted(idx, k, -1)) / (2.0 * self.spacing[k])
            })
            .collect())
    }

    /// Centered second-order Hessian at an interior node; mixed entries use
    /// the four-corner stencil.
    pub fn fd_hessian(&self, idx: &[usize]) -> Result<SymMatrix, GridError> {
        self.check_interior(idx)?;
        let d = self.dim();
        let center = self.value(idx);
        Ok(SymMatrix::from_fn(d, |k, l| {
            if k == l {
                (self.shifted(idx, k, 1) - 2.0 * center + self.shifted(idx, k, -1))
                    / (self.spacing[k] * self.spacing[k])
            } else {
                let mut pp = idx.to_vec();
                pp[k] += 1;
                pp[l] += 1;
                let mut pm = idx.to_vec();
                pm[k] += 1;
                pm[l] -= 1;
                let mut mp = idx.to_vec();
                mp[k] -= 1;
                mp[l] += 1;
                let mut mm = idx.to_vec();
                mm[k] -= 1;
                mm[l] -= 1;
                (self.value(&pp) - self.value(&pm) - self.value(&mp) + self.value(&mm))
                    / (4.0 * self.spacing[k] * self.spacing[l])
            }
        }))
    }

    /// Finite-difference second-order jet at an interior node.
    pub fn fd_jet(&self, idx: &[usize]) -> Result<Jet2, GridError> {
        let x = self.coords(idx);
        let r = self.value(idx);
        let p = self.fd_gradient(idx)?;
        let hess = self.fd_hessian(idx)?;
        Ok(Jet2::new(x, r, p, hess).expect("grid jet dimensions are consistent"))
    }

    /// Serialize in the shared grid CSV format.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("dim,{}\n", self.dim()));
        out.push_str(&format!("shape,{}\n", join(&self.shape)));
        out.push_str(&format!("origin,{}\n", join_f64(&self.origin)));
        out.push_str(&format!("spacing,{}\n", join_f64(&self.spacing)));
        out.push_str("values\n");
        let row_len = *self.shape.last().expect("dim >= 1");
        for chunk in self.values.chunks(row_len) {
            out.push_str(&join_f64(chunk));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let mut dim: Option<usize> = None;
        let mut shape: Option<Vec<usize>> = None;
        let mut origin: Option<Vec<f64>> = None;
        let mut spacing: Option<Vec<f64>> = None;
        let mut values = Vec::new();
        let mut in_values = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let line_no = lineno + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if in_values {
                for tok in line.split(',') {
                    let v: f64 = tok.trim().parse().map_err(|e| GridError::Csv {
                        line: line_no,
                        message: format!("bad value {tok:?}: {e}"),
                    })?;
                    values.push(v);
                }
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let key = parts.next().unwrap_or("").trim();
            let rest = parts.next().unwrap_or("").trim();
            match key {
                "dim" => {
                    dim = Some(rest.parse().map_err(|e| GridError::Csv {
                        line: line_no,
                        message: format!("bad dim: {e}"),
                    })?)
                }
                "shape" => {
                    shape = Some(
                        rest.split(',')
                            .map(|t| {
                                t.trim().parse().map_err(|e| GridError::Csv {
                                    line: line_no,
                                    message: format!("bad shape entry {t:?}: {e}"),
                                })
                            })
                            .collect::<Result<_, _>>()?,
                    )
                }
                "origin" | "spacing" => {
                    let parsed: Vec<f64> = rest
                        .split(',')
                        .map(|t| {
                            t.trim().parse().map_err(|e| GridError::Csv {
                                line: line_no,
                                message: format!("bad {key} entry {t:?}: {e}"),
                            })
                        })
                        .collect::<Result<_, _>>()?;
                    if key == "origin" {
                        origin = Some(parsed);
                    } else {
                        spacing = Some(parsed);
                    }
                }
                "values" => in_values = true,
                other => {
                    return Err(GridError::Csv {
                        line: line_no,
                        message: format!("unknown header key {other:?}"),
                    })
                }
            }
        }
        let missing = |what: &str| GridError::Csv {
            line: 0,
            message: format!("missing {what}"),
        };
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let shape = shape.ok_or_else(|| missing("shape"))?;
        let origin = origin.ok_or_else(|| missing("origin"))?;
        let spacing = spacing.ok_or_else(|| missing("spacing"))?;
        if shape.len() != dim {
            return Err(GridError::Csv {
                line: 0,
                message: format!("dim {dim} disagrees with shape length {}", shape.len()),
            });
        }
        GridFunction::new(origin, spacing, shape, values)
    }
}

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn join_f64(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quadratic_grid() -> GridFunction {
        GridFunction::from_fn(
            vec![-1.0, -1.0],
            vec![0.1, 0.1],
            vec![21, 21],
            |x| 2.0 * x[0] * x[0] - x[0] * x[1] + 0.5 * x[1] * x[1] + 3.0 * x[0] - x[1] + 0.25,
        )
        .unwrap()
    }

    #[test]
    fn fd_jet_is_exact_on_quadratics() {
        let grid = quadratic_grid();
        let idx = vec![7, 12];
        let jet = grid.fd_jet(&idx).unwrap();
        let x = grid.coords(&idx);
        assert_abs_diff_eq!(jet.p[0], 4.0 * x[0] - x[1] + 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.p[1], -x[0] + x[1] - 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.hess.get(0, 0), 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(jet.hess.get(0, 1), -1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(jet.hess.get(1, 1), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn boundary_nodes_are_rejected() {
        let grid = quadratic_grid();
        assert!(matches!(
            grid.fd_jet(&[0, 5]),
            Err(GridError::NotInterior(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let grid = quadratic_grid();
        let text = grid.to_csv();
        let back = GridFunction::from_csv(&text).unwrap();
        assert_eq!(grid, back);
    }

    #[test]
    fn csv_error_carries_line_number() {
        let bad = "dim,2\nshape,2,2\norigin,0,0\nspacing,1,1\nvalues\n1,2\n3,oops\n";
        match GridFunction::from_csv(bad) {
            Err(GridError::Csv { line, .. }) => assert_eq!(line, 7),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_detected() {
        let err = GridFunction::new(vec![0.0], vec![1.0], vec![3], vec![1.0, 2.0]).unwrap_err();
        assert!(matches!(err, GridError::ShapeMismatch { .. }));
    }
}

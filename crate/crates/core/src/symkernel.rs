//! Small dense symmetric-matrix kernel: orderings, eigenvalue bounds and the
//! trace-bound lemma underlying all Hessian estimates.
//!
//! Everything here is sized for chart-dimension Hessians (dims well below 16),
//! so a dense symmetric eigen-solver is used throughout.

use nalgebra::DMatrix;
use serde_json::json;
use thiserror::Error;

use crate::report::{Verdict, VerificationReport};

/// Default tolerance for positive-semidefinite comparisons. Finite-difference
/// Hessians carry truncation error, so exact PSD tests are too brittle.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SymKernelError {
    #[error("dimension mismatch: {0}x{0} vs {1}x{1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix entries are not symmetric at ({i},{j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("matrix is singular or ill-conditioned (cond estimate {0:.3e})")]
    IllConditioned(f64),
    #[error("dimension must be at least 1")]
    EmptyMatrix,
}

/// Dense symmetric matrix with exactly mirrored storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dim must be at least 1");
        SymMatrix {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dim must be at least 1");
        SymMatrix {
            data: DMatrix::identity(dim, dim),
        }
    }

    /// Build from the upper triangle of `f`; entries below the diagonal are
    /// mirrored so the invariant `m[i][j] == m[j][i]` holds exactly as stored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(dim >= 1, "dim must be at least 1");
        let mut data = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        SymMatrix { data }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    /// Validate an explicitly supplied square array. Symmetry must hold
    /// bit-for-bit; callers with noisy data should symmetrize first.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SymKernelError> {
        let n = rows.len();
        if n == 0 {
            return Err(SymKernelError::EmptyMatrix);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SymKernelError::DimensionMismatch(n, row.len()));
            }
            for j in 0..n {
                if rows[i][j] != rows[j][i] {
                    return Err(SymKernelError::NotSymmetric {
                        i,
                        j,
                        a: rows[i][j],
                        b: rows[j][i],
                    });
                }
            }
        }
        Ok(SymMatrix {
            data: DMatrix::from_fn(n, n, |i, j| rows[i][j]),
        })
    }

    /// Symmetrize an arbitrary square matrix by averaging off-diagonal pairs.
    pub fn symmetrize(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        assert_eq!(n, m.ncols());
        Self::from_fn(n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[(i, j)] = v;
        self.data[(j, i)] = v;
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// `max_{i,j} |m[i][j]|`, the entrywise Hessian norm `|D²φ|`.
    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    /// `trace(self · other)`; symmetric inputs make this Σ aᵢⱼ bᵢⱼ.
    pub fn trace_product(&self, other: &SymMatrix) -> Result<f64, SymKernelError> {
        if self.dim() != other.dim() {
            return Err(SymKernelError::DimensionMismatch(self.dim(), other.dim()));
        }
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.data[(i, j)] * other.data[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Quadratic form `ξᵀ M ξ`.
    pub fn quadratic_form(&self, xi: &[f64]) -> f64 {
        assert_eq!(xi.len(), self.dim());
        let mut acc = 0.0;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.data[(i, j)] * xi[i] * xi[j];
            }
        }
        acc
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = self.data.clone().symmetric_eigen();
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        values
    }

    pub fn spectral_bounds(&self) -> SpectralBounds {
        let values = self.eigenvalues();
        SpectralBounds {
            lambda_min: values[0],
            lambda_max: *values.last().expect("dim >= 1"),
        }
    }

    /// Inverse with a condition-number guard (ratio of extreme |eigenvalues|).
    pub fn try_inverse(&self, cond_guard: f64) -> Result<SymMatrix, SymKernelError> {
        let values = self.eigenvalues();
        let max_abs = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let min_abs = values.iter().fold(f64::INFINITY, |a, v| a.min(v.abs()));
        if min_abs == 0.0 || max_abs / min_abs > cond_guard {
            return Err(SymKernelError::IllConditioned(if min_abs == 0.0 {
                f64::INFINITY
            } else {
                max_abs / min_abs
            }));
        }
        let inv = self
            .data
            .clone()
            .try_inverse()
            .ok_or(SymKernelError::IllConditioned(f64::INFINITY))?;
        Ok(SymMatrix::symmetrize(&inv))
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix {
            data: &self.data * c,
        }
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), other.dim());
        SymMatrix {
            data: &self.data + &other.data,
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.dim(), other.dim());
        SymMatrix {
            data: &self.data - &other.data,
        }
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.data[(i, j)]).collect())
            .collect()
    }
}

/// Extreme eigenvalues of a symmetric matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// Matrix ordering `A ≤ B`: true iff every eigenvalue of `B − A` is `≥ −tol`.
pub fn psd_ordering(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool, SymKernelError> {
    if a.dim() != b.dim() {
        return Err(SymKernelError::DimensionMismatch(a.dim(), b.dim()));
    }
    let diff = b.sub(a);
    Ok(diff.spectral_bounds().lambda_min >= -tol)
}

/// Trace-bound lemma check: under `(1/c1)I ≤ A ≤ c2·I`, `B ≥ −c3·I` and
/// `trace(AB) ≤ c4`, the conclusion `B ≤ c1((n−1)c2c3 + c4)·I` must hold.
///
/// Hypothesis violations are reported as `hypothesis-failure`, which is a
/// statement about the inputs. A `conclusion-failure` would falsify the lemma
/// itself and must never occur.
pub fn trace_bound_check(
    a: &SymMatrix,
    b: &SymMatrix,
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
    tol: f64,
) -> Result<VerificationReport, SymKernelError> {
    if a.dim() != b.dim() {
        return Err(SymKernelError::DimensionMismatch(a.dim(), b.dim()));
    }
    for (name, value) in [("c1", c1), ("c2", c2), ("c3", c3), ("c4", c4)] {
        if !(value > 0.0) {
            return Ok(VerificationReport::new(
                "symkernel/trace-bound",
                Verdict::HypothesisFailure,
            )
            .with_witness(json!({ "violated": format!("{name} must be positive"), name: value })));
        }
    }

    let n = a.dim();
    let a_bounds = a.spectral_bounds();
    let b_bounds = b.spectral_bounds();
    let trace_ab = a.trace_product(b)?;

    let params = json!({ "n": n, "c1": c1, "c2": c2, "c3": c3, "c4": c4, "tol": tol });
    let mut violated = Vec::new();
    if a_bounds.lambda_min < 1.0 / c1 - tol {
        violated.push("lower bound (1/c1)I <= A");
    }
    if a_bounds.lambda_max > c2 + tol {
        violated.push("upper bound A <= c2 I");
    }
    if b_bounds.lambda_min < -c3 - tol {
        violated.push("lower bound B >= -c3 I");
    }
    if trace_ab > c4 + tol {
        violated.push("trace(AB) <= c4");
    }
    if !violated.is_empty() {
        return Ok(VerificationReport::new(
            "symkernel/trace-bound",
            Verdict::HypothesisFailure,
        )
        .with_witness(json!({
            "violated": violated,
            "lambda_min_a": a_bounds.lambda_min,
            "lambda_max_a": a_bounds.lambda_max,
            "lambda_min_b": b_bounds.lambda_min,
            "trace_ab": trace_ab,
        }))
        .with_params(params));
    }

    let bound = c1 * ((n as f64 - 1.0) * c2 * c3 + c4);
    let margin = bound - b_bounds.lambda_max;
    let verdict = if margin >= -tol {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    Ok(VerificationReport::new("symkernel/trace-bound", verdict)
        .with_residual("margin", margin)
        .with_residual("bound", bound)
        .with_witness(json!({ "lambda_max_b": b_bounds.lambda_max }))
        .with_params(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn psd_ordering_identity_examples() {
        let zero = SymMatrix::zeros(2);
        let id = SymMatrix::identity(2);
        assert!(psd_ordering(&zero, &id, 0.0).unwrap());
        assert!(!psd_ordering(&id, &zero, 0.0).unwrap());
    }

    #[test]
    fn psd_ordering_indefinite_difference() {
        // B - A = diag(1, -1), eigenvalues {1, -1}
        let a = SymMatrix::diagonal(&[1.0, 3.0]);
        let b = SymMatrix::diagonal(&[2.0, 2.0]);
        assert!(!psd_ordering(&a, &b, 0.0).unwrap());
        let diff = b.sub(&a);
        let eig = diff.eigenvalues();
        assert_abs_diff_eq!(eig[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psd_ordering_dimension_mismatch() {
        let a = SymMatrix::identity(2);
        let b = SymMatrix::identity(3);
        assert!(matches!(
            psd_ordering(&a, &b, 0.0),
            Err(SymKernelError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn max_abs_entry_examples() {
        assert_eq!(SymMatrix::diagonal(&[2.0, -1.0]).max_abs_entry(), 2.0);
        let m = SymMatrix::from_rows(&[vec![0.0, -3.0], vec![-3.0, 1.0]]).unwrap();
        assert_eq!(m.max_abs_entry(), 3.0);
        assert_eq!(SymMatrix::zeros(3).max_abs_entry(), 0.0);
    }

    #[test]
    fn from_rows_rejects_asymmetry() {
        let rows = vec![vec![1.0, 2.0], vec![2.0 + 1e-13, 1.0]];
        assert!(matches!(
            SymMatrix::from_rows(&rows),
            Err(SymKernelError::NotSymmetric { .. })
        ));
    }

    #[test]
    fn trace_bound_one_dimensional_case() {
        // n = 1: the (n-1)-term vanishes and the bound is b <= c1*c4.
        let a = SymMatrix::diagonal(&[2.0]); // 1/c1 = 1/2 <= 2 <= c2 = 2
        let b = SymMatrix::diagonal(&[1.5]); // trace(AB) = 3 <= c4 = 3
        let report = trace_bound_check(&a, &b, 2.0, 2.0, 1.0, 3.0, 1e-12).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        // bound = c1*c4 = 6, witness eigenvalue 1.5
        assert_abs_diff_eq!(report.residuals["bound"], 6.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_bound_hand_solved_two_dimensional_case() {
        // A = I, B = diag(-c3, beta), c1 = c2 = 1: trace(AB) = -c3 + beta,
        // so beta <= c3 + c4 whenever -c3 + beta <= c4.
        let c3 = 0.7;
        let c4 = 1.3;
        let beta = c3 + c4 - 0.05;
        let a = SymMatrix::identity(2);
        let b = SymMatrix::diagonal(&[-c3, beta]);
        let report = trace_bound_check(&a, &b, 1.0, 1.0, c3, c4, 1e-12).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_abs_diff_eq!(report.residuals["margin"], 0.05, epsilon = 1e-12);
    }

    #[test]
    fn trace_bound_reports_hypothesis_failure() {
        let a = SymMatrix::diagonal(&[10.0, 1.0]); // violates A <= c2 I for c2 = 2
        let b = SymMatrix::zeros(2);
        let report = trace_bound_check(&a, &b, 1.0, 2.0, 1.0, 1.0, 1e-12).unwrap();
        assert_eq!(report.verdict, Verdict::HypothesisFailure);
    }

    #[test]
    fn inverse_guard_rejects_singular() {
        let m = SymMatrix::diagonal(&[1.0, 0.0]);
        assert!(m.try_inverse(1e12).is_err());
    }
}

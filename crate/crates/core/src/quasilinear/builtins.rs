//! Built-in operators: the Laplacian and the flat-chart mean-curvature
//! operator for spacelike graphs over Minkowski space.

use std::sync::Arc;

use crate::symkernel::SymMatrix;

use super::{CoeffMatrixDpFn, CoeffMatrixFn, CoeffScalarFn, CoeffVectorFn, QuasiLinearOperator};

/// `Δu = Σ D_ii u`: `a = I`, `b = 0`, all coefficient derivatives vanish.
pub fn laplacian(m: usize) -> QuasiLinearOperator {
    let a: CoeffMatrixFn = Arc::new(move |_x, _r, _p| SymMatrix::identity(m));
    let b: CoeffScalarFn = Arc::new(|_x, _r, _p| 0.0);
    let da_dr: CoeffMatrixFn = Arc::new(move |_x, _r, _p| SymMatrix::zeros(m));
    let da_dp: CoeffMatrixDpFn = Arc::new(move |_x, _r, _p, _k| SymMatrix::zeros(m));
    let db_dr: CoeffScalarFn = Arc::new(|_x, _r, _p| 0.0);
    let db_dp: CoeffVectorFn = Arc::new(move |_x, _r, _p| vec![0.0; m]);
    QuasiLinearOperator::new(m, "laplacian", a, b)
        .with_analytic_derivatives(da_dr, da_dp, db_dr, db_dp)
}

/// Mean-curvature operator of a spacelike graph `x^n = f(x)` over flat
/// Minkowski space, chart dimension `m = n − 1`:
///
/// `aᶦʲ = Gᶦʲ / (m·W)` with `G = I − p pᵀ`, `W = √(1 − ‖p‖²)`, and `b = 0`.
///
/// `Gᶦʲ = δᵢⱼ + pᵢpⱼ/W²` by the rank-one inverse formula. Coefficient
/// derivatives in `p` are supplied analytically; the `r`-derivatives vanish.
pub fn flat_mean_curvature(m: usize) -> QuasiLinearOperator {
    let a: CoeffMatrixFn = Arc::new(move |_x, _r, p| flat_a(m, p));
    let b: CoeffScalarFn = Arc::new(|_x, _r, _p| 0.0);
    let da_dr: CoeffMatrixFn = Arc::new(move |_x, _r, _p| SymMatrix::zeros(m));
    let da_dp: CoeffMatrixDpFn = Arc::new(move |_x, _r, p, k| flat_da_dp(m, p, k));
    let db_dr: CoeffScalarFn = Arc::new(|_x, _r, _p| 0.0);
    let db_dp: CoeffVectorFn = Arc::new(move |_x, _r, _p| vec![0.0; m]);
    QuasiLinearOperator::new(m, "flat-mean-curvature", a, b)
        .with_analytic_derivatives(da_dr, da_dp, db_dr, db_dp)
}

fn w_sq(p: &[f64]) -> f64 {
    1.0 - p.iter().map(|v| v * v).sum::<f64>()
}

fn flat_a(m: usize, p: &[f64]) -> SymMatrix {
    let w2 = w_sq(p);
    assert!(w2 > 0.0, "gradient is not spacelike: 1 - ||p||^2 = {w2}");
    let w = w2.sqrt();
    SymMatrix::from_fn(m, |i, j| {
        let kron = if i == j { 1.0 } else { 0.0 };
        (kron + p[i] * p[j] / w2) / (m as f64 * w)
    })
}

/// ∂aᶦʲ/∂pᵏ for the flat operator. With `W² = 1 − ‖p‖²`:
/// ∂/∂pᵏ [ (δᵢⱼ + pᵢpⱼ/W²) / (mW) ]
///   = [ (δᵢₖpⱼ + δⱼₖpᵢ)/W² + 2pᵢpⱼpₖ/W⁴ ] / (mW)
///     + pₖ (δᵢⱼ + pᵢpⱼ/W²) / (mW³).
fn flat_da_dp(m: usize, p: &[f64], k: usize) -> SymMatrix {
    let w2 = w_sq(p);
    assert!(w2 > 0.0, "gradient is not spacelike: 1 - ||p||^2 = {w2}");
    let w = w2.sqrt();
    let mf = m as f64;
    SymMatrix::from_fn(m, |i, j| {
        let kron_ij = if i == j { 1.0 } else { 0.0 };
        let kron_ik = if i == k { 1.0 } else { 0.0 };
        let kron_jk = if j == k { 1.0 } else { 0.0 };
        let numerator_part =
            (kron_ik * p[j] + kron_jk * p[i]) / w2 + 2.0 * p[i] * p[j] * p[k] / (w2 * w2);
        let w_part = p[k] * (kron_ij + p[i] * p[j] / w2) / (mf * w2 * w);
        numerator_part / (mf * w) + w_part
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_a_at_zero_gradient() {
        // W = 1, G = I: a = I/m
        let a = flat_a(2, &[0.0, 0.0]);
        assert_abs_diff_eq!(a.get(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.get(0, 1), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn flat_a_matches_hand_computed_values() {
        // Df = (0.6, 0): W = 0.8, G = diag(0.64, 1), a = G^{-1} / (2 * 0.8)
        let a = flat_a(2, &[0.6, 0.0]);
        assert_abs_diff_eq!(a.get(0, 0), 1.0 / (0.64 * 1.6), epsilon = 1e-14);
        assert_abs_diff_eq!(a.get(1, 1), 1.0 / 1.6, epsilon = 1e-14);
        assert_abs_diff_eq!(a.get(0, 1), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn analytic_dp_derivative_matches_finite_differences() {
        let m = 3;
        let p = [0.3, -0.2, 0.4];
        let h = 1e-6;
        for k in 0..m {
            let analytic = flat_da_dp(m, &p, k);
            let mut plus = p;
            plus[k] += h;
            let mut minus = p;
            minus[k] -= h;
            let fd = flat_a(m, &plus).sub(&flat_a(m, &minus)).scaled(0.5 / h);
            assert!(
                analytic.sub(&fd).max_abs_entry() < 1e-8,
                "k={k}: analytic vs FD mismatch {}",
                analytic.sub(&fd).max_abs_entry()
            );
        }
    }
}

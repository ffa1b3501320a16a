//! Numerical curvature of pseudo-metric charts: Riemann, Ricci, scalar and
//! Weyl tensors from (Richardson-extrapolated) finite differences of the
//! metric components, plus pseudo-norms, the conformal transformation law,
//! the product-metric norm decomposition and the Schur residual.
//!
//! Conventions: `R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db}
//! − Γ^a_{de}Γ^e_{cb}`, lowered as `R_{abcd} = g_{ae}R^e_{bcd}`, Ricci
//! `R_{bd} = R^c_{bcd}`. A space of constant curvature `K` then has
//! `R_{abcd} = K (g_{ac} g_{bd} − g_{ad} g_{bc})` and the sectional curvature
//! of a nondegenerate plane spanned by `u, v` is
//! `R(u,v,u,v) / (g(u,u)g(v,v) − g(u,v)²)`.

pub mod checks;
pub mod metrics;

pub use checks::{
    conformal_transform_check, product_norm_decomposition, schur_residual, SchurResidual,
};

use std::sync::Arc;

use thiserror::Error;

use crate::symkernel::{SymKernelError, SymMatrix};

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("metric is singular or ill-conditioned at the evaluation point: {0}")]
    SingularMetric(#[from] SymKernelError),
    #[error("Riemann symmetry residual {residual:.3e} exceeds {allowed:.3e}")]
    SymmetryResidual { residual: f64, allowed: f64 },
    #[error("Weyl tensor requires dimension >= 4, got {0}")]
    DimensionTooSmall(usize),
    #[error("metric is not a time-product at this point (residual {residual:.3e})")]
    NonProduct { residual: f64 },
    #[error("orthonormal frame construction failed: {0}")]
    FrameFailed(String),
    #[error("all sampled 2-planes were degenerate")]
    DegeneratePlanes,
}

type MetricFn = Arc<dyn Fn(&[f64]) -> SymMatrix + Send + Sync>;
/// Scalar field evaluator, e.g. a conformal factor.
pub type ScalarFieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type MetricDerivFn = Arc<dyn Fn(&[f64], usize) -> SymMatrix + Send + Sync>;
type MetricSecondDerivFn = Arc<dyn Fn(&[f64], usize, usize) -> SymMatrix + Send + Sync>;

/// A pseudo-metric on a single chart: component evaluator plus optional
/// analytic first and second derivatives. Signature is arbitrary; the only
/// requirement is invertibility where evaluated.
#[derive(Clone)]
pub struct MetricField {
    n: usize,
    name: String,
    g: MetricFn,
    dg: Option<MetricDerivFn>,
    d2g: Option<MetricSecondDerivFn>,
}

impl MetricField {
    pub fn new(n: usize, name: impl Into<String>, g: MetricFn) -> Self {
        assert!(n >= 2);
        MetricField {
            n,
            name: name.into(),
            g,
            dg: None,
            d2g: None,
        }
    }

    pub fn with_analytic_derivatives(
        mut self,
        dg: MetricDerivFn,
        d2g: MetricSecondDerivFn,
    ) -> Self {
        self.dg = Some(dg);
        self.d2g = Some(d2g);
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.dg.is_some() && self.d2g.is_some()
    }

    pub fn at(&self, x: &[f64]) -> SymMatrix {
        (self.g)(x)
    }

    pub fn inverse_at(&self, x: &[f64]) -> Result<SymMatrix, CurvatureError> {
        Ok(self.at(x).try_inverse(1e12)?)
    }

    /// `∂_axis g` — analytic, or centered differences with one Richardson
    /// step.
    pub fn derivative(&self, x: &[f64], axis: usize, h: f64) -> SymMatrix {
        if let Some(dg) = &self.dg {
            return dg(x, axis);
        }
        let coarse = self.central_difference(x, axis, h);
        let fine = self.central_difference(x, axis, 0.5 * h);
        fine.scaled(4.0 / 3.0).sub(&coarse.scaled(1.0 / 3.0))
    }

    fn central_difference(&self, x: &[f64], axis: usize, h: f64) -> SymMatrix {
        let mut xp = x.to_vec();
        xp[axis] += h;
        let mut xm = x.to_vec();
        xm[axis] -= h;
        self.at(&xp).sub(&self.at(&xm)).scaled(0.5 / h)
    }

    /// `∂²_{ab} g` — analytic, or Richardson-extrapolated centered stencils.
    pub fn second_derivative(&self, x: &[f64], a: usize, b: usize, h: f64) -> SymMatrix {
        if let Some(d2g) = &self.d2g {
            return d2g(x, a, b);
        }
        if let Some(dg) = &self.dg {
            // differentiate the analytic first derivative
            let mut xp = x.to_vec();
            xp[a] += h;
            let mut xm = x.to_vec();
            xm[a] -= h;
            let coarse = dg(&xp, b).sub(&dg(&xm, b)).scaled(0.5 / h);
            let mut xp2 = x.to_vec();
            xp2[a] += 0.5 * h;
            let mut xm2 = x.to_vec();
            xm2[a] -= 0.5 * h;
            let fine = dg(&xp2, b).sub(&dg(&xm2, b)).scaled(1.0 / h);
            return fine.scaled(4.0 / 3.0).sub(&coarse.scaled(1.0 / 3.0));
        }
        let coarse = self.second_stencil(x, a, b, h);
        let fine = self.second_stencil(x, a, b, 0.5 * h);
        fine.scaled(4.0 / 3.0).sub(&coarse.scaled(1.0 / 3.0))
    }

    fn second_stencil(&self, x: &[f64], a: usize, b: usize, h: f64) -> SymMatrix {
        if a == b {
            let mut xp = x.to_vec();
            xp[a] += h;
            let mut xm = x.to_vec();
            xm[a] -= h;
            self.at(&xp)
                .add(&self.at(&xm))
                .sub(&self.at(x).scaled(2.0))
                .scaled(1.0 / (h * h))
        } else {
            let shift = |da: f64, db: f64| {
                let mut y = x.to_vec();
                y[a] += da;
                y[b] += db;
                self.at(&y)
            };
            shift(h, h)
                .sub(&shift(h, -h))
                .sub(&shift(-h, h))
                .add(&shift(-h, -h))
                .scaled(1.0 / (4.0 * h * h))
        }
    }
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("analytic", &self.has_analytic_derivatives())
            .finish_non_exhaustive()
    }
}

/// Dense rank-4 tensor of components on an `n`-dimensional chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Tensor4::zeros(n);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        t.set(a, b, c, d, f(a, b, c, d));
                    }
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Tensor4 {
        Tensor4 {
            n: self.n,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &Tensor4) -> Tensor4 {
        assert_eq!(self.n, other.n);
        Tensor4 {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

/// Riemann, Ricci, scalar and Weyl at a point, with the measured symmetry
/// residual of the assembled Riemann tensor.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub riemann: Tensor4,
    pub ricci: SymMatrix,
    pub scalar: f64,
    /// zero tensor below dimension 4, where Weyl vanishes identically
    pub weyl: Tensor4,
    pub symmetry_residual: f64,
}

/// Default finite-difference step for the curvature pipeline.
pub const DEFAULT_CURVATURE_H: f64 = 1e-3;

/// Compute the curvature bundle at `x`. Metric partials come from analytic
/// closures when supplied, otherwise from Richardson-extrapolated centered
/// differences with step `h_fd`. Fails when the assembled Riemann tensor
/// violates its pair symmetries beyond `100 × (10 h_fd² + 1e−10)` relative to
/// its magnitude.
pub fn curvature(
    metric: &MetricField,
    x: &[f64],
    h_fd: f64,
) -> Result<CurvatureBundle, CurvatureError> {
    let n = metric.dim();
    let g = metric.at(x);
    let g_inv = metric.inverse_at(x)?;

    let dg: Vec<SymMatrix> = (0..n).map(|c| metric.derivative(x, c, h_fd)).collect();
    let mut d2g = vec![vec![SymMatrix::zeros(n); n]; n];
    for a in 0..n {
        for b in a..n {
            let value = metric.second_derivative(x, a, b, h_fd);
            d2g[a][b] = value.clone();
            d2g[b][a] = value;
        }
    }

    // Γ^a_{bc}
    let mut gamma = vec![0.0; n * n * n];
    let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut sum = 0.0;
                for d in 0..n {
                    sum += g_inv.get(a, d) * (dg[b].get(d, c) + dg[c].get(d, b) - dg[d].get(b, c));
                }
                gamma[idx3(a, b, c)] = 0.5 * sum;
                gamma[idx3(a, c, b)] = 0.5 * sum;
            }
        }
    }

    // ∂_e Γ^a_{bc} assembled from metric partials:
    // ∂_e g^{ad} = −g^{af} (∂_e g_{fg}) g^{gd}
    let mut dgamma = vec![0.0; n * n * n * n]; // [e][a][b][c]
    let idx4 = |e: usize, a: usize, b: usize, c: usize| ((e * n + a) * n + b) * n + c;
    for e in 0..n {
        // ∂_e g^{ad}
        let mut dg_inv = vec![0.0; n * n];
        for a in 0..n {
            for d in 0..n {
                let mut sum = 0.0;
                for f in 0..n {
                    for gg in 0..n {
                        sum -= g_inv.get(a, f) * dg[e].get(f, gg) * g_inv.get(gg, d);
                    }
                }
                dg_inv[a * n + d] = sum;
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let mut sum = 0.0;
                    for d in 0..n {
                        sum += dg_inv[a * n + d]
                            * (dg[b].get(d, c) + dg[c].get(d, b) - dg[d].get(b, c))
                            + g_inv.get(a, d)
                                * (d2g[e][b].get(d, c) + d2g[e][c].get(d, b)
                                    - d2g[e][d].get(b, c));
                    }
                    dgamma[idx4(e, a, b, c)] = 0.5 * sum;
                    dgamma[idx4(e, a, c, b)] = 0.5 * sum;
                }
            }
        }
    }

    // R^a_{bcd} and the lowered tensor
    let mut riemann = Tensor4::zeros(n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut value = dgamma[idx4(c, a, d, b)] - dgamma[idx4(d, a, c, b)];
                    for e in 0..n {
                        value += gamma[idx3(a, c, e)] * gamma[idx3(e, d, b)]
                            - gamma[idx3(a, d, e)] * gamma[idx3(e, c, b)];
                    }
                    riemann.set(a, b, c, d, value);
                }
            }
        }
    }
    // Ricci from the (1,3) tensor: R_{bd} = R^c_{bcd}
    let ricci_raw = |b: usize, d: usize| -> f64 {
        (0..n).map(|c| riemann.get(c, b, c, d)).sum()
    };
    let ricci = SymMatrix::from_fn(n, |b, d| 0.5 * (ricci_raw(b, d) + ricci_raw(d, b)));
    let mut scalar = 0.0;
    for b in 0..n {
        for d in 0..n {
            scalar += g_inv.get(b, d) * ricci.get(b, d);
        }
    }

    // lower the first index
    let lowered = Tensor4::from_fn(n, |a, b, c, d| {
        (0..n).map(|e| g.get(a, e) * riemann.get(e, b, c, d)).sum()
    });

    // pair symmetries of the lowered tensor
    let scale = lowered.max_abs() + 1.0;
    let mut residual = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let r = lowered.get(a, b, c, d);
                    residual = residual.max((r + lowered.get(b, a, c, d)).abs());
                    residual = residual.max((r + lowered.get(a, b, d, c)).abs());
                    residual = residual.max((r - lowered.get(c, d, a, b)).abs());
                }
            }
        }
    }
    let allowed = 100.0 * (10.0 * h_fd * h_fd + 1e-10) * scale;
    if residual > allowed {
        return Err(CurvatureError::SymmetryResidual { residual, allowed });
    }

    let weyl = if n >= 4 {
        let nf = n as f64;
        Tensor4::from_fn(n, |a, b, c, d| {
            lowered.get(a, b, c, d)
                - (g.get(a, c) * ricci.get(b, d) - g.get(a, d) * ricci.get(b, c)
                    + g.get(b, d) * ricci.get(a, c)
                    - g.get(b, c) * ricci.get(a, d))
                    / (nf - 2.0)
                + scalar * (g.get(a, c) * g.get(b, d) - g.get(a, d) * g.get(b, c))
                    / ((nf - 1.0) * (nf - 2.0))
        })
    } else {
        Tensor4::zeros(n)
    };

    Ok(CurvatureBundle {
        riemann: lowered,
        ricci,
        scalar,
        weyl,
        symmetry_residual: residual,
    })
}

/// Squared pseudo-norm of a (0,4) tensor: the full eight-index contraction
/// with the inverse metric. Can be negative for indefinite metrics.
pub fn tensor4_norm_sq(t: &Tensor4, g_inv: &SymMatrix) -> f64 {
    let n = t.dim();
    // raise indices one slot at a time
    let mut up = t.clone();
    for slot in 0..4 {
        let prev = up.clone();
        up = Tensor4::from_fn(n, |a, b, c, d| {
            let mut sum = 0.0;
            for e in 0..n {
                let value = match slot {
                    0 => prev.get(e, b, c, d),
                    1 => prev.get(a, e, c, d),
                    2 => prev.get(a, b, e, d),
                    _ => prev.get(a, b, c, e),
                };
                let idx = match slot {
                    0 => a,
                    1 => b,
                    2 => c,
                    _ => d,
                };
                sum += g_inv.get(idx, e) * value;
            }
            sum
        });
    }
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    total += up.get(a, b, c, d) * t.get(a, b, c, d);
                }
            }
        }
    }
    total
}

/// Squared pseudo-norm of the Weyl tensor at `x`; rejects dimension below 4.
pub fn weyl_norm_sq(
    bundle: &CurvatureBundle,
    metric: &MetricField,
    x: &[f64],
) -> Result<f64, CurvatureError> {
    if metric.dim() < 4 {
        return Err(CurvatureError::DimensionTooSmall(metric.dim()));
    }
    let g_inv = metric.inverse_at(x)?;
    Ok(tensor4_norm_sq(&bundle.weyl, &g_inv))
}

/// Largest single metric contraction of the Weyl tensor; zero in exact
/// arithmetic by total trace-freeness.
pub fn weyl_trace_residual(
    bundle: &CurvatureBundle,
    metric: &MetricField,
    x: &[f64],
) -> Result<f64, CurvatureError> {
    let n = metric.dim();
    if n < 4 {
        return Err(CurvatureError::DimensionTooSmall(n));
    }
    let g_inv = metric.inverse_at(x)?;
    let w = &bundle.weyl;
    let mut worst = 0.0f64;
    // contract the (1,3) pair; the other traces follow by the symmetries
    for b in 0..n {
        for d in 0..n {
            let mut sum = 0.0;
            for a in 0..n {
                for c in 0..n {
                    sum += g_inv.get(a, c) * w.get(a, b, c, d);
                }
            }
            worst = worst.max(sum.abs());
        }
    }
    // and the (1,2) pair
    for c in 0..n {
        for d in 0..n {
            let mut sum = 0.0;
            for a in 0..n {
                for b in 0..n {
                    sum += g_inv.get(a, b) * w.get(a, b, c, d);
                }
            }
            worst = worst.max(sum.abs());
        }
    }
    Ok(worst)
}

/// Sectional curvature of the plane spanned by `u`, `v`; `None` when the
/// plane is degenerate (Gram determinant below `1e-10` of scale).
pub fn sectional_curvature(
    bundle: &CurvatureBundle,
    g: &SymMatrix,
    u: &[f64],
    v: &[f64],
) -> Option<f64> {
    let guu = g.quadratic_form(u);
    let gvv = g.quadratic_form(v);
    let mut guv = 0.0;
    let n = g.dim();
    for i in 0..n {
        for j in 0..n {
            guv += g.get(i, j) * u[i] * v[j];
        }
    }
    let denom = guu * gvv - guv * guv;
    let scale = (guu.abs() + guv.abs()) * (gvv.abs() + guv.abs()) + 1e-30;
    if denom.abs() < 1e-10 * scale {
        return None;
    }
    let mut numerator = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    numerator += bundle.riemann.get(a, b, c, d) * u[a] * v[b] * u[c] * v[d];
                }
            }
        }
    }
    Some(numerator / denom)
}

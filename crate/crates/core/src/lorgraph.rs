//! Spacelike graphs over Lorentzian normal-form charts
//! `g = Σ g_ij dxⁱdxʲ − (dxⁿ)²` and the reduction of their mean curvature to
//! a quasi-linear operator: induced metric, second fundamental form, and the
//! coefficient extraction `aᶦʲ = Gᶦʲ/((n−1)W)`.

use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::maxlab::grid::GridFunction;
use crate::quasilinear::{
    certify_ellipticity, AdmissibleRegion, CoeffMatrixFn, CoeffScalarFn, EllipticityCertificate,
    FiberBounds, Jet2, MembershipFn, QlError, QuasiLinearOperator,
};
use crate::symkernel::{SymKernelError, SymMatrix};

/// Condition-number guard for inverting the spatial and induced metrics.
pub const METRIC_COND_GUARD: f64 = 1e12;

#[derive(Debug, Error)]
pub enum LorGraphError {
    #[error("graph is not spacelike: 1 - g^ij D_if D_jf = {w_sq:.6e} at x = {x:?}")]
    NotSpacelike { x: Vec<f64>, w_sq: f64 },
    #[error("metric inversion failed: {0}")]
    SingularMetric(#[from] SymKernelError),
    #[error("surface jet unavailable at x = {x:?}: {reason}")]
    JetUnavailable { x: Vec<f64>, reason: String },
    #[error(transparent)]
    Operator(#[from] QlError),
}

/// Riemannian fiber metrics used by the model charts: flat space and the
/// Poincaré-ball model of hyperbolic space (curvature −1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fiber {
    Flat(usize),
    HyperbolicBall(usize),
}

impl Fiber {
    pub fn dim(&self) -> usize {
        match self {
            Fiber::Flat(d) | Fiber::HyperbolicBall(d) => *d,
        }
    }

    pub fn metric(&self, x: &[f64]) -> SymMatrix {
        match self {
            Fiber::Flat(d) => SymMatrix::identity(*d),
            Fiber::HyperbolicBall(d) => {
                let rho = 1.0 - sq_norm(x);
                assert!(rho > 0.0, "point outside the Poincaré ball");
                let scale = 4.0 / (rho * rho);
                SymMatrix::from_fn(*d, |i, j| if i == j { scale } else { 0.0 })
            }
        }
    }

    /// `∂_k` of the metric components.
    pub fn metric_derivative(&self, x: &[f64], axis: usize) -> SymMatrix {
        match self {
            Fiber::Flat(d) => SymMatrix::zeros(*d),
            Fiber::HyperbolicBall(d) => {
                let rho = 1.0 - sq_norm(x);
                let scale = 16.0 * x[axis] / (rho * rho * rho);
                SymMatrix::from_fn(*d, |i, j| if i == j { scale } else { 0.0 })
            }
        }
    }

    /// Geodesic distance between two fiber points.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Fiber::Flat(_) => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Fiber::HyperbolicBall(_) => {
                let dx = sq_dist(x, y);
                let arg = 1.0 + 2.0 * dx / ((1.0 - sq_norm(x)) * (1.0 - sq_norm(y)));
                arg.max(1.0).acosh()
            }
        }
    }
}

fn sq_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

type SpatialMetricFn = Arc<dyn Fn(&[f64], f64) -> SymMatrix + Send + Sync>;
/// `(x, t, axis)` with `axis < n-1` spatial and `axis == n-1` the time slot.
type SpatialMetricDerivFn = Arc<dyn Fn(&[f64], f64, usize) -> SymMatrix + Send + Sync>;

/// Chart in the normal form `g = Σ g_ij dxⁱdxʲ − (dxⁿ)²` with `∂/∂xⁿ` the
/// future-pointing unit timelike direction. Spatial components are supplied
/// as an evaluator over `(x, xⁿ)`; derivatives are analytic when given and
/// centered finite differences otherwise.
#[derive(Clone)]
pub struct MetricChart {
    n: usize,
    name: String,
    spatial: SpatialMetricFn,
    spatial_derivative: Option<SpatialMetricDerivFn>,
    h_fd: f64,
}

impl MetricChart {
    pub const DEFAULT_H_FD: f64 = 1e-4;

    pub fn new(n: usize, name: impl Into<String>, spatial: SpatialMetricFn) -> Self {
        assert!(n >= 2, "need at least one spatial and one time direction");
        MetricChart {
            n,
            name: name.into(),
            spatial,
            spatial_derivative: None,
            h_fd: Self::DEFAULT_H_FD,
        }
    }

    pub fn with_analytic_derivative(mut self, derivative: SpatialMetricDerivFn) -> Self {
        self.spatial_derivative = Some(derivative);
        self
    }

    pub fn with_fd_step(mut self, h_fd: f64) -> Self {
        assert!(h_fd > 0.0);
        self.h_fd = h_fd;
        self
    }

    /// Spacetime dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Chart (graph-domain) dimension `n − 1`.
    pub fn chart_dim(&self) -> usize {
        self.n - 1
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spatial_metric(&self, x: &[f64], t: f64) -> SymMatrix {
        (self.spatial)(x, t)
    }

    pub fn spatial_metric_inverse(&self, x: &[f64], t: f64) -> Result<SymMatrix, LorGraphError> {
        Ok(self.spatial_metric(x, t).try_inverse(METRIC_COND_GUARD)?)
    }

    /// Full `n×n` metric components at `point = (x, t)`.
    pub fn full_metric(&self, point: &[f64]) -> SymMatrix {
        let (x, t) = split_point(point);
        let spatial = self.spatial_metric(x, t);
        let n = self.n;
        SymMatrix::from_fn(n, |a, b| match (a == n - 1, b == n - 1) {
            (false, false) => spatial.get(a, b),
            (true, true) => -1.0,
            _ => 0.0,
        })
    }

    fn spatial_derivative(&self, x: &[f64], t: f64, axis: usize) -> SymMatrix {
        if let Some(derivative) = &self.spatial_derivative {
            return derivative(x, t, axis);
        }
        let m = self.n - 1;
        if axis == m {
            let h = self.h_fd * (1.0 + t.abs());
            (self.spatial)(x, t + h)
                .sub(&(self.spatial)(x, t - h))
                .scaled(0.5 / h)
        } else {
            let h = self.h_fd * (1.0 + x[axis].abs());
            let mut xp = x.to_vec();
            xp[axis] += h;
            let mut xm = x.to_vec();
            xm[axis] -= h;
            (self.spatial)(&xp, t)
                .sub(&(self.spatial)(&xm, t))
                .scaled(0.5 / h)
        }
    }

    /// Levi-Civita symbols `Γ^A_{BC}` of the full chart metric at `point`.
    /// The fixed `−(dxⁿ)²` block contributes no derivatives, so only the
    /// spatial components are differentiated.
    pub fn christoffels(&self, point: &[f64]) -> Result<Christoffels, LorGraphError> {
        let n = self.n;
        let m = n - 1;
        let (x, t) = split_point(point);

        // dg[c][a][b] = ∂_c g_ab over the full index range
        let mut dg = vec![SymMatrix::zeros(n); n];
        for (axis, slot) in dg.iter_mut().enumerate() {
            let ds = self.spatial_derivative(x, t, axis);
            *slot = SymMatrix::from_fn(n, |a, b| {
                if a < m && b < m {
                    ds.get(a, b)
                } else {
                    0.0
                }
            });
        }

        let spatial_inv = self.spatial_metric_inverse(x, t)?;
        // g^{AB}: block inverse with g^{nn} = -1
        let g_inv = SymMatrix::from_fn(n, |a, b| match (a == m, b == m) {
            (false, false) => spatial_inv.get(a, b),
            (true, true) => -1.0,
            _ => 0.0,
        });

        let mut gamma = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in b..n {
                    let mut sum = 0.0;
                    for d in 0..n {
                        sum += g_inv.get(a, d)
                            * (dg[b].get(d, c) + dg[c].get(d, b) - dg[d].get(b, c));
                    }
                    let value = 0.5 * sum;
                    gamma[(a * n + b) * n + c] = value;
                    gamma[(a * n + c) * n + b] = value;
                }
            }
        }
        Ok(Christoffels { n, gamma })
    }
}

impl std::fmt::Debug for MetricChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricChart")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("h_fd", &self.h_fd)
            .finish_non_exhaustive()
    }
}

fn split_point(point: &[f64]) -> (&[f64], f64) {
    let (x, t) = point.split_at(point.len() - 1);
    (x, t[0])
}

/// Symbols `Γ^A_{BC}`, symmetric in the lower pair.
#[derive(Debug, Clone)]
pub struct Christoffels {
    n: usize,
    gamma: Vec<f64>,
}

impl Christoffels {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[(a * self.n + b) * self.n + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Flat Minkowski chart: spatial metric `δ_ij`.
pub fn minkowski(n: usize) -> MetricChart {
    let m = n - 1;
    let spatial: SpatialMetricFn = Arc::new(move |_x, _t| SymMatrix::identity(m));
    let derivative: SpatialMetricDerivFn = Arc::new(move |_x, _t, _axis| SymMatrix::zeros(m));
    MetricChart::new(n, "minkowski", spatial).with_analytic_derivative(derivative)
}

/// Warped strip chart `−dt² + cos²(t) g_N` over `t ∈ (−π/2, π/2)`, with the
/// time coordinate last. Analytic derivatives throughout.
pub fn warped_strip(fiber: Fiber) -> MetricChart {
    let m = fiber.dim();
    let n = m + 1;
    let spatial: SpatialMetricFn = Arc::new(move |x, t| {
        let c = t.cos();
        fiber.metric(x).scaled(c * c)
    });
    let derivative: SpatialMetricDerivFn = Arc::new(move |x, t, axis| {
        let c = t.cos();
        if axis == m {
            fiber.metric(x).scaled(-2.0 * t.sin() * c)
        } else {
            fiber.metric_derivative(x, axis).scaled(c * c)
        }
    });
    let name = match fiber {
        Fiber::Flat(_) => "strip-flat",
        Fiber::HyperbolicBall(_) => "strip-hyperbolic",
    };
    MetricChart::new(n, name, spatial).with_analytic_derivative(derivative)
}

type JetFn = Arc<dyn Fn(&[f64]) -> Result<Jet2, LorGraphError> + Send + Sync>;

/// A scalar graph function over the chart domain together with its first and
/// second derivatives (analytic, finite-difference of a closure, or grid
/// nodes with centered stencils).
#[derive(Clone)]
pub struct GraphSurface {
    jet: JetFn,
}

impl std::fmt::Debug for GraphSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphSurface").finish_non_exhaustive()
    }
}

impl GraphSurface {
    pub fn analytic(
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hess: impl Fn(&[f64]) -> SymMatrix + Send + Sync + 'static,
    ) -> Self {
        let jet: JetFn = Arc::new(move |x| {
            Ok(Jet2::new(x.to_vec(), f(x), grad(x), hess(x)).expect("consistent dims"))
        });
        GraphSurface { jet }
    }

    /// Derivatives by Richardson-extrapolated central differences of the
    /// value closure (stencils at `h` and `h/2`).
    pub fn from_fn_fd(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, h_fd: f64) -> Self {
        assert!(h_fd > 0.0);
        let f = Arc::new(f);
        let jet: JetFn = Arc::new(move |x| {
            let m = x.len();
            let value = f(x);
            let eval = |shift: &[f64]| {
                let pt: Vec<f64> = x.iter().zip(shift).map(|(a, s)| a + s).collect();
                f(&pt)
            };
            let grad_at = |h: f64, k: usize| {
                let mut sp = vec![0.0; m];
                sp[k] = h;
                let mut sm = vec![0.0; m];
                sm[k] = -h;
                (eval(&sp) - eval(&sm)) / (2.0 * h)
            };
            let hess_at = |h: f64, k: usize, l: usize| {
                if k == l {
                    let mut sp = vec![0.0; m];
                    sp[k] = h;
                    let mut sm = vec![0.0; m];
                    sm[k] = -h;
                    (eval(&sp) - 2.0 * value + eval(&sm)) / (h * h)
                } else {
                    let mut s = vec![0.0; m];
                    s[k] = h;
                    s[l] = h;
                    let pp = eval(&s);
                    s[l] = -h;
                    let pm = eval(&s);
                    s[k] = -h;
                    let mm = eval(&s);
                    s[l] = h;
                    let mp = eval(&s);
                    (pp - pm - mp + mm) / (4.0 * h * h)
                }
            };
            let richardson = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
            let grad: Vec<f64> = (0..m)
                .map(|k| richardson(grad_at(h_fd, k), grad_at(0.5 * h_fd, k)))
                .collect();
            let hess = SymMatrix::from_fn(m, |k, l| {
                richardson(hess_at(h_fd, k, l), hess_at(0.5 * h_fd, k, l))
            });
            Ok(Jet2::new(x.to_vec(), value, grad, hess).expect("consistent dims"))
        });
        GraphSurface { jet }
    }

    /// Grid-backed surface: jets available at interior nodes only.
    pub fn from_grid(grid: GridFunction) -> Self {
        let grid = Arc::new(grid);
        let jet: JetFn = Arc::new(move |x| {
            let idx: Vec<usize> = (0..grid.dim())
                .map(|k| {
                    let t = (x[k] - grid.origin()[k]) / grid.spacing()[k];
                    t.round().max(0.0) as usize
                })
                .collect();
            let node = grid.coords(&idx);
            let off = node
                .iter()
                .zip(x)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if off > 1e-9 * (1.0 + grid.max_spacing()) {
                return Err(LorGraphError::JetUnavailable {
                    x: x.to_vec(),
                    reason: "grid-backed surfaces provide jets at nodes only".into(),
                });
            }
            grid.fd_jet(&idx).map_err(|e| LorGraphError::JetUnavailable {
                x: x.to_vec(),
                reason: e.to_string(),
            })
        });
        GraphSurface { jet }
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet2, LorGraphError> {
        (self.jet)(x)
    }
}

/// Pointwise first/second-order geometry of a spacelike graph.
#[derive(Debug, Clone)]
pub struct GraphGeometry {
    pub w: f64,
    /// future unit normal in chart coordinates (length `n`)
    pub normal: Vec<f64>,
    /// induced metric `G_ij = g_ij − D_if D_jf`
    pub induced: SymMatrix,
    /// `V_ij = Σ_k (Γ^k_ij D_kf + Γ^k_in D_kf D_jf + Γ^k_jn D_kf D_if)`
    pub v: SymMatrix,
    /// second fundamental form `h(X_i, X_j) = (D_ij f + Γ^n_ij − V_ij)/W`
    pub second_fundamental: SymMatrix,
    pub mean_curvature: f64,
}

/// Full pointwise geometry of the graph of `surface` at chart point `x`.
pub fn graph_geometry(
    chart: &MetricChart,
    surface: &GraphSurface,
    x: &[f64],
) -> Result<GraphGeometry, LorGraphError> {
    let jet = surface.jet(x)?;
    geometry_from_jet(chart, &jet)
}

/// Same as [`graph_geometry`] but from an explicit jet `(x, f, Df, D²f)`.
pub fn geometry_from_jet(chart: &MetricChart, jet: &Jet2) -> Result<GraphGeometry, LorGraphError> {
    let m = chart.chart_dim();
    assert_eq!(jet.dim(), m, "jet dimension must match the chart");
    let x = &jet.x;
    let t = jet.r;
    let p = &jet.p;

    let g_inv = chart.spatial_metric_inverse(x, t)?;
    let mut w_sq = 1.0;
    for i in 0..m {
        for j in 0..m {
            w_sq -= g_inv.get(i, j) * p[i] * p[j];
        }
    }
    if w_sq <= 0.0 {
        return Err(LorGraphError::NotSpacelike {
            x: x.to_vec(),
            w_sq,
        });
    }
    let w = w_sq.sqrt();

    let mut point = x.to_vec();
    point.push(t);
    let gamma = chart.christoffels(&point)?;

    let v = SymMatrix::from_fn(m, |i, j| {
        let mut sum = 0.0;
        for k in 0..m {
            sum += gamma.get(k, i, j) * p[k]
                + gamma.get(k, i, m) * p[k] * p[j]
                + gamma.get(k, j, m) * p[k] * p[i];
        }
        sum
    });

    let second_fundamental = SymMatrix::from_fn(m, |i, j| {
        (jet.hess.get(i, j) + gamma.get(m, i, j) - v.get(i, j)) / w
    });

    let g = chart.spatial_metric(x, t);
    let induced = SymMatrix::from_fn(m, |i, j| g.get(i, j) - p[i] * p[j]);
    let induced_inv = induced.try_inverse(METRIC_COND_GUARD)?;

    let mean_curvature = induced_inv
        .trace_product(&second_fundamental)
        .expect("dimensions agree")
        / m as f64;

    let mut normal = vec![0.0; m + 1];
    for j in 0..m {
        let mut sum = 0.0;
        for i in 0..m {
            sum += g_inv.get(j, i) * p[i];
        }
        normal[j] = sum / w;
    }
    normal[m] = 1.0 / w;

    Ok(GraphGeometry {
        w,
        normal,
        induced,
        v,
        second_fundamental,
        mean_curvature,
    })
}

/// Mean-curvature operator coefficients at a point of the graph:
/// `a = G⁻¹/((n−1)W)` and `b = Σ Gᶦʲ(Γⁿ_ij − V_ij)/((n−1)W)`.
pub fn mean_curvature_coefficients(
    chart: &MetricChart,
    surface: &GraphSurface,
    x: &[f64],
) -> Result<(SymMatrix, f64), LorGraphError> {
    let jet = surface.jet(x)?;
    coefficients_at(chart, x, jet.r, &jet.p)
}

fn coefficients_at(
    chart: &MetricChart,
    x: &[f64],
    r: f64,
    p: &[f64],
) -> Result<(SymMatrix, f64), LorGraphError> {
    let m = chart.chart_dim();
    let g_inv = chart.spatial_metric_inverse(x, r)?;
    let mut w_sq = 1.0;
    for i in 0..m {
        for j in 0..m {
            w_sq -= g_inv.get(i, j) * p[i] * p[j];
        }
    }
    if w_sq <= 0.0 {
        return Err(LorGraphError::NotSpacelike {
            x: x.to_vec(),
            w_sq,
        });
    }
    let w = w_sq.sqrt();

    let mut point = x.to_vec();
    point.push(r);
    let gamma = chart.christoffels(&point)?;
    let v = SymMatrix::from_fn(m, |i, j| {
        let mut sum = 0.0;
        for k in 0..m {
            sum += gamma.get(k, i, j) * p[k]
                + gamma.get(k, i, m) * p[k] * p[j]
                + gamma.get(k, j, m) * p[k] * p[i];
        }
        sum
    });

    let g = chart.spatial_metric(x, r);
    let induced = SymMatrix::from_fn(m, |i, j| g.get(i, j) - p[i] * p[j]);
    let induced_inv = induced.try_inverse(METRIC_COND_GUARD)?;

    let scale = 1.0 / (m as f64 * w);
    let a = induced_inv.scaled(scale);
    let mut b = 0.0;
    for i in 0..m {
        for j in 0..m {
            b += induced_inv.get(i, j) * (gamma.get(m, i, j) - v.get(i, j));
        }
    }
    b *= scale;
    Ok((a, b))
}

/// The chart's mean-curvature operator as a quasi-linear operator on jets
/// `(x, r, p)`; coefficient derivatives fall back to finite differences.
pub fn chart_mean_curvature_operator(chart: &MetricChart) -> QuasiLinearOperator {
    let m = chart.chart_dim();
    let chart_a = chart.clone();
    let a: CoeffMatrixFn = Arc::new(move |x, r, p| {
        coefficients_at(&chart_a, x, r, p)
            .map(|(a, _)| a)
            .unwrap_or_else(|e| panic!("chart mean-curvature coefficients: {e}"))
    });
    let chart_b = chart.clone();
    let b: CoeffScalarFn = Arc::new(move |x, r, p| {
        coefficients_at(&chart_b, x, r, p)
            .map(|(_, b)| b)
            .unwrap_or_else(|e| panic!("chart mean-curvature coefficients: {e}"))
    });
    QuasiLinearOperator::new(m, format!("chart-mean-curvature[{}]", chart.name()), a, b)
}

/// Gradient-bounded, value-bounded jet region over a compact chart box:
/// membership `Σ gᶦʲ(x,r) pᵢpⱼ < 1 − ρ²`, `|r| < bound`, `x` in the box.
pub fn admissible_set(
    chart: &MetricChart,
    rho: f64,
    bound: f64,
    chart_box: Vec<(f64, f64)>,
) -> AdmissibleRegion {
    assert!(rho > 0.0 && rho < 1.0, "rho must be in (0, 1)");
    assert!(bound > 0.0);
    let m = chart.chart_dim();
    assert_eq!(chart_box.len(), m);
    let chart = chart.clone();
    let box_for_member = chart_box.clone();
    let member: MembershipFn = Arc::new(move |x, r, p| {
        if r.abs() >= bound {
            return false;
        }
        for (v, (lo, hi)) in x.iter().zip(&box_for_member) {
            if v < lo || v > hi {
                return false;
            }
        }
        let Ok(g_inv) = chart.spatial_metric_inverse(x, r) else {
            return false;
        };
        let mut ps = 0.0;
        for i in 0..p.len() {
            for j in 0..p.len() {
                ps += g_inv.get(i, j) * p[i] * p[j];
            }
        }
        ps < 1.0 - rho * rho
    });
    AdmissibleRegion::new(
        m,
        member,
        FiberBounds {
            r_range: (-bound, bound),
            p_box: vec![(-1.5, 1.5); m],
        },
        true,
    )
}

/// Build the admissible set and certify the chart operator's uniform
/// ellipticity on it by sampling: the certificate carries the constant that
/// worked. Uniformly draws `samples` points from the box-and-fiber envelope.
pub fn certified_admissible_set(
    chart: &MetricChart,
    rho: f64,
    bound: f64,
    chart_box: Vec<(f64, f64)>,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> Result<(AdmissibleRegion, EllipticityCertificate), LorGraphError> {
    let region = admissible_set(chart, rho, bound, chart_box.clone());
    let op = chart_mean_curvature_operator(chart);
    let mut points = Vec::with_capacity(samples);
    while points.len() < samples {
        let x: Vec<f64> = chart_box
            .iter()
            .map(|&(lo, hi)| rng.gen_range(lo..=hi))
            .collect();
        if let Some((r, p)) = region.sample_fiber(&x, rng) {
            points.push((x, r, p));
        }
    }
    // measure the constant first, then certify against it with headroom
    let measured = certify_ellipticity(&op, points.clone(), f64::INFINITY)?;
    let c_e = measured
        .worst_ratio
        .max(measured.worst_derivative_bound)
        .max(1.0)
        * (1.0 + 1e-9);
    let certificate = certify_ellipticity(&op, points, c_e)?;
    Ok((region, certificate))
}

/// Flat-chart mean-curvature oracle
/// `H = Σ_i D_i( D_i f / √(1 − ‖Df‖²) ) / (n−1)`, evaluated by centered
/// differences of the enclosed gradient field. Independent of the
/// coefficient-extraction path; used to cross-check it.
pub fn flat_divergence_mean_curvature(
    grad: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    x: &[f64],
    h: f64,
) -> f64 {
    let m = x.len();
    let field = |y: &[f64], i: usize| {
        let g = grad(y);
        let w = (1.0 - g.iter().map(|v| v * v).sum::<f64>()).sqrt();
        g[i] / w
    };
    let mut div = 0.0;
    for i in 0..m {
        let mut yp = x.to_vec();
        yp[i] += h;
        let mut ym = x.to_vec();
        ym[i] -= h;
        div += (field(&yp, i) - field(&ym, i)) / (2.0 * h);
    }
    div / m as f64
}

/// Report-style summary of a geometry evaluation, used by the CLI.
pub fn geometry_report(geometry: &GraphGeometry) -> serde_json::Value {
    json!({
        "w": geometry.w,
        "normal": geometry.normal,
        "induced_metric": geometry.induced.rows(),
        "v": geometry.v.rows(),
        "second_fundamental": geometry.second_fundamental.rows(),
        "mean_curvature": geometry.mean_curvature,
    })
}

//! Metric constructors for the model geometries: flat charts, hyperbolic
//! balls, time products, warped strips and seeded smooth perturbations.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lorgraph::{Fiber, MetricChart};
use crate::symkernel::SymMatrix;

use super::{MetricField, ScalarFieldFn};

/// Flat `ℝ^{n-1,1}` with the time coordinate last.
pub fn minkowski_field(n: usize) -> MetricField {
    let g = Arc::new(move |_x: &[f64]| {
        SymMatrix::from_fn(n, |a, b| match (a == b, a == n - 1) {
            (true, true) => -1.0,
            (true, false) => 1.0,
            _ => 0.0,
        })
    });
    let dg = Arc::new(move |_x: &[f64], _axis: usize| SymMatrix::zeros(n));
    let d2g = Arc::new(move |_x: &[f64], _a: usize, _b: usize| SymMatrix::zeros(n));
    MetricField::new(n, "minkowski", g).with_analytic_derivatives(dg, d2g)
}

/// Riemannian fiber metric as a standalone field (for the Schur residual).
pub fn fiber_field(fiber: Fiber) -> MetricField {
    let d = fiber.dim();
    let g = Arc::new(move |x: &[f64]| fiber.metric(x));
    let dg = Arc::new(move |x: &[f64], axis: usize| fiber.metric_derivative(x, axis));
    let d2g = Arc::new(move |x: &[f64], a: usize, b: usize| fiber_second_derivative(fiber, x, a, b));
    let name = match fiber {
        Fiber::Flat(_) => "flat-fiber",
        Fiber::HyperbolicBall(_) => "hyperbolic-ball",
    };
    MetricField::new(d, name, g).with_analytic_derivatives(dg, d2g)
}

fn fiber_second_derivative(fiber: Fiber, x: &[f64], a: usize, b: usize) -> SymMatrix {
    match fiber {
        Fiber::Flat(d) => SymMatrix::zeros(d),
        Fiber::HyperbolicBall(d) => {
            // g = 4 δ/ρ² with ρ = 1 − ‖x‖²:
            // ∂_a g = 16 x_a δ/ρ³, ∂²_{ab} g = (16 δ_ab/ρ³ + 96 x_a x_b/ρ⁴) δ
            let rho = 1.0 - x.iter().map(|v| v * v).sum::<f64>();
            let kron = if a == b { 1.0 } else { 0.0 };
            let scale = 16.0 * kron / rho.powi(3) + 96.0 * x[a] * x[b] / rho.powi(4);
            SymMatrix::from_fn(d, |i, j| if i == j { scale } else { 0.0 })
        }
    }
}

/// Lorentzian product `−dt² + g_N` with the time coordinate last.
pub fn product_with_time(fiber: Fiber) -> MetricField {
    let d = fiber.dim();
    let n = d + 1;
    let g = Arc::new(move |x: &[f64]| embed_block(&fiber.metric(&x[..d]), n));
    let dg = Arc::new(move |x: &[f64], axis: usize| {
        if axis == d {
            SymMatrix::zeros(n)
        } else {
            embed_zero_time(&fiber.metric_derivative(&x[..d], axis), n)
        }
    });
    let d2g = Arc::new(move |x: &[f64], a: usize, b: usize| {
        if a == d || b == d {
            SymMatrix::zeros(n)
        } else {
            embed_zero_time(&fiber_second_derivative(fiber, &x[..d], a, b), n)
        }
    });
    let name = match fiber {
        Fiber::Flat(_) => "product-flat",
        Fiber::HyperbolicBall(_) => "product-hyperbolic",
    };
    MetricField::new(n, name, g).with_analytic_derivatives(dg, d2g)
}

/// Warped strip `−dt² + cos²(t) g_N` as a metric field with analytic
/// derivatives, time last.
pub fn strip_field(fiber: Fiber) -> MetricField {
    let d = fiber.dim();
    let n = d + 1;
    let g = Arc::new(move |x: &[f64]| {
        let t = x[d];
        let c2 = t.cos() * t.cos();
        embed_block(&fiber.metric(&x[..d]).scaled(c2), n)
    });
    let dg = Arc::new(move |x: &[f64], axis: usize| {
        let t = x[d];
        if axis == d {
            embed_zero_time(&fiber.metric(&x[..d]).scaled(-(2.0 * t).sin()), n)
        } else {
            let c2 = t.cos() * t.cos();
            embed_zero_time(&fiber.metric_derivative(&x[..d], axis).scaled(c2), n)
        }
    });
    let d2g = Arc::new(move |x: &[f64], a: usize, b: usize| {
        let t = x[d];
        match (a == d, b == d) {
            (true, true) => {
                embed_zero_time(&fiber.metric(&x[..d]).scaled(-2.0 * (2.0 * t).cos()), n)
            }
            (true, false) => embed_zero_time(
                &fiber
                    .metric_derivative(&x[..d], b)
                    .scaled(-(2.0 * t).sin()),
                n,
            ),
            (false, true) => embed_zero_time(
                &fiber
                    .metric_derivative(&x[..d], a)
                    .scaled(-(2.0 * t).sin()),
                n,
            ),
            (false, false) => {
                let c2 = t.cos() * t.cos();
                embed_zero_time(&fiber_second_derivative(fiber, &x[..d], a, b).scaled(c2), n)
            }
        }
    });
    let name = match fiber {
        Fiber::Flat(_) => "strip-flat",
        Fiber::HyperbolicBall(_) => "strip-hyperbolic",
    };
    MetricField::new(n, name, g).with_analytic_derivatives(dg, d2g)
}

/// Product `−dt² + g_N` with a generically perturbed flat fiber: smooth
/// trigonometric bumps of the given amplitude, reproducible from the seed.
/// Derivatives are left to the finite-difference path on purpose, so this is
/// also the pipeline's FD regression workhorse.
pub fn perturbed_product(fiber_dim: usize, amplitude: f64, seed: u64) -> MetricField {
    let d = fiber_dim;
    let n = d + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // frequencies and phases for each upper-triangle component
    let mut modes = Vec::new();
    for _ in 0..(d * (d + 1) / 2) {
        let freq: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..1.5)).collect();
        let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        modes.push((freq, phase));
    }
    let g = Arc::new(move |x: &[f64]| {
        let mut flat = 0usize;
        let mut upper = vec![vec![0.0; d]; d];
        for i in 0..d {
            for j in i..d {
                let (freq, phase) = &modes[flat];
                let arg: f64 =
                    freq.iter().zip(&x[..d]).map(|(f, v)| f * v).sum::<f64>() + phase;
                let kron = if i == j { 1.0 } else { 0.0 };
                upper[i][j] = kron + amplitude * arg.sin();
                flat += 1;
            }
        }
        let fiber = SymMatrix::from_fn(d, |i, j| upper[i.min(j)][i.max(j)]);
        embed_block(&fiber, n)
    });
    MetricField::new(n, "product-perturbed", g)
}

/// Round unit two-sphere `dθ² + sin²θ dφ²`; the convention anchor `K = +1`.
pub fn two_sphere() -> MetricField {
    let g = Arc::new(|x: &[f64]| {
        let theta = x[0];
        SymMatrix::from_fn(2, |a, b| match (a, b) {
            (0, 0) => 1.0,
            (1, 1) => theta.sin() * theta.sin(),
            _ => 0.0,
        })
    });
    MetricField::new(2, "two-sphere", g)
}

/// Conformal rescaling `g̃ = λ² g`. The result evaluates `λ` pointwise and is
/// differentiated by finite differences, so `λ` only needs to be smooth.
pub fn conformal_rescale(metric: &MetricField, lambda: ScalarFieldFn) -> MetricField {
    let n = metric.dim();
    let base = metric.clone();
    let g = Arc::new(move |x: &[f64]| {
        let l = lambda(x);
        base.at(x).scaled(l * l)
    });
    MetricField::new(n, format!("{}-rescaled", metric.name()), g)
}

/// A chart metric as a curvature-pipeline field (finite-difference
/// derivatives of the chart's components).
pub fn from_chart(chart: &MetricChart) -> MetricField {
    let n = chart.dim();
    let chart = chart.clone();
    let name = chart.name().to_string();
    let g = Arc::new(move |x: &[f64]| chart.full_metric(x));
    MetricField::new(n, name, g)
}

fn embed_block(spatial: &SymMatrix, n: usize) -> SymMatrix {
    let d = spatial.dim();
    assert_eq!(d + 1, n);
    SymMatrix::from_fn(n, |a, b| match (a == d, b == d) {
        (false, false) => spatial.get(a, b),
        (true, true) => -1.0,
        _ => 0.0,
    })
}

fn embed_zero_time(spatial: &SymMatrix, n: usize) -> SymMatrix {
    let d = spatial.dim();
    assert_eq!(d + 1, n);
    SymMatrix::from_fn(n, |a, b| {
        if a < d && b < d {
            spatial.get(a, b)
        } else {
            0.0
        }
    })
}

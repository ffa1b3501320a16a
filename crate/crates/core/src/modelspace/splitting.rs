//! The normal-exponential splitting map `Φ(x, t) = exp(t·𝐧(x))` off the
//! maximal slice `{t = 0}` of the strip, computed by geodesic integration and
//! compared against the warped-product form `−dt² + cos²(t) g_N`.

use serde_json::json;

use crate::report::{Verdict, VerificationReport};
use crate::symkernel::SymMatrix;

use super::{ModelError, ModelSpacetime};

/// Options for the splitting check.
#[derive(Debug, Clone, Copy)]
pub struct SplittingOptions {
    /// integrator step for the normal geodesics
    pub ode_step: f64,
    /// finite-difference step for the pullback Jacobian
    pub h_fd: f64,
    /// componentwise tolerance on `Φ*g − (−dt² + cos²t g_N)`
    pub tol: f64,
    /// injectivity spot-check separation threshold
    pub min_separation: f64,
}

impl Default for SplittingOptions {
    fn default() -> Self {
        SplittingOptions {
            ode_step: 1e-3,
            h_fd: 1e-4,
            tol: 1e-6,
            min_separation: 1e-6,
        }
    }
}

/// Integrate the geodesic `u'' + Γ(u)(u', u') = 0` from `(x, 0)` with initial
/// velocity `∂_t` (the future unit normal of the `{t = 0}` slice) for
/// parameter time `t`, by classic fourth-order Runge–Kutta.
pub fn splitting_map(
    model: &ModelSpacetime,
    x: &[f64],
    t: f64,
    ode_step: f64,
) -> Result<Vec<f64>, ModelError> {
    let chart = model.chart();
    let n = model.dim();
    assert_eq!(x.len(), n - 1);

    let mut position = x.to_vec();
    position.push(0.0);
    let mut velocity = vec![0.0; n];
    velocity[n - 1] = 1.0;
    model.check_point(&position)?;

    if t == 0.0 {
        return Ok(position);
    }
    let steps = (t.abs() / ode_step).ceil().max(1.0) as usize;
    let h = t / steps as f64;

    let accel = |pos: &[f64], vel: &[f64]| -> Result<Vec<f64>, ModelError> {
        let gamma = chart
            .christoffels(pos)
            .map_err(|e| ModelError::SphereRootFailed(e.to_string()))?;
        let mut acc = vec![0.0; n];
        for (a, slot) in acc.iter_mut().enumerate() {
            let mut sum = 0.0;
            for b in 0..n {
                for c in 0..n {
                    sum += gamma.get(a, b, c) * vel[b] * vel[c];
                }
            }
            *slot = -sum;
        }
        Ok(acc)
    };

    for _ in 0..steps {
        let k1p = velocity.clone();
        let k1v = accel(&position, &velocity)?;
        let mid1p: Vec<f64> = position
            .iter()
            .zip(&k1p)
            .map(|(p, k)| p + 0.5 * h * k)
            .collect();
        let mid1v: Vec<f64> = velocity
            .iter()
            .zip(&k1v)
            .map(|(v, k)| v + 0.5 * h * k)
            .collect();
        let k2p = mid1v.clone();
        let k2v = accel(&mid1p, &mid1v)?;
        let mid2p: Vec<f64> = position
            .iter()
            .zip(&k2p)
            .map(|(p, k)| p + 0.5 * h * k)
            .collect();
        let mid2v: Vec<f64> = velocity
            .iter()
            .zip(&k2v)
            .map(|(v, k)| v + 0.5 * h * k)
            .collect();
        let k3p = mid2v.clone();
        let k3v = accel(&mid2p, &mid2v)?;
        let endp: Vec<f64> = position.iter().zip(&k3p).map(|(p, k)| p + h * k).collect();
        let endv: Vec<f64> = velocity.iter().zip(&k3v).map(|(v, k)| v + h * k).collect();
        let k4p = endv.clone();
        let k4v = accel(&endp, &endv)?;
        for i in 0..n {
            position[i] += h / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
            velocity[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
    Ok(position)
}

/// Centered-difference pullback of an ambient metric through a map: the
/// Jacobian columns come from differencing `map` in each parameter, then the
/// ambient metric at the image is contracted with them. Truncation error is
/// second order in `h` for smooth maps.
pub fn fd_pullback<E>(
    map: &impl Fn(&[f64]) -> Result<Vec<f64>, E>,
    ambient: &impl Fn(&[f64]) -> SymMatrix,
    params: &[f64],
    h: f64,
) -> Result<SymMatrix, E> {
    let n = params.len();
    let mut jacobian: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut pp = params.to_vec();
        pp[k] += h;
        let mut pm = params.to_vec();
        pm[k] -= h;
        let plus = map(&pp)?;
        let minus = map(&pm)?;
        jacobian.push(
            plus.iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    let image = map(params)?;
    let g = ambient(&image);
    let ambient_dim = image.len();
    Ok(SymMatrix::from_fn(n, |a, b| {
        let mut sum = 0.0;
        for i in 0..ambient_dim {
            for j in 0..ambient_dim {
                sum += g.get(i, j) * jacobian[a][i] * jacobian[b][j];
            }
        }
        sum
    }))
}

/// Compare the finite-difference pullback `Φ*g` against the warped-product
/// metric on a grid of `(x, t)` parameters, and spot-check injectivity of
/// `Φ` across the grid.
pub fn splitting_map_check(
    model: &ModelSpacetime,
    fiber_points: &[Vec<f64>],
    times: &[f64],
    options: &SplittingOptions,
) -> Result<VerificationReport, ModelError> {
    let ModelSpacetime::WarpedStrip { fiber } = model else {
        return Err(ModelError::StripOnly);
    };
    let chart = model.chart();
    let m = fiber.dim();
    let n = m + 1;
    let h = options.h_fd;

    let phi = |params: &[f64]| {
        let (x, t) = super::split(params);
        splitting_map(model, x, t, options.ode_step)
    };
    let ambient = |point: &[f64]| chart.full_metric(point);

    let mut worst = 0.0f64;
    let mut worst_at = json!(null);
    let mut images: Vec<Vec<f64>> = Vec::new();
    for x in fiber_points {
        for &t in times {
            let mut params = x.clone();
            params.push(t);
            let pullback = fd_pullback(&phi, &ambient, &params, h)?;
            // expected warped-product components in the (x, t) parameters
            let fiber_metric = fiber.metric(x);
            let c2 = t.cos() * t.cos();
            let expected = SymMatrix::from_fn(n, |a, b| match (a == m, b == m) {
                (false, false) => c2 * fiber_metric.get(a, b),
                (true, true) => -1.0,
                _ => 0.0,
            });
            let residual = pullback.sub(&expected).max_abs_entry();
            if residual > worst {
                worst = residual;
                worst_at = json!({ "x": x, "t": t });
            }
            images.push(phi(&params)?);
        }
    }

    // injectivity spot-check: distinct parameters map to separated points
    let mut min_pair = f64::INFINITY;
    for i in 0..images.len() {
        for j in (i + 1)..images.len() {
            let d = images[i]
                .iter()
                .zip(&images[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            min_pair = min_pair.min(d);
        }
    }
    let injective = images.len() < 2 || min_pair > options.min_separation;

    let verdict = if worst <= options.tol && injective {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    Ok(VerificationReport::new("modelspace/splitting-pullback", verdict)
        .with_residual("worst_component_residual", worst)
        .with_residual("min_image_separation", min_pair.min(1e30))
        .with_witness(json!({ "worst_at": worst_at, "injective": injective }))
        .with_params(json!({
            "ode_step": options.ode_step,
            "h_fd": options.h_fd,
            "tol": options.tol,
            "grid": [fiber_points.len(), times.len()],
        })))
}

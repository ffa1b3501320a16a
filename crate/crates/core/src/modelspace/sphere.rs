//! Geodesic distance spheres `S_{η,r} = {p : d(p, exp(rη)) = r}` as local
//! graphs around their base point, with the second fundamental form and mean
//! curvature extracted through the graph reduction.

use crate::lorgraph::{geometry_from_jet, GraphGeometry, GraphSurface};
use crate::quasilinear::Jet2;

use super::{split, ModelError, ModelSpacetime};

/// Local description of a distance sphere near its base point.
#[derive(Debug, Clone)]
pub struct SphereGeometry {
    /// base point on the sphere (where the radial geodesic starts)
    pub base: Vec<f64>,
    /// sphere center `exp(r·η)`
    pub center: Vec<f64>,
    pub radius: f64,
    /// graph function of the sphere over the chart, available near the base
    pub graph: GraphSurface,
    /// geometry of the graph at the base point
    pub geometry: GraphGeometry,
}

/// Build the past distance sphere through `base` with future unit normal
/// `η = ∂/∂t` (the vertical direction both models support): the level set
/// `d(·, center) = r` with `center = base + r·∂_t`, represented as a graph
/// `t = f(x)` by bisecting the distance in `t`, then differentiated with the
/// given finite-difference step to produce the geometry at the base.
pub fn geodesic_sphere(
    model: &ModelSpacetime,
    base: &[f64],
    radius: f64,
    h_fd: f64,
) -> Result<SphereGeometry, ModelError> {
    model.check_point(base)?;
    assert!(radius > 0.0);
    if let ModelSpacetime::WarpedStrip { .. } = model {
        // the center must stay inside the strip
        let (_, t_base) = split(base);
        if t_base + radius >= std::f64::consts::FRAC_PI_2 {
            return Err(ModelError::OutsideStrip {
                t: t_base + radius,
            });
        }
    }

    let (x_base, t_base) = split(base);
    let mut center = x_base.to_vec();
    center.push(t_base + radius);

    let model_copy = *model;
    let center_copy = center.clone();
    let t_floor = match model {
        ModelSpacetime::Minkowski { .. } => t_base - 10.0 * radius - 1.0,
        ModelSpacetime::WarpedStrip { .. } => -std::f64::consts::FRAC_PI_2 + 1e-9,
    };
    let t_ceil = t_base + radius;
    let graph_fn = move |x: &[f64]| -> f64 {
        solve_level(&model_copy, &center_copy, radius, x, t_floor, t_ceil)
            .unwrap_or_else(|e| panic!("sphere graph evaluation: {e}"))
    };

    // validate the root at the base before handing out the closure
    let f_base = solve_level(model, &center, radius, x_base, t_floor, t_ceil)?;
    if (f_base - t_base).abs() > 1e-9 * (1.0 + t_base.abs()) {
        return Err(ModelError::SphereRootFailed(format!(
            "graph misses the base point by {:.3e}",
            (f_base - t_base).abs()
        )));
    }

    let graph = GraphSurface::from_fn_fd(graph_fn, h_fd);
    let jet = graph
        .jet(x_base)
        .map_err(|e| ModelError::SphereRootFailed(e.to_string()))?;
    let geometry = geometry_from_jet(&model.chart(), &jet)
        .map_err(|e| ModelError::SphereRootFailed(e.to_string()))?;

    Ok(SphereGeometry {
        base: base.to_vec(),
        center,
        radius,
        graph,
        geometry,
    })
}

/// Exact jet of the Minkowski past sphere `t = t_c − √(r² + ‖x − x_c‖²)`;
/// closed-form oracle for the root-finding graph.
pub fn minkowski_sphere_jet(center: &[f64], radius: f64, x: &[f64]) -> Jet2 {
    let (xc, tc) = split(center);
    let m = x.len();
    let diff: Vec<f64> = x.iter().zip(xc).map(|(a, b)| a - b).collect();
    let s = (radius * radius + diff.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let value = tc - s;
    let grad: Vec<f64> = diff.iter().map(|d| -d / s).collect();
    let hess = crate::symkernel::SymMatrix::from_fn(m, |i, j| {
        let kron = if i == j { 1.0 } else { 0.0 };
        -(kron / s - diff[i] * diff[j] / (s * s * s))
    });
    Jet2::new(x.to_vec(), value, grad, hess).expect("consistent dims")
}

/// Solve `d((x, t), center) = radius` for `t` below the center. The distance
/// is continuous and strictly decreasing in `t` on the causal-past region, so
/// bisection between the floor and the center time converges
/// unconditionally.
fn solve_level(
    model: &ModelSpacetime,
    center: &[f64],
    radius: f64,
    x: &[f64],
    t_floor: f64,
    t_ceil: f64,
) -> Result<f64, ModelError> {
    let distance = |t: f64| -> Result<f64, ModelError> {
        let mut p = x.to_vec();
        p.push(t);
        model.lorentz_distance(&p, center)
    };
    let mut lo = t_floor;
    let mut hi = t_ceil;
    let d_lo = distance(lo)?;
    if d_lo < radius {
        return Err(ModelError::SphereRootFailed(format!(
            "distance at the floor is {d_lo:.6} < radius {radius:.6}; \
             the level set leaves the chart"
        )));
    }
    for _ in 0..90 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if distance(mid)? >= radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

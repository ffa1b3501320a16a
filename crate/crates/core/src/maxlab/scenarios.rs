//! Named contradiction-pipeline instances shared by the test suites and the
//! CLI: the geometric plane-versus-hyperboloid comparison and a synthetic
//! instance with fabricated operator claims.

use std::sync::Arc;

use crate::lorgraph::admissible_set;
use crate::quasilinear::{flat_mean_curvature, laplacian, Jet2};
use crate::symkernel::SymMatrix;

use super::grid::GridFunction;
use super::pipeline::{
    ContradictionInstance, PipelineTolerances, SupportJet, SupportSupplier,
};

/// Ellipticity constant used for the flat mean-curvature operator on the
/// plane-versus-hyperboloid domain (`ρ = 0.8`, `|r| < 2`, box `[−0.45, 0.45]²`).
/// The acceptance suite re-certifies the operator at this constant.
pub const PLANE_HYPERBOLOID_C_E: f64 = 4.0;

fn hyperboloid_cap_jet(x: &[f64]) -> Jet2 {
    // lower cap 1 − sqrt(1 + ||x||²)
    let m = x.len();
    let s = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let r = 1.0 - s;
    let p: Vec<f64> = x.iter().map(|v| -v / s).collect();
    let hess = SymMatrix::from_fn(m, |i, j| {
        let kron = if i == j { 1.0 } else { 0.0 };
        -(kron / s - x[i] * x[j] / (s * s * s))
    });
    Jet2::new(x.to_vec(), r, p, hess).expect("consistent dims")
}

/// The plane `u₀ ≡ 0` (mean curvature 0) over the lower hyperboloid cap
/// `u₁ = 1 − √(1 + ‖x‖²)` (mean curvature −1), touching at the origin, under
/// the flat mean-curvature operator with right-hand side `h0`.
///
/// No constant in the window `[−1, 0]` satisfies both support inequalities at
/// once, so the pipeline reports a hypothesis failure naming the violated
/// side for every `h0`.
pub fn plane_vs_hyperboloid_instance(h0: f64, seed: u64) -> ContradictionInstance {
    let origin = vec![-0.45, -0.45];
    let spacing = vec![0.045, 0.045];
    let shape = vec![21, 21];
    let u0 = GridFunction::from_fn(origin.clone(), spacing.clone(), shape.clone(), |_| 0.0)
        .expect("valid grid");
    let u1 = GridFunction::from_fn(origin, spacing, shape, |x| {
        1.0 - (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt()
    })
    .expect("valid grid");

    let chart = crate::lorgraph::minkowski(3);
    let region = admissible_set(&chart, 0.8, 2.0, vec![(-0.45, 0.45), (-0.45, 0.45)]);
    let op = flat_mean_curvature(2).with_region(region);

    let upper: SupportSupplier = Arc::new(|req| {
        Ok(SupportJet {
            jet: Jet2::new(
                req.x.to_vec(),
                0.0,
                vec![0.0; req.x.len()],
                SymMatrix::zeros(req.x.len()),
            )
            .expect("consistent dims"),
            claimed_value: None,
        })
    });
    let lower: SupportSupplier = Arc::new(|req| {
        Ok(SupportJet {
            jet: hyperboloid_cap_jet(req.x),
            claimed_value: None,
        })
    });

    ContradictionInstance {
        op,
        h0,
        c_e: PLANE_HYPERBOLOID_C_E,
        c_s: 1.0,
        u0,
        u1,
        upper_support: upper,
        lower_support: lower,
        admissibility: None,
        seed,
        tolerances: PipelineTolerances::default(),
    }
}

/// A synthetic instance whose suppliers fabricate the operator inequalities:
/// the jets are built to pass every individually checkable hypothesis (they
/// touch, they satisfy the one-sided Hessian bound, and the max-point
/// first/second-order tests hold by construction), while the claimed operator
/// values assert `M[φ₀] ≤ −ε/2` and `M[φ₁] ≥ ε/2`. Both branches of the
/// contradiction then fire and the pipeline must report
/// `inconsistent-hypotheses`.
pub fn fabricated_gap_instance(seed: u64) -> ContradictionInstance {
    let origin = vec![-1.0, -1.0];
    let spacing = vec![0.1, 0.1];
    let shape = vec![21, 21];
    let contact = [0.5, 0.5];
    let u0 = GridFunction::from_fn(origin.clone(), spacing.clone(), shape.clone(), |_| 0.0)
        .expect("valid grid");
    let u1 = GridFunction::from_fn(origin, spacing, shape, move |x| {
        -((x[0] - contact[0]).powi(2) + (x[1] - contact[1]).powi(2))
    })
    .expect("valid grid");

    let upper: SupportSupplier = Arc::new(|req| {
        Ok(SupportJet {
            jet: Jet2::new(
                req.x.to_vec(),
                0.0,
                vec![0.0; req.x.len()],
                SymMatrix::zeros(req.x.len()),
            )
            .expect("consistent dims"),
            claimed_value: Some(-0.5 * req.epsilon),
        })
    });
    let lower: SupportSupplier = Arc::new(move |req| {
        let m = req.x.len();
        // honor the max-point conditions exactly: Dφ₁ = Dφ₀ − δ∇w and
        // D²φ₁ = D²φ₀ − δD²w − E with E ≻ 0 tiny
        let p: Vec<f64> = req
            .barrier_gradient
            .iter()
            .map(|dw| -req.delta * dw)
            .collect();
        let drop = 2.0 * req.delta * req.barrier_hessian.spectral_bounds().lambda_max.abs()
            + 1e-30;
        let hess = req
            .barrier_hessian
            .scaled(-req.delta)
            .sub(&SymMatrix::identity(m).scaled(drop));
        let value = -((req.x[0] - contact[0]).powi(2) + (req.x[1] - contact[1]).powi(2));
        Ok(SupportJet {
            jet: Jet2::new(req.x.to_vec(), value, p, hess).expect("consistent dims"),
            claimed_value: Some(0.5 * req.epsilon),
        })
    });

    ContradictionInstance {
        op: laplacian(2),
        h0: 0.0,
        c_e: 1.0,
        c_s: 1.0,
        u0,
        u1,
        upper_support: upper,
        lower_support: lower,
        admissibility: None,
        seed,
        tolerances: PipelineTolerances::default(),
    }
}

/// Identical comparands: both equal to the same hyperboloid cap; the pipeline
/// short-circuits with the `identical` verdict.
pub fn identical_instance(seed: u64) -> ContradictionInstance {
    let base = plane_vs_hyperboloid_instance(0.0, seed);
    ContradictionInstance {
        u0: base.u1.clone(),
        ..base
    }
}

//! Quasi-linear operators `M[u] = Σ aᶦʲ(x, u, Du) D_ij u + b(x, u, Du)`:
//! representation, admissible regions, uniform-ellipticity certification and
//! linearization along the segment between two second-order jets.

mod builtins;
mod table;

pub use builtins::{flat_mean_curvature, laplacian};
pub use table::operator_from_table;

use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::quad::gauss_legendre_unit;
use crate::report::{Verdict, VerificationReport};
use crate::symkernel::SymMatrix;

pub type CoeffMatrixFn = Arc<dyn Fn(&[f64], f64, &[f64]) -> SymMatrix + Send + Sync>;
pub type CoeffScalarFn = Arc<dyn Fn(&[f64], f64, &[f64]) -> f64 + Send + Sync>;
pub type CoeffMatrixDpFn = Arc<dyn Fn(&[f64], f64, &[f64], usize) -> SymMatrix + Send + Sync>;
pub type CoeffVectorFn = Arc<dyn Fn(&[f64], f64, &[f64]) -> Vec<f64> + Send + Sync>;
pub type MembershipFn = Arc<dyn Fn(&[f64], f64, &[f64]) -> bool + Send + Sync>;

#[derive(Debug, Error)]
pub enum QlError {
    #[error("jet dimensions inconsistent: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("jets must share the same base point (max coordinate difference {0:.3e})")]
    BasePointMismatch(f64),
    #[error("point (x={x:?}, r={r}, p={p:?}) is outside the admissible region")]
    Inadmissible { x: Vec<f64>, r: f64, p: Vec<f64> },
    #[error("segment leaves the admissible region at t={t}")]
    SegmentLeavesRegion { t: f64 },
    #[error("empty sample set")]
    EmptySampleSet,
    #[error("ellipticity violation at sample {index}: {detail} (measured {measured:.6e} vs C_E={c_e})")]
    EllipticityViolation {
        index: usize,
        detail: String,
        measured: f64,
        c_e: f64,
        x: Vec<f64>,
        r: f64,
        p: Vec<f64>,
    },
    #[error("fiber convexity violated at x={x:?}: midpoint of two members is not a member")]
    FiberNotConvex { x: Vec<f64> },
}

/// Second-order jet `(x, u(x), Du(x), D²u(x))` of a function at a point.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub x: Vec<f64>,
    pub r: f64,
    pub p: Vec<f64>,
    pub hess: SymMatrix,
}

impl Jet2 {
    pub fn new(x: Vec<f64>, r: f64, p: Vec<f64>, hess: SymMatrix) -> Result<Self, QlError> {
        let m = x.len();
        if p.len() != m {
            return Err(QlError::DimensionMismatch {
                expected: m,
                got: p.len(),
            });
        }
        if hess.dim() != m {
            return Err(QlError::DimensionMismatch {
                expected: m,
                got: hess.dim(),
            });
        }
        Ok(Jet2 { x, r, p, hess })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// Sampling envelope for the `(r, p)` fiber of an admissible region. Membership
/// is still decided by the region predicate; the envelope only bounds where
/// rejection sampling looks.
#[derive(Debug, Clone)]
pub struct FiberBounds {
    pub r_range: (f64, f64),
    pub p_box: Vec<(f64, f64)>,
}

/// Open region `U ⊆ ℝᵐ × ℝ × ℝᵐ` of admissible `(x, r, p)` triples.
#[derive(Clone)]
pub struct AdmissibleRegion {
    m: usize,
    member: MembershipFn,
    fiber_bounds: FiberBounds,
    convex_fibers: bool,
}

impl AdmissibleRegion {
    pub fn new(
        m: usize,
        member: MembershipFn,
        fiber_bounds: FiberBounds,
        convex_fibers: bool,
    ) -> Self {
        assert_eq!(fiber_bounds.p_box.len(), m);
        AdmissibleRegion {
            m,
            member,
            fiber_bounds,
            convex_fibers,
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn convex_fibers(&self) -> bool {
        self.convex_fibers
    }

    pub fn fiber_bounds(&self) -> &FiberBounds {
        &self.fiber_bounds
    }

    pub fn contains(&self, x: &[f64], r: f64, p: &[f64]) -> bool {
        (self.member)(x, r, p)
    }

    /// Rejection-sample a fiber point over `x`. Returns `None` when the
    /// envelope misses the fiber too often (1000 tries).
    pub fn sample_fiber(&self, x: &[f64], rng: &mut impl rand::Rng) -> Option<(f64, Vec<f64>)> {
        for _ in 0..1000 {
            let r = rng.gen_range(self.fiber_bounds.r_range.0..=self.fiber_bounds.r_range.1);
            let p: Vec<f64> = self
                .fiber_bounds
                .p_box
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                .collect();
            if self.contains(x, r, &p) {
                return Some((r, p));
            }
        }
        None
    }

    /// Midpoint test of fiber convexity on `pairs` random member pairs.
    pub fn check_fiber_convexity(
        &self,
        x: &[f64],
        pairs: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<(), QlError> {
        for _ in 0..pairs {
            let Some((r0, p0)) = self.sample_fiber(x, rng) else {
                continue;
            };
            let Some((r1, p1)) = self.sample_fiber(x, rng) else {
                continue;
            };
            let rm = 0.5 * (r0 + r1);
            let pm: Vec<f64> = p0.iter().zip(&p1).map(|(a, b)| 0.5 * (a + b)).collect();
            if !self.contains(x, rm, &pm) {
                return Err(QlError::FiberNotConvex { x: x.to_vec() });
            }
        }
        Ok(())
    }
}

impl std::fmt::Debug for AdmissibleRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdmissibleRegion")
            .field("m", &self.m)
            .field("fiber_bounds", &self.fiber_bounds)
            .field("convex_fibers", &self.convex_fibers)
            .finish_non_exhaustive()
    }
}

/// Quasi-linear operator with coefficient evaluators and optional analytic
/// `(r, p)`-derivatives. Missing derivatives fall back to central finite
/// differences with step `h_fd · (1 + |value|)`. Coefficients are never
/// differentiated in `x`.
#[derive(Clone)]
pub struct QuasiLinearOperator {
    m: usize,
    name: String,
    a: CoeffMatrixFn,
    b: CoeffScalarFn,
    da_dr: Option<CoeffMatrixFn>,
    da_dp: Option<CoeffMatrixDpFn>,
    db_dr: Option<CoeffScalarFn>,
    db_dp: Option<CoeffVectorFn>,
    h_fd: f64,
    region: Option<AdmissibleRegion>,
}

impl QuasiLinearOperator {
    pub const DEFAULT_H_FD: f64 = 1e-5;

    pub fn new(m: usize, name: impl Into<String>, a: CoeffMatrixFn, b: CoeffScalarFn) -> Self {
        QuasiLinearOperator {
            m,
            name: name.into(),
            a,
            b,
            da_dr: None,
            da_dp: None,
            db_dr: None,
            db_dp: None,
            h_fd: Self::DEFAULT_H_FD,
            region: None,
        }
    }

    pub fn with_analytic_derivatives(
        mut self,
        da_dr: CoeffMatrixFn,
        da_dp: CoeffMatrixDpFn,
        db_dr: CoeffScalarFn,
        db_dp: CoeffVectorFn,
    ) -> Self {
        self.da_dr = Some(da_dr);
        self.da_dp = Some(da_dp);
        self.db_dr = Some(db_dr);
        self.db_dp = Some(db_dp);
        self
    }

    pub fn with_region(mut self, region: AdmissibleRegion) -> Self {
        assert_eq!(region.dim(), self.m);
        self.region = Some(region);
        self
    }

    pub fn with_fd_step(mut self, h_fd: f64) -> Self {
        assert!(h_fd > 0.0);
        self.h_fd = h_fd;
        self
    }

    /// Normalize away a constant right-hand side: replaces `b` by `b − h0`.
    /// The ellipticity constant of the shifted operator grows to `C_E + |h0|`.
    pub fn with_h0_shift(self, h0: f64) -> Self {
        if h0 == 0.0 {
            return self;
        }
        let b = self.b.clone();
        let shifted: CoeffScalarFn = Arc::new(move |x, r, p| b(x, r, p) - h0);
        let db_dr = self.db_dr.clone();
        QuasiLinearOperator {
            name: format!("{}-h0-shifted", self.name),
            b: shifted,
            db_dr,
            ..self
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn region(&self) -> Option<&AdmissibleRegion> {
        self.region.as_ref()
    }

    pub fn a(&self, x: &[f64], r: f64, p: &[f64]) -> SymMatrix {
        (self.a)(x, r, p)
    }

    pub fn b(&self, x: &[f64], r: f64, p: &[f64]) -> f64 {
        (self.b)(x, r, p)
    }

    pub fn da_dr(&self, x: &[f64], r: f64, p: &[f64]) -> SymMatrix {
        if let Some(f) = &self.da_dr {
            return f(x, r, p);
        }
        let h = self.h_fd * (1.0 + r.abs());
        let plus = (self.a)(x, r + h, p);
        let minus = (self.a)(x, r - h, p);
        plus.sub(&minus).scaled(0.5 / h)
    }

    pub fn da_dp(&self, x: &[f64], r: f64, p: &[f64], k: usize) -> SymMatrix {
        if let Some(f) = &self.da_dp {
            return f(x, r, p, k);
        }
        let h = self.h_fd * (1.0 + p[k].abs());
        let mut pp = p.to_vec();
        pp[k] = p[k] + h;
        let plus = (self.a)(x, r, &pp);
        pp[k] = p[k] - h;
        let minus = (self.a)(x, r, &pp);
        plus.sub(&minus).scaled(0.5 / h)
    }

    pub fn db_dr(&self, x: &[f64], r: f64, p: &[f64]) -> f64 {
        if let Some(f) = &self.db_dr {
            return f(x, r, p);
        }
        let h = self.h_fd * (1.0 + r.abs());
        ((self.b)(x, r + h, p) - (self.b)(x, r - h, p)) * 0.5 / h
    }

    pub fn db_dp(&self, x: &[f64], r: f64, p: &[f64]) -> Vec<f64> {
        if let Some(f) = &self.db_dp {
            return f(x, r, p);
        }
        (0..self.m)
            .map(|k| {
                let h = self.h_fd * (1.0 + p[k].abs());
                let mut pp = p.to_vec();
                pp[k] = p[k] + h;
                let plus = (self.b)(x, r, &pp);
                pp[k] = p[k] - h;
                let minus = (self.b)(x, r, &pp);
                (plus - minus) * 0.5 / h
            })
            .collect()
    }

    pub fn is_admissible(&self, x: &[f64], r: f64, p: &[f64]) -> bool {
        match &self.region {
            Some(region) => region.contains(x, r, p),
            None => true,
        }
    }

    /// `M[jet] = Σ aᶦʲ · hess_ij + b` at the jet's base point.
    pub fn evaluate(&self, jet: &Jet2) -> Result<f64, QlError> {
        if jet.dim() != self.m {
            return Err(QlError::DimensionMismatch {
                expected: self.m,
                got: jet.dim(),
            });
        }
        if !self.is_admissible(&jet.x, jet.r, &jet.p) {
            return Err(QlError::Inadmissible {
                x: jet.x.clone(),
                r: jet.r,
                p: jet.p.clone(),
            });
        }
        let a = self.a(&jet.x, jet.r, &jet.p);
        let trace = a
            .trace_product(&jet.hess)
            .expect("coefficient matrix matches jet dimension");
        Ok(trace + self.b(&jet.x, jet.r, &jet.p))
    }
}

impl std::fmt::Debug for QuasiLinearOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuasiLinearOperator")
            .field("m", &self.m)
            .field("name", &self.name)
            .field("h_fd", &self.h_fd)
            .field("has_region", &self.region.is_some())
            .finish_non_exhaustive()
    }
}

/// Evidence that an operator is uniformly elliptic with a given constant on
/// the sampled portion of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticityCertificate {
    pub c_e: f64,
    pub samples_checked: usize,
    /// Worst `max(λ_max(a), 1/λ_min(a))` seen; the smallest constant the
    /// eigenvalue pinch alone would allow.
    pub worst_ratio: f64,
    /// Worst derivative/zeroth-order bound seen among
    /// `|∂a/∂pᵏ|, |∂a/∂r|, |∂b/∂pᵏ|, |∂b/∂r|, |b|`.
    pub worst_derivative_bound: f64,
}

/// Check the two uniform-ellipticity inequalities on every sample and issue a
/// certificate for `c_e_candidate`, failing with the first witness point that
/// violates either the eigenvalue pinch or the derivative bounds.
pub fn certify_ellipticity<I>(
    op: &QuasiLinearOperator,
    samples: I,
    c_e_candidate: f64,
) -> Result<EllipticityCertificate, QlError>
where
    I: IntoIterator<Item = (Vec<f64>, f64, Vec<f64>)>,
{
    let mut worst_ratio = 0.0f64;
    let mut worst_deriv = 0.0f64;
    let mut count = 0usize;
    for (index, (x, r, p)) in samples.into_iter().enumerate() {
        count += 1;
        let a = op.a(&x, r, &p);
        let bounds = a.spectral_bounds();
        let ratio = if bounds.lambda_min <= 0.0 {
            f64::INFINITY
        } else {
            bounds.lambda_max.max(1.0 / bounds.lambda_min)
        };
        worst_ratio = worst_ratio.max(ratio);
        if ratio > c_e_candidate {
            return Err(QlError::EllipticityViolation {
                index,
                detail: "eigenvalue pinch exceeds candidate".into(),
                measured: ratio,
                c_e: c_e_candidate,
                x,
                r,
                p,
            });
        }

        let mut deriv = op.da_dr(&x, r, &p).max_abs_entry();
        for k in 0..op.dim() {
            deriv = deriv.max(op.da_dp(&x, r, &p, k).max_abs_entry());
        }
        deriv = deriv.max(op.db_dr(&x, r, &p).abs());
        for v in op.db_dp(&x, r, &p) {
            deriv = deriv.max(v.abs());
        }
        deriv = deriv.max(op.b(&x, r, &p).abs());
        worst_deriv = worst_deriv.max(deriv);
        if deriv > c_e_candidate {
            return Err(QlError::EllipticityViolation {
                index,
                detail: "derivative or zeroth-order bound exceeds candidate".into(),
                measured: deriv,
                c_e: c_e_candidate,
                x,
                r,
                p,
            });
        }
    }
    if count == 0 {
        return Err(QlError::EmptySampleSet);
    }
    Ok(EllipticityCertificate {
        c_e: c_e_candidate,
        samples_checked: count,
        worst_ratio,
        worst_derivative_bound: worst_deriv,
    })
}

/// Coefficients of the linear operator comparing `M[φ₁]` with `M[φ₀]`:
/// `M[φ₁] − M[φ₀] = Σ Aᶦʲ D_ij(φ₁−φ₀) + Σ Bᶦ D_i(φ₁−φ₀) + C (φ₁−φ₀)`.
#[derive(Debug, Clone)]
pub struct LinearizedCoefficients {
    pub a: SymMatrix,
    pub b: Vec<f64>,
    pub c: f64,
}

/// Integrate the coefficient formulas along `φ_t = (1−t)φ₀ + tφ₁` with a
/// Gauss–Legendre rule. Admissibility of the segment is checked at the
/// quadrature nodes, which is exactly where the integrand is evaluated.
pub fn linearization_coefficients(
    op: &QuasiLinearOperator,
    jet0: &Jet2,
    jet1: &Jet2,
    quadrature_order: usize,
) -> Result<LinearizedCoefficients, QlError> {
    let m = op.dim();
    for jet in [jet0, jet1] {
        if jet.dim() != m {
            return Err(QlError::DimensionMismatch {
                expected: m,
                got: jet.dim(),
            });
        }
    }
    let base_gap = jet0
        .x
        .iter()
        .zip(&jet1.x)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if base_gap > 1e-12 {
        return Err(QlError::BasePointMismatch(base_gap));
    }
    let x = &jet0.x;

    let (nodes, weights) = gauss_legendre_unit(quadrature_order);
    let mut a_acc = SymMatrix::zeros(m);
    let mut b_acc = vec![0.0; m];
    let mut c_acc = 0.0;
    for (&t, &wt) in nodes.iter().zip(&weights) {
        let r_t = (1.0 - t) * jet0.r + t * jet1.r;
        let p_t: Vec<f64> = jet0
            .p
            .iter()
            .zip(&jet1.p)
            .map(|(p0, p1)| (1.0 - t) * p0 + t * p1)
            .collect();
        let hess_t = jet0.hess.scaled(1.0 - t).add(&jet1.hess.scaled(t));
        if !op.is_admissible(x, r_t, &p_t) {
            return Err(QlError::SegmentLeavesRegion { t });
        }

        a_acc = a_acc.add(&op.a(x, r_t, &p_t).scaled(wt));

        let db_dp = op.db_dp(x, r_t, &p_t);
        for (i, acc) in b_acc.iter_mut().enumerate() {
            let da = op.da_dp(x, r_t, &p_t, i);
            let coupled = da
                .trace_product(&hess_t)
                .expect("dimensions agree by construction");
            *acc += wt * (coupled + db_dp[i]);
        }

        let da_dr = op.da_dr(x, r_t, &p_t);
        let coupled = da_dr
            .trace_product(&hess_t)
            .expect("dimensions agree by construction");
        c_acc += wt * (coupled + op.db_dr(x, r_t, &p_t));
    }
    Ok(LinearizedCoefficients {
        a: a_acc,
        b: b_acc,
        c: c_acc,
    })
}

/// Verify the algebraic bounds the linearized coefficients must satisfy under
/// a valid ellipticity certificate: diagonal and entrywise bounds on `A`, and
/// the `n²C_E(|D²φ₀| + |D²φ₁| + 1)` bound on `Bᶦ` and `C`.
pub fn coefficient_bounds_check(
    coeffs: &LinearizedCoefficients,
    c_e: f64,
    hess0: &SymMatrix,
    hess1: &SymMatrix,
    tol: f64,
) -> VerificationReport {
    let n = coeffs.a.dim() as f64;
    let bc_bound = n * n * c_e * (hess0.max_abs_entry() + hess1.max_abs_entry() + 1.0);

    let mut witness = Vec::new();
    for i in 0..coeffs.a.dim() {
        let aii = coeffs.a.get(i, i);
        if aii < 1.0 / c_e - tol || aii > c_e + tol {
            witness.push(json!({ "entry": ["A", i, i], "value": aii }));
        }
        for j in 0..coeffs.a.dim() {
            if coeffs.a.get(i, j).abs() > c_e + tol {
                witness.push(json!({ "entry": ["A", i, j], "value": coeffs.a.get(i, j) }));
            }
        }
    }
    let mut worst_bc = 0.0f64;
    for (i, b) in coeffs.b.iter().enumerate() {
        worst_bc = worst_bc.max(b.abs());
        if b.abs() > bc_bound + tol {
            witness.push(json!({ "entry": ["B", i], "value": b }));
        }
    }
    worst_bc = worst_bc.max(coeffs.c.abs());
    if coeffs.c.abs() > bc_bound + tol {
        witness.push(json!({ "entry": ["C"], "value": coeffs.c }));
    }

    let verdict = if witness.is_empty() {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    VerificationReport::new("quasilinear/coefficient-bounds", verdict)
        .with_residual("bc_bound", bc_bound)
        .with_residual("worst_bc", worst_bc)
        .with_witness(json!(witness))
        .with_params(json!({ "c_e": c_e, "tol": tol }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_jet(hess: SymMatrix) -> Jet2 {
        let m = hess.dim();
        Jet2::new(vec![0.0; m], 0.0, vec![0.0; m], hess).unwrap()
    }

    #[test]
    fn laplacian_evaluates_to_trace() {
        let op = laplacian(2);
        let jet = laplacian_jet(SymMatrix::diagonal(&[1.0, 1.0]));
        assert_abs_diff_eq!(op.evaluate(&jet).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_source_with_zero_hessian() {
        let h0 = 0.7;
        let op = laplacian(2).with_h0_shift(h0);
        let jet = laplacian_jet(SymMatrix::zeros(2));
        assert_abs_diff_eq!(op.evaluate(&jet).unwrap(), -h0, epsilon = 1e-15);
    }

    #[test]
    fn flat_graph_of_unit_hyperboloid_has_mean_curvature_one() {
        // f(x) = sqrt(1 + ||x||^2) in Minkowski: H = 1 at every x.
        let m = 2;
        let op = flat_mean_curvature(m);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let jet = hyperboloid_jet(&x, 1.0);
            assert_abs_diff_eq!(op.evaluate(&jet).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    /// Jet of sign * sqrt(1 + ||x||^2); closed-form first and second
    /// derivatives.
    pub(crate) fn hyperboloid_jet(x: &[f64], sign: f64) -> Jet2 {
        let m = x.len();
        let s = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let r = sign * s;
        let p: Vec<f64> = x.iter().map(|v| sign * v / s).collect();
        let hess = SymMatrix::from_fn(m, |i, j| {
            let kron = if i == j { 1.0 } else { 0.0 };
            sign * (kron / s - x[i] * x[j] / (s * s * s))
        });
        Jet2::new(x.to_vec(), r, p, hess).unwrap()
    }

    #[test]
    fn inadmissible_jet_is_reported() {
        let m = 2;
        let member: MembershipFn = Arc::new(|_x, _r, p: &[f64]| {
            p.iter().map(|v| v * v).sum::<f64>() < 0.5
        });
        let region = AdmissibleRegion::new(
            m,
            member,
            FiberBounds {
                r_range: (-1.0, 1.0),
                p_box: vec![(-1.0, 1.0); m],
            },
            true,
        );
        let op = flat_mean_curvature(m).with_region(region);
        let jet = Jet2::new(
            vec![0.0, 0.0],
            0.0,
            vec![0.9, 0.0],
            SymMatrix::zeros(2),
        )
        .unwrap();
        assert!(matches!(op.evaluate(&jet), Err(QlError::Inadmissible { .. })));
    }

    #[test]
    fn laplacian_certificate_is_tight() {
        let op = laplacian(2);
        let samples = vec![(vec![0.0, 0.0], 0.0, vec![0.0, 0.0]); 5];
        let cert = certify_ellipticity(&op, samples, 1.0).unwrap();
        assert_abs_diff_eq!(cert.worst_ratio, 1.0, epsilon = 1e-14);
        assert_eq!(cert.samples_checked, 5);
        assert_abs_diff_eq!(cert.worst_derivative_bound, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn certificate_monotone_in_candidate() {
        let op = flat_mean_curvature(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let samples: Vec<_> = (0..200)
            .map(|_| {
                let x = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let mut p = vec![rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
                while p.iter().map(|v| v * v).sum::<f64>() >= 0.75 {
                    p = vec![rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
                }
                (x, rng.gen_range(-1.0..1.0), p)
            })
            .collect();
        let tight = certify_ellipticity(&op, samples.clone(), 8.0).unwrap();
        // valid for the measured constant means valid for anything larger
        let loose = certify_ellipticity(&op, samples, tight.worst_ratio.max(tight.worst_derivative_bound) + 1.0);
        assert!(loose.is_ok());
    }

    #[test]
    fn unbounded_source_fails_certification() {
        let a: CoeffMatrixFn = Arc::new(|_x, _r, _p| SymMatrix::identity(1));
        let b: CoeffScalarFn = Arc::new(|x: &[f64], _r, _p| 1.0 / x[0]);
        let op = QuasiLinearOperator::new(1, "unbounded-b", a, b);
        let samples = vec![(vec![1e-6], 0.0, vec![0.0])];
        let err = certify_ellipticity(&op, samples, 5.0).unwrap_err();
        assert!(matches!(err, QlError::EllipticityViolation { .. }));
    }

    #[test]
    fn empty_sample_set_is_an_error() {
        let op = laplacian(2);
        assert!(matches!(
            certify_ellipticity(&op, Vec::new(), 1.0),
            Err(QlError::EmptySampleSet)
        ));
    }

    #[test]
    fn equal_jets_linearize_to_pointwise_coefficients() {
        let op = flat_mean_curvature(2);
        let jet = hyperboloid_jet(&[0.3, -0.2], 1.0);
        let coeffs = linearization_coefficients(&op, &jet, &jet, 16).unwrap();
        let a_direct = op.a(&jet.x, jet.r, &jet.p);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(
                    coeffs.a.get(i, j),
                    a_direct.get(i, j),
                    epsilon = 1e-13
                );
            }
        }
        // single-point integrands for B and C
        let db_dp = op.db_dp(&jet.x, jet.r, &jet.p);
        for i in 0..2 {
            let expected = op
                .da_dp(&jet.x, jet.r, &jet.p, i)
                .trace_product(&jet.hess)
                .unwrap()
                + db_dp[i];
            assert_abs_diff_eq!(coeffs.b[i], expected, epsilon = 1e-12);
        }
        let expected_c = op
            .da_dr(&jet.x, jet.r, &jet.p)
            .trace_product(&jet.hess)
            .unwrap()
            + op.db_dr(&jet.x, jet.r, &jet.p);
        assert_abs_diff_eq!(coeffs.c, expected_c, epsilon = 1e-12);
    }

    #[test]
    fn laplacian_linearization_is_trivial() {
        let op = laplacian(2);
        let jet0 = laplacian_jet(SymMatrix::diagonal(&[2.0, -1.0]));
        let jet1 = laplacian_jet(SymMatrix::diagonal(&[0.5, 0.25]));
        let coeffs = linearization_coefficients(&op, &jet0, &jet1, 8).unwrap();
        assert_abs_diff_eq!(coeffs.a.get(0, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(coeffs.a.get(0, 1), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(coeffs.b[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(coeffs.c, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn difference_identity_holds_for_flat_operator() {
        let op = flat_mean_curvature(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let jet0 = random_admissible_jet(&op, &x, &mut rng);
            let jet1 = random_admissible_jet(&op, &x, &mut rng);
            let coeffs = linearization_coefficients(&op, &jet0, &jet1, 16).unwrap();
            let lhs = op.evaluate(&jet1).unwrap() - op.evaluate(&jet0).unwrap();
            let mut rhs = coeffs
                .a
                .trace_product(&jet1.hess.sub(&jet0.hess))
                .unwrap();
            for i in 0..2 {
                rhs += coeffs.b[i] * (jet1.p[i] - jet0.p[i]);
            }
            rhs += coeffs.c * (jet1.r - jet0.r);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-8);
        }
    }

    pub(crate) fn random_admissible_jet(
        op: &QuasiLinearOperator,
        x: &[f64],
        rng: &mut impl rand::Rng,
    ) -> Jet2 {
        let m = op.dim();
        let mut p: Vec<f64>;
        loop {
            p = (0..m).map(|_| rng.gen_range(-0.6..0.6)).collect();
            if p.iter().map(|v| v * v).sum::<f64>() < 0.64 {
                break;
            }
        }
        let r = rng.gen_range(-1.0..1.0);
        let hess = SymMatrix::from_fn(m, |_, _| rng.gen_range(-1.5..1.5));
        Jet2::new(x.to_vec(), r, p, hess).unwrap()
    }

    #[test]
    fn quadrature_order_doubling_is_stable() {
        let op = flat_mean_curvature(2);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = vec![0.1, -0.4];
        let jet0 = random_admissible_jet(&op, &x, &mut rng);
        let jet1 = random_admissible_jet(&op, &x, &mut rng);
        let c16 = linearization_coefficients(&op, &jet0, &jet1, 16).unwrap();
        let c32 = linearization_coefficients(&op, &jet0, &jet1, 32).unwrap();
        let drift = c16
            .a
            .sub(&c32.a)
            .max_abs_entry()
            .max((c16.c - c32.c).abs())
            .max(
                c16.b
                    .iter()
                    .zip(&c32.b)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max),
            );
        assert!(drift < 1e-10, "quadrature drift {drift}");
    }

    #[test]
    fn segment_leaving_region_is_detected() {
        let m = 1;
        // admissible iff p in (-0.5, 0.5); endpoints near both edges make the
        // segment pass through the excluded middle band below.
        let member: MembershipFn =
            Arc::new(|_x, _r, p: &[f64]| p[0].abs() < 0.5 && p[0].abs() > 0.2);
        let region = AdmissibleRegion::new(
            m,
            member,
            FiberBounds {
                r_range: (-1.0, 1.0),
                p_box: vec![(-0.5, 0.5)],
            },
            false,
        );
        let op = laplacian(1).with_region(region);
        let jet0 = Jet2::new(vec![0.0], 0.0, vec![-0.4], SymMatrix::zeros(1)).unwrap();
        let jet1 = Jet2::new(vec![0.0], 0.0, vec![0.4], SymMatrix::zeros(1)).unwrap();
        assert!(matches!(
            linearization_coefficients(&op, &jet0, &jet1, 16),
            Err(QlError::SegmentLeavesRegion { .. })
        ));
    }

    #[test]
    fn coefficient_bounds_catch_corruption() {
        let op = laplacian(2);
        let jet = laplacian_jet(SymMatrix::zeros(2));
        let mut coeffs = linearization_coefficients(&op, &jet, &jet, 4).unwrap();
        let ok = coefficient_bounds_check(&coeffs, 1.0, &jet.hess, &jet.hess, 1e-10);
        assert_eq!(ok.verdict, Verdict::Pass);

        coeffs.a.set(0, 0, 2.0); // plant A^11 = 2 C_E
        let bad = coefficient_bounds_check(&coeffs, 1.0, &jet.hess, &jet.hess, 1e-10);
        assert_eq!(bad.verdict, Verdict::ConclusionFailure);
        assert!(bad.witness.as_array().map(|w| !w.is_empty()).unwrap_or(false));
    }

    #[test]
    fn fiber_convexity_sampling() {
        let m = 2;
        let member: MembershipFn =
            Arc::new(|_x, r, p: &[f64]| r.abs() < 1.0 && p.iter().map(|v| v * v).sum::<f64>() < 0.75);
        let region = AdmissibleRegion::new(
            m,
            member,
            FiberBounds {
                r_range: (-1.0, 1.0),
                p_box: vec![(-0.9, 0.9); m],
            },
            true,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        region
            .check_fiber_convexity(&[0.0, 0.0], 500, &mut rng)
            .unwrap();
    }
}

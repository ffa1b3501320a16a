//! Maximum-principle machinery: the radial comparison function, the derived
//! constant ledger, standard-setup validation, Hessian budgets, the
//! comparison-operator lower bound, contact-point geometry and the
//! contradiction pipeline.

pub mod contact;
pub mod grid;
pub mod pipeline;
pub mod sampling;
pub mod scenarios;

pub use contact::{contact_locator, ContactError, ContactGeometry};
pub use grid::{GridError, GridFunction};
pub use pipeline::{
    contradiction_report, support_paraboloid, ContradictionInstance, PipelineError,
    PipelineTolerances, SupportJet, SupportSupplier,
};

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::quasilinear::{Jet2, LinearizedCoefficients, QuasiLinearOperator};
use crate::report::{Verdict, VerificationReport};
use crate::symkernel::SymMatrix;

#[derive(Debug, Error)]
pub enum MaxLabError {
    #[error("comparison function is singular at the origin")]
    OriginSingularity,
    #[error("alpha must be positive, got {0}")]
    AlphaNotPositive(f64),
    #[error("parameter out of domain: {name} = {value} ({constraint})")]
    ParameterDomain {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
    #[error("lower-bound precondition failed: {0}")]
    LowerBoundContract(#[from] LowerBoundContractError),
}

/// Named precondition failures for the comparison-operator lower bound.
#[derive(Debug, Error)]
pub enum LowerBoundContractError {
    #[error("alpha-mismatch: setup alpha {setup} differs from ledger alpha_bar {ledger}")]
    AlphaMismatch { setup: f64, ledger: f64 },
    #[error("delta-exceeds-delta-bar: delta {delta} > delta_bar {delta_bar}")]
    DeltaExceedsDeltaBar { delta: f64, delta_bar: f64 },
    #[error("coefficient-out-of-contract: {detail} (measured {measured:.6e}, allowed {allowed:.6e})")]
    CoefficientOutOfContract {
        detail: String,
        measured: f64,
        allowed: f64,
    },
    #[error("max-point-outside-annulus: ||x*|| = {norm} not in [r0, 3r0] = [{r0}, {three_r0}]")]
    OutsideAnnulus {
        norm: f64,
        r0: f64,
        three_r0: f64,
    },
}

/// The radial barrier `w(x) = ‖x‖^{−α}` with closed-form first and second
/// derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonFunction {
    pub alpha: f64,
}

impl ComparisonFunction {
    pub fn new(alpha: f64) -> Result<Self, MaxLabError> {
        if alpha <= 0.0 {
            return Err(MaxLabError::AlphaNotPositive(alpha));
        }
        Ok(ComparisonFunction { alpha })
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, MaxLabError> {
        let norm = norm(x);
        if norm == 0.0 {
            return Err(MaxLabError::OriginSingularity);
        }
        Ok(norm.powf(-self.alpha))
    }

    /// `D_i w = −α ‖x‖^{−(α+2)} xᶦ`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, MaxLabError> {
        let norm = norm(x);
        if norm == 0.0 {
            return Err(MaxLabError::OriginSingularity);
        }
        let scale = -self.alpha * norm.powf(-(self.alpha + 2.0));
        Ok(x.iter().map(|v| scale * v).collect())
    }

    /// `D_ij w = α(α+2) ‖x‖^{−(α+4)} xᶦxʲ − α ‖x‖^{−(α+2)} δᵢⱼ`.
    pub fn hessian(&self, x: &[f64]) -> Result<SymMatrix, MaxLabError> {
        let norm = norm(x);
        if norm == 0.0 {
            return Err(MaxLabError::OriginSingularity);
        }
        let alpha = self.alpha;
        let outer = alpha * (alpha + 2.0) * norm.powf(-(alpha + 4.0));
        let diag = alpha * norm.powf(-(alpha + 2.0));
        Ok(SymMatrix::from_fn(x.len(), |i, j| {
            let kron = if i == j { 1.0 } else { 0.0 };
            outer * x[i] * x[j] - diag * kron
        }))
    }

    pub fn jet(&self, x: &[f64]) -> Result<Jet2, MaxLabError> {
        Ok(Jet2::new(
            x.to_vec(),
            self.value(x)?,
            self.gradient(x)?,
            self.hessian(x)?,
        )
        .expect("comparison jet dimensions are consistent"))
    }
}

/// Exact closed-form jet of the comparison function at `x`.
pub fn comparison_jet(alpha: f64, x: &[f64]) -> Result<Jet2, MaxLabError> {
    ComparisonFunction::new(alpha)?.jet(x)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sub_points(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `base^exp` with a sequential-multiplication fast path for small integer
/// exponents. Rational reference values like `δ̄(1) = r₀³/1` then agree with
/// their decimal counterparts to the last bit.
fn power(base: f64, exp: f64) -> f64 {
    let rounded = exp.round();
    if exp == rounded && rounded.abs() <= 512.0 {
        let mut acc = 1.0f64;
        for _ in 0..rounded.abs() as u32 {
            acc *= base;
        }
        if rounded < 0.0 {
            1.0 / acc
        } else {
            acc
        }
    } else {
        base.powf(exp)
    }
}

/// The closed-form constants the contradiction argument runs on, derived from
/// the analytic dimension, the ellipticity and support constants and the
/// contact radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub m: usize,
    pub c_e: f64,
    pub c_s: f64,
    pub r0: f64,
    /// Hessian budget `C_H = 2(C_E²((m−1)(C_S+1)+2)+1)`.
    pub c_h: f64,
    /// Barrier exponent `ᾱ = −2 + C_E(1 + m C_E + m³ C_E (C_H+1))`.
    pub alpha_bar: f64,
    /// `δ̄(ᾱ) = r₀^{ᾱ+2}/ᾱ`; may underflow to zero for large `ᾱ`.
    pub delta_bar: f64,
    /// `r₁ = min{r₀, 1/(4 m² C_E (C_H+1) ᾱ r₀^{−(ᾱ+2)})}`.
    pub r1: f64,
}

impl ConstantLedger {
    /// `δ̄(α) = r₀^{α+2}/α` for an arbitrary positive exponent.
    pub fn delta_bar_at(&self, alpha: f64) -> f64 {
        power(self.r0, alpha + 2.0) / alpha
    }

    /// Radius for the geometric variant, which additionally caps `r₁` by the
    /// admissibility radius `r₂`.
    pub fn geometric_r1(&self, r2: f64) -> f64 {
        self.r1.min(r2)
    }

    /// Gradient-slack margin `δ₃ = δ₂ (ᾱ r₀^{−(ᾱ+2)})^{−1}` of the geometric
    /// variant.
    pub fn delta3(&self, delta2: f64) -> f64 {
        delta2 * self.r0.powf(self.alpha_bar + 2.0) / self.alpha_bar
    }
}

/// Derive the constant ledger. Requires `m ≥ 1`, `C_E ≥ 1`, `C_S ≥ 0` and
/// `0 < 3r₀ ≤ 1`.
pub fn derive_constants(
    m: usize,
    c_e: f64,
    c_s: f64,
    r0: f64,
) -> Result<ConstantLedger, MaxLabError> {
    if m < 1 {
        return Err(MaxLabError::ParameterDomain {
            name: "m",
            value: m as f64,
            constraint: "m >= 1",
        });
    }
    if !(c_e >= 1.0) {
        return Err(MaxLabError::ParameterDomain {
            name: "c_e",
            value: c_e,
            constraint: "c_e >= 1",
        });
    }
    if !(c_s >= 0.0) {
        return Err(MaxLabError::ParameterDomain {
            name: "c_s",
            value: c_s,
            constraint: "c_s >= 0",
        });
    }
    if !(r0 > 0.0 && 3.0 * r0 <= 1.0) {
        return Err(MaxLabError::ParameterDomain {
            name: "r0",
            value: r0,
            constraint: "0 < 3*r0 <= 1",
        });
    }
    let mf = m as f64;
    let c_h = 2.0 * (c_e * c_e * ((mf - 1.0) * (c_s + 1.0) + 2.0) + 1.0);
    let alpha_bar = -2.0 + c_e * (1.0 + mf * c_e + mf.powi(3) * c_e * (c_h + 1.0));
    let delta_bar = power(r0, alpha_bar + 2.0) / alpha_bar;
    let barrier_gradient_bound = alpha_bar * power(r0, -(alpha_bar + 2.0));
    let r1 = r0.min(1.0 / (4.0 * (mf * mf * c_e * (c_h + 1.0)) * barrier_gradient_bound));
    Ok(ConstantLedger {
        m,
        c_e,
        c_s,
        r0,
        c_h,
        alpha_bar,
        delta_bar,
        r1,
    })
}

/// Geometric data and jets the standard setup consists of. All radial
/// quantities (the barrier `w`, the annulus, `‖x₁ − x₀‖ = 2r₀`) are measured
/// from the ball center `x₀`.
#[derive(Debug, Clone)]
pub struct StandardSetup {
    /// Ball center; translating it to the origin is the usual normalization,
    /// kept explicit here so grid instances need no coordinate shuffle.
    pub x0: Vec<f64>,
    pub x1: Vec<f64>,
    pub x_star: Vec<f64>,
    pub r0: f64,
    pub r1: f64,
    pub alpha: f64,
    pub delta: f64,
    pub jet0: Jet2,
    pub jet1: Jet2,
}

/// A single named violation of the standard-setup conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum SetupViolation {
    /// item 1: `‖x₁‖ = 2r₀`
    ContactDistance { measured: f64, expected: f64 },
    /// item 2: `r₁ ≤ r₀ < 3r₀ ≤ 1`
    RadiiOrdering { r0: f64, r1: f64 },
    /// item 3: positive barrier exponent
    AlphaNotPositive { alpha: f64 },
    /// item 4: positive delta
    DeltaNotPositive { delta: f64 },
    /// item 4: `x*` interior to `B(x₁, r₁)`
    MaxPointOutsideBall { distance: f64, r1: f64 },
    /// jets must sit at `x*`
    JetBasePointMismatch { gap: f64 },
    /// item 4 (first-order): `Dφ₁ − Dφ₀ + δ Dw = 0` at `x*`
    FirstOrderCondition { residual: f64 },
    /// item 4 (second-order): `D²f(x*) ≤ 0`
    SecondOrderCondition { lambda_max: f64 },
    /// item 5: `D²φ₁(x*) ≥ −C_S I`
    SupportHessianBound { lambda_min: f64, c_s: f64 },
    /// item 6: `φ₀` admissible at `x*`
    Phi0NotAdmissible,
    /// item 6: `Σ aᶦʲ(x*, φ₀, Dφ₀) D_ij φ₀ ≤ 2C_E`
    Phi0OperatorBound { measured: f64, allowed: f64 },
}

impl SetupViolation {
    pub fn name(&self) -> &'static str {
        match self {
            SetupViolation::ContactDistance { .. } => "contact-distance",
            SetupViolation::RadiiOrdering { .. } => "radii-ordering",
            SetupViolation::AlphaNotPositive { .. } => "alpha-not-positive",
            SetupViolation::DeltaNotPositive { .. } => "delta-not-positive",
            SetupViolation::MaxPointOutsideBall { .. } => "max-point-outside-ball",
            SetupViolation::JetBasePointMismatch { .. } => "jet-base-point-mismatch",
            SetupViolation::FirstOrderCondition { .. } => "first-order-condition",
            SetupViolation::SecondOrderCondition { .. } => "second-order-condition",
            SetupViolation::SupportHessianBound { .. } => "support-hessian-bound",
            SetupViolation::Phi0NotAdmissible => "phi0-not-admissible",
            SetupViolation::Phi0OperatorBound { .. } => "phi0-operator-bound",
        }
    }
}

/// Validate every standard-setup condition against the operator and the
/// ledger constants. Returns the full list of violations; empty means valid.
///
/// The one-sided support bound is enforced as `D²φ₁(x*) ≥ −C_S I`, the form
/// every downstream estimate consumes.
pub fn validate_standard_setup(
    op: &QuasiLinearOperator,
    setup: &StandardSetup,
    ledger: &ConstantLedger,
    tol: f64,
) -> Vec<SetupViolation> {
    let mut violations = Vec::new();

    let x1_norm = norm(&sub_points(&setup.x1, &setup.x0));
    if (x1_norm - 2.0 * setup.r0).abs() > tol * (1.0 + 2.0 * setup.r0) {
        violations.push(SetupViolation::ContactDistance {
            measured: x1_norm,
            expected: 2.0 * setup.r0,
        });
    }
    if !(setup.r1 <= setup.r0 && 3.0 * setup.r0 <= 1.0 + tol && setup.r1 > 0.0) {
        violations.push(SetupViolation::RadiiOrdering {
            r0: setup.r0,
            r1: setup.r1,
        });
    }
    if setup.alpha <= 0.0 {
        violations.push(SetupViolation::AlphaNotPositive { alpha: setup.alpha });
        return violations; // the barrier jet below needs a positive exponent
    }
    if setup.delta <= 0.0 {
        violations.push(SetupViolation::DeltaNotPositive { delta: setup.delta });
    }
    let gap_to_x1 = setup
        .x_star
        .iter()
        .zip(&setup.x1)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if gap_to_x1 >= setup.r1 {
        violations.push(SetupViolation::MaxPointOutsideBall {
            distance: gap_to_x1,
            r1: setup.r1,
        });
    }
    let base_gap = setup
        .jet0
        .x
        .iter()
        .zip(&setup.x_star)
        .chain(setup.jet1.x.iter().zip(&setup.x_star))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    if base_gap > tol {
        violations.push(SetupViolation::JetBasePointMismatch { gap: base_gap });
    }

    let barrier = ComparisonFunction { alpha: setup.alpha };
    let x_star_rel = sub_points(&setup.x_star, &setup.x0);
    if let (Ok(grad_w), Ok(hess_w)) = (barrier.gradient(&x_star_rel), barrier.hessian(&x_star_rel))
    {
        let residual = setup
            .jet1
            .p
            .iter()
            .zip(&setup.jet0.p)
            .zip(&grad_w)
            .map(|((p1, p0), dw)| (p1 - p0 + setup.delta * dw).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = 1.0 + norm(&setup.jet0.p).max(norm(&setup.jet1.p));
        if residual > tol.max(1e-9) * scale {
            violations.push(SetupViolation::FirstOrderCondition { residual });
        }
        let f_hess = setup
            .jet1
            .hess
            .sub(&setup.jet0.hess)
            .add(&hess_w.scaled(setup.delta));
        let lambda_max = f_hess.spectral_bounds().lambda_max;
        let hess_scale = 1.0 + f_hess.max_abs_entry();
        if lambda_max > tol.max(1e-9) * hess_scale {
            violations.push(SetupViolation::SecondOrderCondition { lambda_max });
        }
    }

    let lambda_min = setup.jet1.hess.spectral_bounds().lambda_min;
    if lambda_min < -ledger.c_s - tol {
        violations.push(SetupViolation::SupportHessianBound {
            lambda_min,
            c_s: ledger.c_s,
        });
    }

    if !op.is_admissible(&setup.jet0.x, setup.jet0.r, &setup.jet0.p) {
        violations.push(SetupViolation::Phi0NotAdmissible);
    } else {
        let a0 = op.a(&setup.jet0.x, setup.jet0.r, &setup.jet0.p);
        let principal = a0
            .trace_product(&setup.jet0.hess)
            .expect("dimensions agree");
        if principal > 2.0 * ledger.c_e + tol {
            violations.push(SetupViolation::Phi0OperatorBound {
                measured: principal,
                allowed: 2.0 * ledger.c_e,
            });
        }
    }

    violations
}

/// Check the Hessian budget at the max point: with `σ = δ α r₀^{−(α+2)}`,
///
/// `|D²φ₀|(x*) + |D²φ₁|(x*) ≤ 2(C_E²((m−1)(C_S+σ)+2) + σ)`,
///
/// which collapses to the ledger's `C_H` whenever `δ ≤ δ̄(α)` (then `σ ≤ 1`).
pub fn hessian_budget(
    op: &QuasiLinearOperator,
    setup: &StandardSetup,
    ledger: &ConstantLedger,
    tol: f64,
) -> VerificationReport {
    let violations = validate_standard_setup(op, setup, ledger, tol);
    if !violations.is_empty() {
        let names: Vec<&str> = violations.iter().map(|v| v.name()).collect();
        return VerificationReport::new("maxlab/hessian-budget", Verdict::HypothesisFailure)
            .with_witness(json!({ "violations": names, "detail": format!("{violations:?}") }));
    }

    let sum = setup.jet0.hess.max_abs_entry() + setup.jet1.hess.max_abs_entry();
    let sigma = setup.delta * setup.alpha * setup.r0.powf(-(setup.alpha + 2.0));
    let corollary_branch = setup.delta <= ledger.delta_bar_at(setup.alpha);
    let mf = ledger.m as f64;
    let bound = if corollary_branch {
        ledger.c_h
    } else {
        2.0 * (ledger.c_e * ledger.c_e * ((mf - 1.0) * (ledger.c_s + sigma) + 2.0) + sigma)
    };
    let verdict = if sum <= bound + tol {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    VerificationReport::new("maxlab/hessian-budget", verdict)
        .with_residual("hessian_sum", sum)
        .with_residual("bound", bound)
        .with_residual("sigma", sigma)
        .with_witness(json!({
            "branch": if corollary_branch { "corollary" } else { "lemma" },
        }))
        .with_params(json!({
            "m": ledger.m, "c_e": ledger.c_e, "c_s": ledger.c_s,
            "alpha": setup.alpha, "delta": setup.delta, "r0": setup.r0,
        }))
}

/// Evaluate `L_{φ₀,φ₁} w(x*) = Σ Aᶦʲ D_ij w + Σ Bᶦ D_i w` after validating the
/// contract: `α = ᾱ`, `δ ≤ δ̄`, coefficient bounds within the certificate and
/// `x*` inside the annulus where the barrier estimates hold. Callers assert
/// the returned value is `≥ 1`.
pub fn comparison_operator_lower_bound(
    setup: &StandardSetup,
    ledger: &ConstantLedger,
    coeffs: &LinearizedCoefficients,
    tol: f64,
) -> Result<f64, LowerBoundContractError> {
    let rel = (setup.alpha - ledger.alpha_bar).abs() / ledger.alpha_bar.max(1.0);
    if rel > 1e-12 {
        return Err(LowerBoundContractError::AlphaMismatch {
            setup: setup.alpha,
            ledger: ledger.alpha_bar,
        });
    }
    if setup.delta > ledger.delta_bar * (1.0 + 1e-12) {
        return Err(LowerBoundContractError::DeltaExceedsDeltaBar {
            delta: setup.delta,
            delta_bar: ledger.delta_bar,
        });
    }
    let x_star_rel = sub_points(&setup.x_star, &setup.x0);
    let x_norm = norm(&x_star_rel);
    if x_norm < setup.r0 - tol || x_norm > 3.0 * setup.r0 + tol {
        return Err(LowerBoundContractError::OutsideAnnulus {
            norm: x_norm,
            r0: setup.r0,
            three_r0: 3.0 * setup.r0,
        });
    }
    for i in 0..coeffs.a.dim() {
        let aii = coeffs.a.get(i, i);
        if aii < 1.0 / ledger.c_e - tol || aii > ledger.c_e + tol {
            return Err(LowerBoundContractError::CoefficientOutOfContract {
                detail: format!("diagonal A^{i}{i} outside [1/C_E, C_E]"),
                measured: aii,
                allowed: ledger.c_e,
            });
        }
        for j in 0..coeffs.a.dim() {
            if coeffs.a.get(i, j).abs() > ledger.c_e + tol {
                return Err(LowerBoundContractError::CoefficientOutOfContract {
                    detail: format!("|A^{i}{j}| exceeds C_E"),
                    measured: coeffs.a.get(i, j).abs(),
                    allowed: ledger.c_e,
                });
            }
        }
    }
    let b_norm = norm(&coeffs.b);
    let b_allowed = (ledger.m as f64).powi(3) * ledger.c_e * (ledger.c_h + 1.0);
    if b_norm > b_allowed + tol {
        return Err(LowerBoundContractError::CoefficientOutOfContract {
            detail: "||B|| exceeds m^3 C_E (C_H + 1)".into(),
            measured: b_norm,
            allowed: b_allowed,
        });
    }

    let barrier = ComparisonFunction { alpha: setup.alpha };
    let grad_w = barrier
        .gradient(&x_star_rel)
        .expect("x* is inside the annulus, away from the center");
    let hess_w = barrier
        .hessian(&x_star_rel)
        .expect("x* is inside the annulus, away from the center");
    let second_order = coeffs
        .a
        .trace_product(&hess_w)
        .expect("dimensions agree by construction");
    let first_order: f64 = coeffs.b.iter().zip(&grad_w).map(|(b, g)| b * g).sum();
    Ok(second_order + first_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn comparison_jet_closed_form() {
        let jet = comparison_jet(1.0, &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(jet.r, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet.p[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet.p[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet.hess.get(0, 0), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet.hess.get(0, 1), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(jet.hess.get(1, 1), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn comparison_value_is_one_on_unit_sphere() {
        for alpha in [0.5, 1.0, 7.0, 73.0] {
            let w = ComparisonFunction::new(alpha).unwrap();
            let x = [0.6, 0.8];
            assert_abs_diff_eq!(w.value(&x).unwrap(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn comparison_rejects_origin() {
        assert!(matches!(
            comparison_jet(1.0, &[0.0, 0.0]),
            Err(MaxLabError::OriginSingularity)
        ));
    }

    #[test]
    fn barrier_bands_hold_on_annulus() {
        // gradient and Hessian bands for r0 <= ||x|| <= 3 r0 <= 1
        let r0: f64 = 0.3;
        let alphas = [0.7, 1.0, 4.0];
        for &alpha in &alphas {
            let w = ComparisonFunction::new(alpha).unwrap();
            let grad_cap = alpha * r0.powf(-(alpha + 2.0));
            let hess_lo = -grad_cap;
            let hess_hi = alpha * (alpha + 2.0) * r0.powf(-(alpha + 2.0));
            for k in 0..40 {
                let radius = r0 + (3.0 * r0 - r0) * (k as f64) / 39.0;
                let angle = 0.37 * k as f64;
                let x = [radius * angle.cos(), radius * angle.sin()];
                let g = w.gradient(&x).unwrap();
                assert!(norm(&g) <= grad_cap * (1.0 + 1e-12));
                let bounds = w.hessian(&x).unwrap().spectral_bounds();
                assert!(bounds.lambda_min >= hess_lo * (1.0 + 1e-12));
                assert!(bounds.lambda_max <= hess_hi * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn ledger_reference_values() {
        let ledger = derive_constants(2, 1.0, 0.0, 1.0 / 3.0).unwrap();
        assert_eq!(ledger.c_h, 8.0);
        assert_eq!(ledger.alpha_bar, 73.0);
        // delta_bar(1) = (1/3)^3 / 1 = 1/27, exact as an f64
        assert_eq!(ledger.delta_bar_at(1.0), 1.0 / 27.0);
    }

    #[test]
    fn alpha_bar_is_at_least_one() {
        for (m, c_e, c_s) in [(1, 1.0, 0.0), (2, 1.0, 0.0), (3, 1.5, 2.0), (5, 4.0, 0.5)] {
            let ledger = derive_constants(m, c_e, c_s, 0.3).unwrap();
            assert!(ledger.alpha_bar >= 1.0, "alpha_bar = {}", ledger.alpha_bar);
        }
    }

    #[test]
    fn ledger_rejects_bad_parameters() {
        assert!(derive_constants(0, 1.0, 0.0, 0.3).is_err());
        assert!(derive_constants(2, 0.5, 0.0, 0.3).is_err());
        assert!(derive_constants(2, 1.0, -1.0, 0.3).is_err());
        assert!(derive_constants(2, 1.0, 0.0, 0.4).is_err());
    }

    #[test]
    fn delta3_equals_delta2_times_delta_bar() {
        let ledger = derive_constants(1, 1.2, 1.0, 1.0 / 3.0).unwrap();
        let delta2 = 0.05;
        let expected = delta2 * ledger.r0.powf(ledger.alpha_bar + 2.0) / ledger.alpha_bar;
        assert_abs_diff_eq!(ledger.delta3(delta2), expected, epsilon = 1e-18);
        assert_abs_diff_eq!(ledger.geometric_r1(1e-6), f64::min(1e-6, ledger.r1), epsilon = 0.0);
    }

    #[test]
    fn identity_coefficients_lower_bound_closed_form() {
        // A = I, B = 0: L w = alpha(alpha+2)||x||^{-(alpha+4)}||x||^2
        //                     - alpha ||x||^{-(alpha+2)} m > 0 on the annulus.
        let ledger = derive_constants(2, 1.0, 0.0, 1.0 / 3.0).unwrap();
        let alpha = ledger.alpha_bar;
        let x_star = vec![0.55, 0.3];
        let jet = comparison_jet(alpha, &x_star).unwrap();
        let setup = StandardSetup {
            x0: vec![0.0, 0.0],
            x1: vec![2.0 * ledger.r0, 0.0],
            x_star: x_star.clone(),
            r0: ledger.r0,
            r1: ledger.r1,
            alpha,
            delta: ledger.delta_bar,
            jet0: jet.clone(),
            jet1: jet.clone(),
        };
        let coeffs = LinearizedCoefficients {
            a: SymMatrix::identity(2),
            b: vec![0.0, 0.0],
            c: 0.0,
        };
        let value = comparison_operator_lower_bound(&setup, &ledger, &coeffs, 1e-9).unwrap();
        let nx = norm(&x_star);
        let expected = alpha * (alpha + 2.0) * nx.powf(-(alpha + 4.0)) * nx * nx
            - alpha * nx.powf(-(alpha + 2.0)) * 2.0;
        assert!(expected > 0.0);
        let rel = (value - expected).abs() / expected.abs();
        assert!(rel < 1e-10, "relative error {rel}");
    }

    #[test]
    fn lower_bound_contract_violations_are_named() {
        let ledger = derive_constants(2, 1.0, 0.0, 1.0 / 3.0).unwrap();
        let x_star = vec![0.55, 0.3];
        let jet = comparison_jet(ledger.alpha_bar, &x_star).unwrap();
        let mut setup = StandardSetup {
            x0: vec![0.0, 0.0],
            x1: vec![2.0 * ledger.r0, 0.0],
            x_star,
            r0: ledger.r0,
            r1: ledger.r1,
            alpha: ledger.alpha_bar,
            delta: ledger.delta_bar,
            jet0: jet.clone(),
            jet1: jet,
        };
        let good = LinearizedCoefficients {
            a: SymMatrix::identity(2),
            b: vec![0.0, 0.0],
            c: 0.0,
        };
        // wrong alpha
        setup.alpha = 1.0;
        assert!(matches!(
            comparison_operator_lower_bound(&setup, &ledger, &good, 1e-9),
            Err(LowerBoundContractError::AlphaMismatch { .. })
        ));
        setup.alpha = ledger.alpha_bar;
        // violating the B-norm contract
        let bad = LinearizedCoefficients {
            a: SymMatrix::identity(2),
            b: vec![1e9, 0.0],
            c: 0.0,
        };
        assert!(matches!(
            comparison_operator_lower_bound(&setup, &ledger, &bad, 1e-9),
            Err(LowerBoundContractError::CoefficientOutOfContract { .. })
        ));
    }
}

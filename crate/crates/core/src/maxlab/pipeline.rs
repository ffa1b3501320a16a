//! The contradiction pipeline: locate the contact ball, build the barrier
//! perturbation `h = (u₁−u₀) + δ(w − w(x₁))`, find its interior max, collect
//! support jets there and confront the operator chain bound with the
//! first/second-derivative tests. Also the global support-paraboloid check.

use std::sync::Arc;

use serde_json::json;
use thiserror::Error;

use crate::quasilinear::{
    coefficient_bounds_check, linearization_coefficients, Jet2, QlError, QuasiLinearOperator,
};
use crate::report::{Verdict, VerificationReport};
use crate::symkernel::SymMatrix;

use super::contact::{contact_locator, ContactError};
use super::grid::GridFunction;
use super::{
    comparison_operator_lower_bound, derive_constants, ComparisonFunction, MaxLabError,
    StandardSetup,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("support supplier failed: {0}")]
    Supplier(String),
    #[error(transparent)]
    Operator(#[from] QlError),
    #[error(transparent)]
    Constants(#[from] MaxLabError),
}

/// A support jet handed to the pipeline. `claimed_value` is the operator
/// value the supplier asserts for its (conceptual) support function; when
/// absent the pipeline evaluates the operator on the jet directly. Claims are
/// always cross-checked against the direct evaluation in the report.
#[derive(Debug, Clone)]
pub struct SupportJet {
    pub jet: Jet2,
    pub claimed_value: Option<f64>,
}

/// Context handed to a support supplier: the max point, the inequality slack
/// and the barrier derivatives there, so lower suppliers can honor the
/// first-order contact condition. Honest suppliers typically ignore the
/// barrier fields.
pub struct SupportRequest<'a> {
    pub x: &'a [f64],
    pub epsilon: f64,
    pub delta: f64,
    pub barrier_gradient: &'a [f64],
    pub barrier_hessian: &'a SymMatrix,
}

pub type SupportSupplier =
    Arc<dyn Fn(&SupportRequest<'_>) -> Result<SupportJet, PipelineError> + Send + Sync>;

/// Tolerances for the pipeline's numerical tests.
#[derive(Debug, Clone, Copy)]
pub struct PipelineTolerances {
    /// generic comparison slack
    pub check_tol: f64,
    /// first-derivative test at the max point
    pub gradient_tol: f64,
    /// second-derivative test at the max point
    pub hessian_tol: f64,
    /// jet value versus nodal value at the touch point
    pub touch_tol: f64,
    pub quadrature_order: usize,
}

impl Default for PipelineTolerances {
    fn default() -> Self {
        PipelineTolerances {
            check_tol: 1e-9,
            gradient_tol: 1e-7,
            hessian_tol: 1e-7,
            touch_tol: 1e-9,
            quadrature_order: 16,
        }
    }
}

/// Largest barrier exponent the pipeline will evaluate in `f64`: keeps
/// `r₀^{−(α+4)}` and `δ̄(α) = r₀^{α+2}/α` comfortably inside the normal range
/// (250 decades of headroom). The ledger's `ᾱ` is used when it fits; larger
/// exponents are capped and the report flags the cap, which disables the
/// chain branch (its contract requires `α = ᾱ`).
fn alpha_cap(r0: f64) -> f64 {
    let decades = 250.0 * std::f64::consts::LN_10;
    decades / (1.0 / r0).ln() - 4.0
}

/// Everything the contradiction pipeline needs: the operator and its
/// ellipticity data, the two grid comparands, the constant right-hand side
/// and the support suppliers. `admissibility` optionally carries the
/// geometric-variant `(r₂, δ₂)` margins.
pub struct ContradictionInstance {
    pub op: QuasiLinearOperator,
    pub h0: f64,
    pub c_e: f64,
    pub c_s: f64,
    pub u0: GridFunction,
    pub u1: GridFunction,
    pub upper_support: SupportSupplier,
    pub lower_support: SupportSupplier,
    pub admissibility: Option<(f64, f64)>,
    pub seed: u64,
    pub tolerances: PipelineTolerances,
}

const CHECK: &str = "maxlab/contradiction";

/// Run the full contradiction pipeline and report the outcome:
///
/// * `identical` — the comparands agree at grid resolution;
/// * `hypothesis-failure` — a named hypothesis or chain premise failed
///   (the usual outcome for honest instances, the theorem forbids the rest);
/// * `inconsistent-hypotheses` — every hypothesis check passed yet the chain
///   bound `Lf(x*) ≥ δ/4 > 0` and the max-point test `Lf(x*) ≤ 0` both fire;
/// * `numerical-quality` — the geometry could not be resolved on the grid.
pub fn contradiction_report(instance: &ContradictionInstance) -> VerificationReport {
    match run_pipeline(instance) {
        Ok(report) => report,
        Err(stage) => stage,
    }
}

fn fail(verdict: Verdict, witness: serde_json::Value) -> VerificationReport {
    VerificationReport::new(CHECK, verdict).with_witness(witness)
}

#[allow(clippy::result_large_err)] // the Err side is the early-exit report
fn run_pipeline(
    instance: &ContradictionInstance,
) -> Result<VerificationReport, VerificationReport> {
    let tol = &instance.tolerances;
    let m = instance.op.dim();

    // contact geometry
    let geometry = match contact_locator(&instance.u0, &instance.u1) {
        Ok(geometry) => geometry,
        Err(ContactError::Identical) => {
            return Ok(
                VerificationReport::new(CHECK, Verdict::Identical).with_seed(instance.seed)
            )
        }
        Err(err) => {
            return Err(fail(
                Verdict::HypothesisFailure,
                json!({ "stage": "contact", "error": err.to_string() }),
            )
            .with_seed(instance.seed))
        }
    };
    if !instance.u0.is_interior(&geometry.x1_index) {
        return Err(fail(
            Verdict::NumericalQuality,
            json!({ "stage": "contact", "error": "contact node on the grid boundary" }),
        )
        .with_seed(instance.seed));
    }

    // normalization: fold H0 into b, enlarge C_E accordingly
    let op = instance.op.clone().with_h0_shift(instance.h0);
    let c_e_eff = instance.c_e + instance.h0.abs();

    // contact ball, slid toward x1 if r0 must shrink to satisfy 3r0 <= 1
    let mut x0 = geometry.x0.clone();
    let mut r0 = geometry.r0;
    let r0_max = 1.0 / 3.0 - 1e-12;
    if r0 > r0_max {
        let scale = r0_max / r0;
        for k in 0..m {
            x0[k] = geometry.x1[k] + (x0[k] - geometry.x1[k]) * scale;
        }
        r0 = r0_max;
    }
    let x1 = geometry.x1.clone();

    let ledger = derive_constants(m, c_e_eff, instance.c_s, r0).map_err(|e| {
        fail(
            Verdict::HypothesisFailure,
            json!({ "stage": "constants", "error": e.to_string() }),
        )
        .with_seed(instance.seed)
    })?;

    let cap = alpha_cap(r0);
    let alpha = ledger.alpha_bar.min(cap);
    let alpha_capped = alpha < ledger.alpha_bar;
    let delta_bar = ledger.delta_bar_at(alpha);
    let barrier = ComparisonFunction { alpha };

    // r1 from the effective exponent; equals the ledger's r1 when alpha is
    // uncapped, and stays positive when the ledger value underflowed
    let barrier_gradient_bound = alpha * r0.powf(-(alpha + 2.0));
    let mf = m as f64;
    let mut r1 = r0.min(
        1.0 / (4.0 * (mf * mf * c_e_eff * (ledger.c_h + 1.0)) * barrier_gradient_bound),
    );
    if let Some((r2, _)) = instance.admissibility {
        r1 = r1.min(r2);
    }

    // retry loop: shrink r1 when the discrete max lands on the ball boundary
    let mut attempt = 0;
    let (x_star, delta, h_max) = loop {
        let delta = match delta_margin(instance, &geometry.contact_nodes, &x0, &x1, r0, r1, &barrier)
        {
            Some(mut delta1) => {
                delta1 = delta1.min(delta_bar);
                if let Some((_, delta2)) = instance.admissibility {
                    delta1 = delta1.min(ledger.delta3(delta2));
                }
                delta1
            }
            None => {
                return Err(fail(
                    Verdict::HypothesisFailure,
                    json!({
                        "stage": "delta",
                        "error": "contact gap is not strictly negative near S'",
                    }))
                .with_seed(instance.seed))
            }
        };
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(fail(
                Verdict::HypothesisFailure,
                json!({ "stage": "delta", "error": "degenerate delta", "delta": delta }),
            )
            .with_seed(instance.seed));
        }

        match interior_max(instance, &x0, &x1, r1, delta, &barrier) {
            Some((x_star, h_max, on_boundary)) => {
                if !on_boundary {
                    break (x_star, delta, h_max);
                }
                attempt += 1;
                if attempt > 4 {
                    return Err(fail(
                        Verdict::NumericalQuality,
                        json!({
                            "stage": "interior-max",
                            "error": "max stuck on the ball boundary after r1 retries",
                        }))
                    .with_seed(instance.seed));
                }
                r1 *= 0.5;
            }
            None => {
                return Err(fail(
                    Verdict::NumericalQuality,
                    json!({ "stage": "interior-max", "error": "no interior grid node in B(x1, r1)" }),
                )
                .with_seed(instance.seed))
            }
        }
    };

    let epsilon = 0.5 * (delta / 4.0).min(c_e_eff);

    let x_star_rel: Vec<f64> = x_star.iter().zip(&x0).map(|(a, b)| a - b).collect();
    let grad_w = barrier.gradient(&x_star_rel).expect("x* is off-center");
    let hess_w = barrier.hessian(&x_star_rel).expect("x* is off-center");

    let request = SupportRequest {
        x: &x_star,
        epsilon,
        delta,
        barrier_gradient: &grad_w,
        barrier_hessian: &hess_w,
    };
    let upper = (instance.upper_support)(&request).map_err(|e| {
        fail(
            Verdict::HypothesisFailure,
            json!({ "stage": "support-supplier", "side": "upper", "error": e.to_string() }),
        )
        .with_seed(instance.seed)
    })?;
    let lower = (instance.lower_support)(&request).map_err(|e| {
        fail(
            Verdict::HypothesisFailure,
            json!({ "stage": "support-supplier", "side": "lower", "error": e.to_string() }),
        )
        .with_seed(instance.seed)
    })?;

    // jets must touch the comparands at x* and be admissible
    let star_index = nearest_node_index(&instance.u0, &x_star);
    let u0_star = instance.u0.value(&star_index);
    let u1_star = instance.u1.value(&star_index);
    let mut failures: Vec<serde_json::Value> = Vec::new();
    for (side, jet, nodal) in [("upper", &upper.jet, u0_star), ("lower", &lower.jet, u1_star)] {
        let base_gap = jet
            .x
            .iter()
            .zip(&x_star)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        if base_gap > tol.touch_tol {
            failures.push(json!({
                "hypothesis": format!("{side}-support-base-point"),
                "residual": base_gap,
            }));
        }
        if (jet.r - nodal).abs() > tol.touch_tol * (1.0 + nodal.abs()) {
            failures.push(json!({
                "hypothesis": format!("{side}-support-touching"),
                "residual": (jet.r - nodal).abs(),
            }));
        }
        if !op.is_admissible(&jet.x, jet.r, &jet.p) {
            failures.push(json!({ "hypothesis": format!("{side}-support-admissible") }));
        }
    }
    if !failures.is_empty() {
        return Err(fail(Verdict::HypothesisFailure, json!({ "failed": failures }))
            .with_seed(instance.seed));
    }

    // the support-sense operator inequalities, claims cross-checked
    let direct0 = op.evaluate(&upper.jet).map_err(|e| {
        fail(
            Verdict::HypothesisFailure,
            json!({ "stage": "evaluate-upper", "error": e.to_string() }),
        )
        .with_seed(instance.seed)
    })?;
    let direct1 = op.evaluate(&lower.jet).map_err(|e| {
        fail(
            Verdict::HypothesisFailure,
            json!({ "stage": "evaluate-lower", "error": e.to_string() }),
        )
        .with_seed(instance.seed)
    })?;
    let value0 = upper.claimed_value.unwrap_or(direct0);
    let value1 = lower.claimed_value.unwrap_or(direct1);

    if value0 > epsilon + tol.check_tol {
        failures.push(json!({
            "hypothesis": "upper-support-inequality",
            "value": value0,
            "allowed": epsilon,
        }));
    }
    if value1 < -epsilon - tol.check_tol {
        failures.push(json!({
            "hypothesis": "lower-support-inequality",
            "value": value1,
            "allowed": -epsilon,
        }));
    }
    let hess1_min = lower.jet.hess.spectral_bounds().lambda_min;
    if hess1_min < -instance.c_s - tol.check_tol {
        failures.push(json!({
            "hypothesis": "lower-support-hessian-bound",
            "lambda_min": hess1_min,
            "allowed": -instance.c_s,
        }));
    }
    let hess_sum = upper.jet.hess.max_abs_entry() + lower.jet.hess.max_abs_entry();
    if hess_sum > ledger.c_h + tol.check_tol {
        failures.push(json!({
            "hypothesis": "hessian-budget",
            "sum": hess_sum,
            "allowed": ledger.c_h,
        }));
    }

    let mut residuals = std::collections::BTreeMap::new();
    residuals.insert("delta".to_string(), delta);
    residuals.insert("epsilon".to_string(), epsilon);
    residuals.insert("h_max".to_string(), h_max);
    residuals.insert("upper_value".to_string(), value0);
    residuals.insert("lower_value".to_string(), value1);
    residuals.insert("upper_claim_gap".to_string(), (value0 - direct0).abs());
    residuals.insert("lower_claim_gap".to_string(), (value1 - direct1).abs());

    let params = json!({
        "m": m,
        "h0": instance.h0,
        "c_e": instance.c_e,
        "c_s": instance.c_s,
        "r1": r1,
        "alpha": alpha,
        "alpha_capped": alpha_capped,
        "ledger": ledger,
    });
    let witness_base = json!({
        "x0": x0,
        "x1": x1,
        "x_star": x_star,
        "contact_nodes": geometry.contact_nodes.len(),
    });

    if !failures.is_empty() {
        let mut w = witness_base;
        w["failed"] = json!(failures);
        return Err(VerificationReport::new(CHECK, Verdict::HypothesisFailure)
            .with_witness(w)
            .with_params(params)
            .with_seed(instance.seed));
    }

    // linearized coefficients between the two jets
    let coeffs = match linearization_coefficients(&op, &upper.jet, &lower.jet, tol.quadrature_order)
    {
        Ok(coeffs) => coeffs,
        Err(err) => {
            let mut w = witness_base;
            w["failed"] = json!([{ "hypothesis": "segment-admissible", "error": err.to_string() }]);
            return Err(VerificationReport::new(CHECK, Verdict::HypothesisFailure)
                .with_witness(w)
                .with_params(params)
                .with_seed(instance.seed));
        }
    };
    let bounds_report =
        coefficient_bounds_check(&coeffs, c_e_eff, &upper.jet.hess, &lower.jet.hess, tol.check_tol);
    if !bounds_report.passed() {
        // measured coefficients escaping their certified bounds falsifies the
        // coefficient lemma: build-blocking
        let mut w = witness_base;
        w["failed"] = json!([{ "hypothesis": "coefficient-bounds" }]);
        w["bounds_witness"] = bounds_report.witness.clone();
        return Err(VerificationReport::new(CHECK, Verdict::ConclusionFailure)
            .with_witness(w)
            .with_params(params)
            .with_seed(instance.seed));
    }

    // branch 1: the operator chain bound Lf(x*) >= delta/4 > 0
    let setup = StandardSetup {
        x0: x0.clone(),
        x1: x1.clone(),
        x_star: x_star.clone(),
        r0,
        r1,
        alpha,
        delta,
        jet0: upper.jet.clone(),
        jet1: lower.jet.clone(),
    };
    let gap = u1_star - u0_star;
    let mut chain_premise_failures: Vec<serde_json::Value> = Vec::new();
    if alpha_capped {
        chain_premise_failures.push(json!({
            "premise": "alpha-equals-alpha-bar",
            "error": "alpha_bar exceeds the f64-evaluable cap",
        }));
    }
    let mut lw_value = f64::NAN;
    if !alpha_capped {
        match comparison_operator_lower_bound(&setup, &ledger, &coeffs, tol.check_tol) {
            Ok(value) => {
                lw_value = value;
                if !(value >= 1.0 - 1e-9) {
                    chain_premise_failures.push(json!({
                        "premise": "barrier-lower-bound",
                        "value": value,
                    }));
                }
            }
            Err(err) => chain_premise_failures.push(json!({
                "premise": "lower-bound-contract",
                "error": err.to_string(),
            })),
        }
    }
    let gap_cap = delta * alpha * r0.powf(-(alpha + 2.0)) * r1;
    if gap.abs() > gap_cap * (1.0 + 1e-9) + tol.check_tol * delta {
        chain_premise_failures.push(json!({
            "premise": "contact-gap-bound",
            "gap": gap.abs(),
            "allowed": gap_cap,
        }));
    }
    if coeffs.c.abs() * gap.abs() > delta / 4.0 + tol.check_tol * delta {
        chain_premise_failures.push(json!({
            "premise": "zeroth-order-term",
            "value": coeffs.c.abs() * gap.abs(),
            "allowed": delta / 4.0,
        }));
    }
    let chain_floor = -2.0 * epsilon - coeffs.c.abs() * gap.abs() + delta * lw_value;
    let fire_chain = chain_premise_failures.is_empty() && chain_floor >= delta / 4.0 * (1.0 - 1e-9);

    residuals.insert("lw_value".to_string(), lw_value);
    residuals.insert("chain_floor".to_string(), chain_floor);
    residuals.insert("contact_gap".to_string(), gap);

    // branch 2: first and second derivative tests at the located max
    let f_grad: Vec<f64> = lower
        .jet
        .p
        .iter()
        .zip(&upper.jet.p)
        .zip(&grad_w)
        .map(|((p1, p0), dw)| p1 - p0 + delta * dw)
        .collect();
    let f_grad_norm = f_grad.iter().map(|v| v * v).sum::<f64>().sqrt();
    let f_hess = lower
        .jet
        .hess
        .sub(&upper.jet.hess)
        .add(&hess_w.scaled(delta));
    let f_hess_max = f_hess.spectral_bounds().lambda_max;
    let scale0 = 1.0 + upper.jet.p.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let first_order_ok = f_grad_norm <= tol.gradient_tol * scale0;
    let second_order_ok = f_hess_max <= tol.hessian_tol * (1.0 + f_hess.max_abs_entry());
    let fire_calculus = first_order_ok && second_order_ok;

    let direct_lf = coeffs.a.trace_product(&f_hess).expect("dims agree")
        + coeffs
            .b
            .iter()
            .zip(&f_grad)
            .map(|(b, g)| b * g)
            .sum::<f64>();
    residuals.insert("max_point_gradient".to_string(), f_grad_norm);
    residuals.insert("max_point_hessian_max".to_string(), f_hess_max);
    residuals.insert("direct_lf".to_string(), direct_lf);

    let mut witness = witness_base;
    witness["chain_fired"] = json!(fire_chain);
    witness["calculus_fired"] = json!(fire_calculus);
    if !chain_premise_failures.is_empty() {
        witness["chain_premise_failures"] = json!(chain_premise_failures);
    }

    let verdict = if fire_chain && fire_calculus {
        Verdict::InconsistentHypotheses
    } else {
        // the theorem's prediction for honest data: one of the two branches
        // cannot fire; name what blocked it
        if !fire_calculus {
            witness["failed"] = json!([{
                "hypothesis": "max-point-derivative-tests",
                "gradient_residual": f_grad_norm,
                "hessian_lambda_max": f_hess_max,
            }]);
        } else {
            witness["failed"] = json!([{ "hypothesis": "chain-premises" }]);
        }
        Verdict::HypothesisFailure
    };

    let mut report = VerificationReport::new(CHECK, verdict)
        .with_witness(witness)
        .with_params(params)
        .with_seed(instance.seed);
    report.residuals = residuals;
    Ok(report)
}

/// Contact-gap margin on the sphere shell: half the largest coefficient that
/// keeps `h < 0` on nodes adjacent to `S' = ∂B(x₁,r₁) ∩ B̄(x₀,2r₀)`. Returns
/// `None` when a shell node fails to be strictly below contact, `+∞` when no
/// nodes are adjacent to the shell at grid resolution.
fn delta_margin(
    instance: &ContradictionInstance,
    contact_nodes: &[Vec<usize>],
    x0: &[f64],
    x1: &[f64],
    r0: f64,
    r1: f64,
    barrier: &ComparisonFunction,
) -> Option<f64> {
    let u0 = &instance.u0;
    let u1 = &instance.u1;
    let h = u0.max_spacing();
    let w_x1 = barrier
        .value(&sub(x1, x0))
        .expect("contact node is 2r0 from the center");
    let contact: std::collections::BTreeSet<Vec<usize>> =
        contact_nodes.iter().cloned().collect();

    let mut worst_gap: Option<f64> = None; // max of u1 - u0 (negative when strict)
    let mut worst_w: f64 = 0.0; // max of w - w(x1)
    for idx in u0.indices() {
        if contact.contains(&idx) {
            continue;
        }
        let y = u0.coords(&idx);
        let d_x1 = dist(&y, x1);
        if (d_x1 - r1).abs() > h {
            continue;
        }
        if dist(&y, x0) > 2.0 * r0 + 1e-12 {
            continue;
        }
        let gap = u1.value(&idx) - u0.value(&idx);
        worst_gap = Some(worst_gap.map_or(gap, |g: f64| g.max(gap)));
        let w = barrier.value(&sub(&y, x0)).expect("shell stays off-center");
        worst_w = worst_w.max(w - w_x1);
    }
    match worst_gap {
        None => Some(f64::INFINITY),
        Some(gap) if gap >= 0.0 => None,
        Some(gap) => {
            if worst_w <= 0.0 {
                Some(f64::INFINITY)
            } else {
                Some(-gap / (2.0 * worst_w))
            }
        }
    }
}

/// Maximize `h = (u₁−u₀) + δ(w − w(x₁))` over interior grid nodes strictly
/// inside `B(x₁, r₁)`; row-major iteration makes ties resolve to the
/// lexicographically smallest index. The flag reports whether the argmax sits
/// within half a spacing of the ball boundary.
fn interior_max(
    instance: &ContradictionInstance,
    x0: &[f64],
    x1: &[f64],
    r1: f64,
    delta: f64,
    barrier: &ComparisonFunction,
) -> Option<(Vec<f64>, f64, bool)> {
    let u0 = &instance.u0;
    let u1 = &instance.u1;
    let w_x1 = barrier.value(&sub(x1, x0)).expect("x1 is 2r0 from center");
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for idx in u0.indices() {
        if !u0.is_interior(&idx) {
            continue;
        }
        let y = u0.coords(&idx);
        let d = dist(&y, x1);
        if d >= r1 {
            continue;
        }
        let w = barrier.value(&sub(&y, x0)).expect("ball stays off-center");
        let h = (u1.value(&idx) - u0.value(&idx)) + delta * (w - w_x1);
        let better = match &best {
            None => true,
            Some((hb, _, _)) => h > *hb,
        };
        if better {
            best = Some((h, y, d));
        }
    }
    best.map(|(h, y, d)| {
        let margin = 0.5 * u0.max_spacing();
        let on_boundary = d > 0.0 && d > r1 - margin.min(r1 * 0.5);
        (y, h, on_boundary)
    })
}

fn nearest_node_index(grid: &GridFunction, x: &[f64]) -> Vec<usize> {
    (0..grid.dim())
        .map(|k| {
            let t = (x[k] - grid.origin()[k]) / grid.spacing()[k];
            (t.round().max(0.0) as usize).min(grid.shape()[k] - 1)
        })
        .collect()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Global support-paraboloid check: under the one-sided Hessian hypothesis
/// `D²v ≥ −C·I` (estimated nodewise by finite differences), there is a slope
/// `a` with `v(x) ≥ v(x₀) + ⟨x−x₀, a⟩ − (C/2)‖x−x₀‖²` at every grid node.
/// Returns the slope used (supplied, or the centered gradient at `x₀`) and
/// the verdict with the worst-violating node as witness.
pub fn support_paraboloid(
    v: &GridFunction,
    x0_index: &[usize],
    c: f64,
    slope: Option<Vec<f64>>,
    tol: f64,
) -> Result<(Vec<f64>, VerificationReport), super::GridError> {
    let a = match slope {
        Some(a) => a,
        None => v.fd_gradient(x0_index)?,
    };

    // hypothesis: nodewise FD Hessians stay above -C I (with slack for the
    // truncation error of the stencil)
    let hess_slack = tol.max(1e-6) * (1.0 + c);
    let mut hyp_worst = f64::INFINITY;
    let mut hyp_node = Vec::new();
    for idx in v.indices() {
        if !v.is_interior(&idx) {
            continue;
        }
        let lambda_min = v.fd_hessian(&idx)?.spectral_bounds().lambda_min;
        if lambda_min < hyp_worst {
            hyp_worst = lambda_min;
            hyp_node = idx;
        }
    }
    if hyp_worst < -c - hess_slack {
        let report = VerificationReport::new("maxlab/support-paraboloid", Verdict::HypothesisFailure)
            .with_residual("lambda_min", hyp_worst)
            .with_witness(json!({ "node": hyp_node, "allowed": -c }));
        return Ok((a, report));
    }

    let x0 = v.coords(x0_index);
    let v0 = v.value(x0_index);
    let mut worst_margin = f64::INFINITY;
    let mut worst_node = Vec::new();
    for idx in v.indices() {
        let x = v.coords(&idx);
        let diff = sub(&x, &x0);
        let linear: f64 = diff.iter().zip(&a).map(|(d, s)| d * s).sum();
        let quad: f64 = diff.iter().map(|d| d * d).sum();
        let margin = v.value(&idx) - (v0 + linear - 0.5 * c * quad);
        if margin < worst_margin {
            worst_margin = margin;
            worst_node = idx;
        }
    }
    let scale = 1.0 + v0.abs();
    let verdict = if worst_margin >= -tol * scale {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    let report = VerificationReport::new("maxlab/support-paraboloid", verdict)
        .with_residual("worst_margin", worst_margin)
        .with_witness(json!({ "node": worst_node, "slope": a }))
        .with_params(json!({ "c": c, "tol": tol }));
    Ok((a, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasilinear::laplacian;

    fn unit_grid(f: impl Fn(&[f64]) -> f64) -> GridFunction {
        GridFunction::from_fn(vec![-1.0, -1.0], vec![0.1, 0.1], vec![21, 21], f).unwrap()
    }

    #[test]
    fn paraboloid_extremal_case_is_tight() {
        // v = -(C/2)||x||^2 at x0 = 0: slope 0, equality at every node
        let c = 1.4;
        let v = unit_grid(|x| -0.5 * c * (x[0] * x[0] + x[1] * x[1]));
        let (a, report) = support_paraboloid(&v, &[10, 10], c, None, 1e-9).unwrap();
        assert!(a.iter().all(|s| s.abs() < 1e-12));
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(report.residuals["worst_margin"].abs() < 1e-10);
    }

    #[test]
    fn paraboloid_convex_quadratic_passes_with_gradient_slope() {
        let v = unit_grid(|x| x[0] * x[0] + 0.3 * x[0] * x[1] + x[1] * x[1] - 0.2 * x[0]);
        for c in [0.0, 1.0] {
            let (_, report) = support_paraboloid(&v, &[6, 13], c, None, 1e-9).unwrap();
            assert_eq!(report.verdict, Verdict::Pass, "c = {c}");
        }
    }

    #[test]
    fn paraboloid_cone_passes_on_and_off_the_kink() {
        let v = unit_grid(|x| (x[0] * x[0] + x[1] * x[1]).sqrt());
        // at the kink: any slope with norm <= 1 passes the one-sided check
        let (_, report) =
            support_paraboloid(&v, &[10, 10], 0.0, Some(vec![0.3, -0.4]), 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        // away from the kink on a coordinate axis the centered gradient is the
        // exact unit radial slope
        let (a, report) = support_paraboloid(&v, &[15, 10], 0.0, None, 1e-9).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-12 && a[1].abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn paraboloid_detects_concave_kink_as_hypothesis_failure() {
        let v = unit_grid(|x| -(x[0] * x[0] + x[1] * x[1]).sqrt());
        let (_, report) = support_paraboloid(&v, &[10, 10], 0.0, None, 1e-9).unwrap();
        assert_eq!(report.verdict, Verdict::HypothesisFailure);
    }

    #[test]
    fn identical_comparands_short_circuit() {
        let u = unit_grid(|x| 1.0 - (1.0 + x[0] * x[0] + x[1] * x[1]).sqrt());
        let supplier: SupportSupplier = Arc::new(|_req| {
            Err(PipelineError::Supplier("should not be called".into()))
        });
        let instance = ContradictionInstance {
            op: laplacian(2),
            h0: 0.0,
            c_e: 1.0,
            c_s: 1.0,
            u0: u.clone(),
            u1: u,
            upper_support: supplier.clone(),
            lower_support: supplier,
            admissibility: None,
            seed: 9,
            tolerances: PipelineTolerances::default(),
        };
        let report = contradiction_report(&instance);
        assert_eq!(report.verdict, Verdict::Identical);
    }
}

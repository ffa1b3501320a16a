//! Constructive sampler for valid standard setups: draws the contact
//! geometry, then builds jets that satisfy the first- and second-order max
//! conditions at `x*` by explicit construction.

use rand::Rng;

use crate::quasilinear::{Jet2, QuasiLinearOperator};
use crate::symkernel::SymMatrix;

use super::{ComparisonFunction, ConstantLedger, StandardSetup};

/// Knobs for the setup sampler. The defaults keep gradients small enough that
/// the flat mean-curvature operator stays well inside its certified region.
#[derive(Debug, Clone, Copy)]
pub struct SetupSamplerConfig {
    /// override for the barrier exponent; `None` uses the ledger's `ᾱ`
    pub alpha: Option<f64>,
    /// per-component bound for the upper jet's gradient
    pub gradient_range: f64,
    /// entrywise bound for the upper jet's Hessian
    pub hessian_range: f64,
    /// scale of the extra negative-semidefinite drop added to the lower jet
    pub drop_range: f64,
    /// `δ` is drawn as `δ̄(α)` times a value in this range
    pub delta_fraction: (f64, f64),
    /// bound for the jets' function values
    pub value_range: f64,
}

impl Default for SetupSamplerConfig {
    fn default() -> Self {
        SetupSamplerConfig {
            alpha: None,
            gradient_range: 0.1,
            hessian_range: 0.4,
            drop_range: 0.3,
            delta_fraction: (0.05, 1.0),
            value_range: 0.5,
        }
    }
}

/// Draw one standard setup for `op` under the ledger's constants:
///
/// * `x₁` at distance `2r₀` from the center in a random direction, `x*`
///   uniformly inside `B(x₁, 0.9·r₁)`;
/// * `δ = v·δ̄(α)`;
/// * upper jet `(r₀ᵛᵃˡ, p₀, H₀)` random within the configured boxes, redrawn
///   until the principal part satisfies `Σ aᶦʲ D_ij φ₀ ≤ 2C_E`;
/// * lower jet forced to the max conditions: `p₁ = p₀ − δ∇w(x*)`,
///   `H₁ = H₀ − δD²w(x*) − E` with `E ⪰ 0` random.
///
/// The result satisfies every standard-setup condition by construction
/// whenever the operator tolerates the configured jet boxes.
pub fn sample_standard_setup(
    op: &QuasiLinearOperator,
    ledger: &ConstantLedger,
    config: &SetupSamplerConfig,
    rng: &mut impl Rng,
) -> StandardSetup {
    let m = op.dim();
    let alpha = config.alpha.unwrap_or(ledger.alpha_bar);
    let barrier = ComparisonFunction { alpha };
    let r0 = ledger.r0;
    // the ledger's r1 underflows to zero once alpha_bar*ln(1/r0) exceeds the
    // f64 exponent range; any positive r1 <= r0 satisfies the setup
    let r1 = if ledger.r1 > 0.0 {
        ledger.r1
    } else {
        1e-3 * r0
    };

    let x0 = vec![0.0; m];
    let dir = random_unit(m, rng);
    let x1: Vec<f64> = dir.iter().map(|d| 2.0 * r0 * d).collect();
    let offset = random_unit(m, rng);
    let radius = 0.9 * r1 * rng.gen_range(0.0..1.0);
    let x_star: Vec<f64> = x1
        .iter()
        .zip(&offset)
        .map(|(c, o)| c + radius * o)
        .collect();

    let delta_bar = ledger.delta_bar_at(alpha);
    let delta = delta_bar * rng.gen_range(config.delta_fraction.0..=config.delta_fraction.1);

    let grad_w = barrier.gradient(&x_star).expect("x* is near 2r0, off-center");
    let hess_w = barrier.hessian(&x_star).expect("x* is near 2r0, off-center");

    let value = rng.gen_range(-config.value_range..config.value_range);
    // redraw the upper jet until the principal part obeys the setup bound
    let (p0, hess0) = loop {
        let p0: Vec<f64> =
            (0..m).map(|_| rng.gen_range(-config.gradient_range..config.gradient_range)).collect();
        let hess0 = SymMatrix::from_fn(m, |_, _| {
            rng.gen_range(-config.hessian_range..config.hessian_range)
        });
        let p1: Vec<f64> = p0
            .iter()
            .zip(&grad_w)
            .map(|(p, dw)| p - delta * dw)
            .collect();
        if !op.is_admissible(&x_star, value, &p0) || !op.is_admissible(&x_star, value, &p1) {
            continue;
        }
        let principal = op
            .a(&x_star, value, &p0)
            .trace_product(&hess0)
            .expect("dimensions agree");
        if principal <= 2.0 * ledger.c_e {
            break (p0, hess0);
        }
    };

    let p1: Vec<f64> = p0
        .iter()
        .zip(&grad_w)
        .map(|(p, dw)| p - delta * dw)
        .collect();
    // E = G Gᵀ scaled: positive semidefinite drop
    let g = SymMatrix::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
    let gram = {
        let raw = g.as_matrix() * g.as_matrix().transpose();
        SymMatrix::symmetrize(&raw).scaled(config.drop_range / m as f64)
    };
    let hess1 = hess0.sub(&hess_w.scaled(delta)).sub(&gram);

    let jet0 = Jet2::new(x_star.clone(), value, p0, hess0).expect("consistent dims");
    let jet1 = Jet2::new(x_star.clone(), value, p1, hess1).expect("consistent dims");
    StandardSetup {
        x0,
        x1,
        x_star,
        r0,
        r1,
        alpha,
        delta,
        jet0,
        jet1,
    }
}

fn random_unit(m: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxlab::{derive_constants, hessian_budget, validate_standard_setup};
    use crate::quasilinear::flat_mean_curvature;
    use crate::report::Verdict;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampled_setups_validate() {
        // chart dimension 2, modest alpha override so the barrier stays tame
        let op = flat_mean_curvature(2);
        let ledger = derive_constants(2, 2.1, 1.0, 1.0 / 3.0).unwrap();
        let config = SetupSamplerConfig {
            alpha: Some(1.0),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let setup = sample_standard_setup(&op, &ledger, &config, &mut rng);
            let violations = validate_standard_setup(&op, &setup, &ledger, 1e-9);
            assert!(violations.is_empty(), "violations: {violations:?}");
        }
    }

    #[test]
    fn sampled_flat_setups_stay_within_hessian_budget() {
        let op = flat_mean_curvature(2);
        let ledger = derive_constants(2, 2.1, 1.0, 1.0 / 3.0).unwrap();
        let config = SetupSamplerConfig {
            alpha: Some(1.0),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let setup = sample_standard_setup(&op, &ledger, &config, &mut rng);
            let report = hessian_budget(&op, &setup, &ledger, 1e-9);
            assert_eq!(report.verdict, Verdict::Pass, "report: {report:?}");
        }
    }

    #[test]
    fn gradient_difference_band_holds_at_the_max() {
        // at the max of f: ||Dphi1 - Dphi0|| = delta ||Dw(x*)||, capped by
        // delta * alpha * r0^{-(alpha+2)} on the annulus
        let op = flat_mean_curvature(2);
        let ledger = derive_constants(2, 2.1, 1.0, 1.0 / 3.0).unwrap();
        let config = SetupSamplerConfig {
            alpha: Some(1.5),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let setup = sample_standard_setup(&op, &ledger, &config, &mut rng);
            let diff: f64 = setup
                .jet1
                .p
                .iter()
                .zip(&setup.jet0.p)
                .map(|(p1, p0)| (p1 - p0) * (p1 - p0))
                .sum::<f64>()
                .sqrt();
            let cap = setup.delta * setup.alpha * setup.r0.powf(-(setup.alpha + 2.0));
            assert!(diff <= cap * (1.0 + 1e-12), "diff {diff} vs cap {cap}");
        }
    }

    #[test]
    fn violated_support_bound_is_a_hypothesis_failure() {
        let op = flat_mean_curvature(2);
        let ledger = derive_constants(2, 2.1, 0.0, 1.0 / 3.0).unwrap();
        let config = SetupSamplerConfig {
            alpha: Some(1.0),
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut setup = sample_standard_setup(&op, &ledger, &config, &mut rng);
        // plant a deep negative eigenvalue in the lower jet's Hessian,
        // breaking D^2 phi_1 >= -C_S I but nothing else the budget needs first
        setup.jet1.hess = SymMatrix::diagonal(&[-50.0, 0.0]);
        let report = hessian_budget(&op, &setup, &ledger, 1e-9);
        assert_eq!(report.verdict, Verdict::HypothesisFailure);
    }
}

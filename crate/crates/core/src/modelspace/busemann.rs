//! Busemann functions `b(x) = lim_{r↗π/2} (r − d(x, γ(r)))` of model lines,
//! with a geometric approach schedule and Aitken acceleration.

use serde_json::json;

use crate::report::{Verdict, VerificationReport};

use super::{ModelError, ModelLine, ModelSpacetime};

/// Time orientation of the Busemann limit: `Future` is `b⁺` along
/// `r ↗ π/2`; `Past` is `b⁻`, built from `b⁻_r(x) = −r − d(γ(r), x)` along
/// `r ↘ −π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusemannKind {
    Future,
    Past,
}

/// Evaluator for the Busemann function of a model line, holding the geometric
/// `r`-schedule `r_k = ±(π/2 − (π/4)·2^{−k})`, `k ≤ 20`.
#[derive(Debug, Clone)]
pub struct BusemannEvaluator {
    pub model: ModelSpacetime,
    pub line: ModelLine,
    pub kind: BusemannKind,
    pub schedule: Vec<f64>,
    /// permitted increase of `r ↦ b_r(x)` before the tail counts as
    /// non-monotone
    pub monotone_tol: f64,
}

/// One evaluation: the finite-`r` values along the schedule and the
/// extrapolated limit.
#[derive(Debug, Clone)]
pub struct BusemannSample {
    pub point: Vec<f64>,
    /// `(r, b_r)` pairs along the schedule
    pub partial: Vec<(f64, f64)>,
    pub value: f64,
}

impl BusemannEvaluator {
    pub fn new(model: ModelSpacetime, line: ModelLine, kind: BusemannKind) -> Self {
        let base = std::f64::consts::FRAC_PI_2;
        let schedule = (0..=20)
            .map(|k| {
                let gap = std::f64::consts::FRAC_PI_4 * 0.5f64.powi(k);
                match kind {
                    BusemannKind::Future => base - gap,
                    BusemannKind::Past => -(base - gap),
                }
            })
            .collect();
        BusemannEvaluator {
            model,
            line,
            kind,
            schedule,
            monotone_tol: 1e-12,
        }
    }

    /// `b(x)` with the partial values it was extrapolated from.
    ///
    /// On Minkowski models the Busemann function of a vertical line is the
    /// exact limit `b⁺ = t` (`b⁻ = −t`); the schedule degenerates there, so
    /// the closed form is returned directly.
    pub fn evaluate(&self, x: &[f64]) -> Result<BusemannSample, ModelError> {
        self.model.check_point(x)?;
        if let ModelSpacetime::Minkowski { .. } = self.model {
            let t = *x.last().expect("points are nonempty");
            let value = match self.kind {
                BusemannKind::Future => t,
                BusemannKind::Past => -t,
            };
            return Ok(BusemannSample {
                point: x.to_vec(),
                partial: Vec::new(),
                value,
            });
        }

        let mut partial = Vec::with_capacity(self.schedule.len());
        let mut tail_start = None;
        for (k, &r) in self.schedule.iter().enumerate() {
            let gamma_r = self.line.point_at(r);
            let (distance, b_r) = match self.kind {
                BusemannKind::Future => {
                    let d = self.model.lorentz_distance(x, &gamma_r)?;
                    (d, r - d)
                }
                BusemannKind::Past => {
                    let d = self.model.lorentz_distance(&gamma_r, x)?;
                    (d, -r - d)
                }
            };
            if distance > 0.0 && tail_start.is_none() {
                tail_start = Some(k);
            }
            partial.push((r, b_r));
        }

        // monotone decrease holds on the causal tail, once γ(r) has entered
        // the causal future (past) of x
        let Some(start) = tail_start else {
            return Err(ModelError::BusemannTail {
                len: 0,
                needed: 3,
            });
        };
        let tail = &partial[start..];
        if tail.len() < 3 {
            return Err(ModelError::BusemannTail {
                len: tail.len(),
                needed: 3,
            });
        }
        for window in tail.windows(2) {
            let rise = window[1].1 - window[0].1;
            if rise > self.monotone_tol {
                return Err(ModelError::NonMonotoneTail { rise });
            }
        }

        let n = tail.len();
        let value = aitken(tail[n - 3].1, tail[n - 2].1, tail[n - 1].1);
        Ok(BusemannSample {
            point: x.to_vec(),
            partial,
            value,
        })
    }
}

/// Aitken Δ² extrapolation of a geometrically converging tail; falls back to
/// the last value when the second difference degenerates.
fn aitken(a0: f64, a1: f64, a2: f64) -> f64 {
    let d1 = a1 - a0;
    let d2 = a2 - a1;
    let denom = d2 - d1;
    if denom.abs() < 1e-300 {
        return a2;
    }
    let accel = a2 - d2 * d2 / denom;
    // guard against wild extrapolation from a noisy tail
    if (accel - a2).abs() > 10.0 * d2.abs() + 1e-9 {
        a2
    } else {
        accel
    }
}

/// Verify the Busemann inequalities on a sample set: the reverse Lipschitz
/// bound `b(q) ≥ b(p) + d(p, q)` over causal pairs, `b⁺ + b⁻ ≥ 0` pointwise,
/// and on the strip (where the line splits the model) `b⁺ + b⁻ = 0` to
/// tolerance.
pub fn busemann_inequality_suite(
    model: &ModelSpacetime,
    line: &ModelLine,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<VerificationReport, ModelError> {
    let plus = BusemannEvaluator::new(*model, line.clone(), BusemannKind::Future);
    let minus = BusemannEvaluator::new(*model, line.clone(), BusemannKind::Past);

    let b_plus: Vec<f64> = points
        .iter()
        .map(|p| plus.evaluate(p).map(|s| s.value))
        .collect::<Result<_, _>>()?;
    let b_minus: Vec<f64> = points
        .iter()
        .map(|p| minus.evaluate(p).map(|s| s.value))
        .collect::<Result<_, _>>()?;

    let mut worst_lipschitz = f64::INFINITY; // min of b(q) - b(p) - d(p, q)
    let mut lipschitz_pairs = 0usize;
    let mut witness_pair = None;
    for (i, p) in points.iter().enumerate() {
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = model.lorentz_distance(p, q)?;
            if d <= 0.0 {
                continue;
            }
            lipschitz_pairs += 1;
            let slack = b_plus[j] - b_plus[i] - d;
            if slack < worst_lipschitz {
                worst_lipschitz = slack;
                witness_pair = Some((i, j));
            }
        }
    }

    let mut min_sum = f64::INFINITY;
    let mut max_abs_sum = 0.0f64;
    for (bp, bm) in b_plus.iter().zip(&b_minus) {
        let sum = bp + bm;
        min_sum = min_sum.min(sum);
        max_abs_sum = max_abs_sum.max(sum.abs());
    }

    let is_strip = matches!(model, ModelSpacetime::WarpedStrip { .. });
    let mut failed = Vec::new();
    if lipschitz_pairs > 0 && worst_lipschitz < -tol {
        failed.push("reverse-lipschitz");
    }
    if min_sum < -tol {
        failed.push("sum-nonnegative");
    }
    if is_strip && max_abs_sum > 2.0 * tol {
        failed.push("splitting-equality");
    }
    let verdict = if failed.is_empty() {
        Verdict::Pass
    } else {
        Verdict::ConclusionFailure
    };
    Ok(VerificationReport::new("modelspace/busemann-inequalities", verdict)
        .with_residual(
            "worst_lipschitz_slack",
            if lipschitz_pairs > 0 { worst_lipschitz } else { 0.0 },
        )
        .with_residual("min_sum", min_sum)
        .with_residual("max_abs_sum", max_abs_sum)
        .with_witness(json!({
            "failed": failed,
            "causal_pairs": lipschitz_pairs,
            "worst_pair": witness_pair,
        }))
        .with_params(json!({ "points": points.len(), "tol": tol })))
}

//! Desk-scale model spacetimes: flat Minkowski space and the
//! anti-de-Sitter-type warped strip `−dt² + cos²(t) g_N` over
//! `t ∈ (−π/2, π/2)`. Lorentzian distance, Busemann functions, geodesic
//! spheres, the normal-exponential splitting map and cosmological time.
//!
//! Points are chart coordinates `(x¹, …, xᵐ, t)` with the time coordinate
//! last, matching the normal-form charts of [`crate::lorgraph`].

pub mod busemann;
pub mod sphere;
pub mod splitting;

pub use busemann::{busemann_inequality_suite, BusemannEvaluator, BusemannSample};
pub use sphere::{geodesic_sphere, SphereGeometry};
pub use splitting::{splitting_map_check, SplittingOptions};

use thiserror::Error;

use crate::lorgraph::{warped_strip, Fiber, MetricChart};
use crate::quad::integrate_composite;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("point has {got} coordinates, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is outside the strip: t = {t}")]
    OutsideStrip { t: f64 },
    #[error("point is outside the hyperbolic ball chart: ||x|| = {norm}")]
    OutsideBall { norm: f64 },
    #[error("shooting failed to bracket the fiber separation (residual {residual:.3e})")]
    ShootingFailed { residual: f64 },
    #[error("Busemann approach sequence rose by {rise:.3e} on its causal tail")]
    NonMonotoneTail { rise: f64 },
    #[error("Busemann schedule has only {len} causally related entries, need {needed}")]
    BusemannTail { len: usize, needed: usize },
    #[error("geodesic sphere root-finding failed: {0}")]
    SphereRootFailed(String),
    #[error("operation requires the warped strip model")]
    StripOnly,
    #[error("unsupported geodesic base direction; models support the vertical unit normal")]
    UnsupportedDirection,
}

/// A model spacetime with computable Lorentzian distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpacetime {
    /// Flat `ℝ^{n-1,1}` with metric `Σ(dxⁱ)² − (dt)²`.
    Minkowski { n: usize },
    /// `−dt² + cos²(t) g_N` on `(−π/2, π/2) × N`.
    WarpedStrip { fiber: Fiber },
}

impl ModelSpacetime {
    pub fn minkowski(n: usize) -> Self {
        assert!(n >= 2);
        ModelSpacetime::Minkowski { n }
    }

    pub fn strip(fiber: Fiber) -> Self {
        ModelSpacetime::WarpedStrip { fiber }
    }

    /// Spacetime dimension.
    pub fn dim(&self) -> usize {
        match self {
            ModelSpacetime::Minkowski { n } => *n,
            ModelSpacetime::WarpedStrip { fiber } => fiber.dim() + 1,
        }
    }

    /// The model's normal-form chart.
    pub fn chart(&self) -> MetricChart {
        match self {
            ModelSpacetime::Minkowski { n } => crate::lorgraph::minkowski(*n),
            ModelSpacetime::WarpedStrip { fiber } => warped_strip(*fiber),
        }
    }

    pub fn check_point(&self, p: &[f64]) -> Result<(), ModelError> {
        if p.len() != self.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        if let ModelSpacetime::WarpedStrip { fiber } = self {
            let (x, t) = split(p);
            if t.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(ModelError::OutsideStrip { t });
            }
            if let Fiber::HyperbolicBall(_) = fiber {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm >= 1.0 {
                    return Err(ModelError::OutsideBall { norm });
                }
            }
        }
        Ok(())
    }

    /// Lorentzian distance `d(p, q)`: the supremum of proper time over causal
    /// curves from `p` to `q`, zero when `q` is not in the causal future of
    /// `p`. Minkowski uses the closed form; on the strip the maximizing
    /// geodesic is found by splitting off the fiber geodesic and shooting the
    /// remaining two-dimensional problem, with bisection on the conserved
    /// direction parameter.
    pub fn lorentz_distance(&self, p: &[f64], q: &[f64]) -> Result<f64, ModelError> {
        self.check_point(p)?;
        self.check_point(q)?;
        match self {
            ModelSpacetime::Minkowski { .. } => {
                let (xp, tp) = split(p);
                let (xq, tq) = split(q);
                let dt = tq - tp;
                let dx = xp
                    .iter()
                    .zip(xq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                if dt >= dx {
                    Ok((dt * dt - dx * dx).sqrt())
                } else {
                    Ok(0.0)
                }
            }
            ModelSpacetime::WarpedStrip { fiber } => {
                let (xp, tp) = split(p);
                let (xq, tq) = split(q);
                let rho = fiber.distance(xp, xq);
                strip_distance_2d(tp, tq, rho)
            }
        }
    }

    /// Future-causal test: is `q` in the causal future of `p`?
    pub fn causally_follows(&self, p: &[f64], q: &[f64]) -> Result<bool, ModelError> {
        self.check_point(p)?;
        self.check_point(q)?;
        match self {
            ModelSpacetime::Minkowski { .. } => {
                let (xp, tp) = split(p);
                let (xq, tq) = split(q);
                let dt = tq - tp;
                let dx = xp
                    .iter()
                    .zip(xq)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                Ok(dt >= dx)
            }
            ModelSpacetime::WarpedStrip { fiber } => {
                let (xp, tp) = split(p);
                let (xq, tq) = split(q);
                let rho = fiber.distance(xp, xq);
                // conformally the strip is a product, so causality reads off
                // the conformal time difference
                Ok(conformal_time(tq) - conformal_time(tp) >= rho)
            }
        }
    }

    /// Cosmological time `τ(q) = sup{d(p, q) : p ≪ q}`. On the strip this is
    /// `t + π/2` in closed form (strip only).
    pub fn cosmological_time(&self, q: &[f64]) -> Result<f64, ModelError> {
        self.check_point(q)?;
        match self {
            ModelSpacetime::Minkowski { .. } => Err(ModelError::StripOnly),
            ModelSpacetime::WarpedStrip { .. } => {
                let (_, t) = split(q);
                Ok(t + std::f64::consts::FRAC_PI_2)
            }
        }
    }

    /// Brute-force estimate of the cosmological time: the largest distance
    /// from sampled past points. Samples descend the vertical line through
    /// `q` toward the past boundary and add seeded random fiber spread.
    pub fn cosmological_time_bruteforce(
        &self,
        q: &[f64],
        samples: usize,
        rng: &mut impl rand::Rng,
    ) -> Result<f64, ModelError> {
        self.check_point(q)?;
        let ModelSpacetime::WarpedStrip { fiber } = self else {
            return Err(ModelError::StripOnly);
        };
        let (xq, tq) = split(q);
        let t_floor = -std::f64::consts::FRAC_PI_2;
        let mut best = 0.0f64;
        // vertical descent: d((x, t0), (x, tq)) = tq - t0 exactly
        for k in 0..samples {
            let frac = (k as f64 + 1.0) / samples as f64;
            let t0 = tq + (t_floor + 1e-4 - tq) * frac;
            let mut p = xq.to_vec();
            p.push(t0);
            best = best.max(self.lorentz_distance(&p, q)?);
        }
        // random fiber spread in the deep past
        for _ in 0..samples {
            let t0 = rng.gen_range(t_floor + 1e-3..tq);
            let x0: Vec<f64> = match fiber {
                Fiber::Flat(d) => (0..*d).map(|i| xq[i] + rng.gen_range(-0.3..0.3)).collect(),
                Fiber::HyperbolicBall(d) => (0..*d)
                    .map(|i| (xq[i] + rng.gen_range(-0.2..0.2)).clamp(-0.9, 0.9))
                    .collect(),
            };
            let mut p = x0;
            p.push(t0);
            best = best.max(self.lorentz_distance(&p, q)?);
        }
        Ok(best)
    }
}

/// Timelike lines of the models: vertical curves `s ↦ (x₀, s)`, which are
/// unit-speed geodesics in both models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelLine {
    pub fiber_point: Vec<f64>,
}

impl ModelLine {
    pub fn vertical(fiber_point: Vec<f64>) -> Self {
        ModelLine { fiber_point }
    }

    /// γ(s) in chart coordinates.
    pub fn point_at(&self, s: f64) -> Vec<f64> {
        let mut p = self.fiber_point.clone();
        p.push(s);
        p
    }

    /// Arclength check: `g(γ', γ') = −1` sampled by centered differences of
    /// the parameterization against the model metric.
    pub fn check_unit_speed(&self, model: &ModelSpacetime, params: &[f64]) -> f64 {
        let chart = model.chart();
        let h = 1e-6;
        let mut worst = 0.0f64;
        for &s in params {
            let plus = self.point_at(s + h);
            let minus = self.point_at(s - h);
            let velocity: Vec<f64> = plus
                .iter()
                .zip(&minus)
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let g = chart.full_metric(&self.point_at(s));
            let speed_sq = g.quadratic_form(&velocity);
            worst = worst.max((speed_sq + 1.0).abs());
        }
        worst
    }
}

pub(crate) fn split(p: &[f64]) -> (&[f64], f64) {
    let (x, t) = p.split_at(p.len() - 1);
    (x, t[0])
}

/// Conformal time `t' = ln(sec t + tan t) = asinh(tan t)`; maps the strip's
/// time interval onto the whole line and turns the metric conformally into a
/// product, so `cos t = sech t'`.
pub fn conformal_time(t: f64) -> f64 {
    t.tan().asinh()
}

pub fn inverse_conformal_time(tp: f64) -> f64 {
    tp.sinh().atan()
}

/// Distance in the totally geodesic two-dimensional reduction
/// `−dt² + cos²(t) dσ²`, between `(t_p, 0)` and `(t_q, ρ)` with `ρ ≥ 0`.
///
/// In conformal time `u` the geodesic with conserved direction parameter `J`
/// has fiber progress `dσ/du = J/√(sech²u + J²)` and proper time
/// `dτ/du = sech²u/√(sech²u + J²)`; `J` is bisected until the fiber progress
/// matches `ρ`.
fn strip_distance_2d(tp: f64, tq: f64, rho: f64) -> Result<f64, ModelError> {
    let up = conformal_time(tp);
    let uq = conformal_time(tq);
    let du = uq - up;
    if du < rho || du <= 0.0 {
        // past-directed, spacelike or null separation
        return Ok(0.0);
    }
    if rho == 0.0 {
        return Ok(tq - tp);
    }

    let sigma_progress = |j: f64| -> f64 {
        integrate_composite(16, up, uq, 1.0, |u| {
            let sech = 1.0 / u.cosh();
            j / (sech * sech + j * j).sqrt()
        })
    };
    let proper_time = |j: f64| -> f64 {
        integrate_composite(16, up, uq, 1.0, |u| {
            let sech = 1.0 / u.cosh();
            let s2 = sech * sech;
            s2 / (s2 + j * j).sqrt()
        })
    };

    // bracket the direction parameter: sigma_progress is increasing in J and
    // approaches du from below
    let mut j_lo = 0.0f64;
    let mut j_hi = 1.0f64;
    let mut attempts = 0;
    while sigma_progress(j_hi) < rho {
        j_hi *= 2.0;
        attempts += 1;
        if attempts > 200 {
            return Err(ModelError::ShootingFailed {
                residual: rho - sigma_progress(j_hi),
            });
        }
    }
    for _ in 0..80 {
        let mid = 0.5 * (j_lo + j_hi);
        if sigma_progress(mid) < rho {
            j_lo = mid;
        } else {
            j_hi = mid;
        }
    }
    let j = 0.5 * (j_lo + j_hi);
    let residual = (sigma_progress(j) - rho).abs();
    if residual > 1e-8 * (1.0 + rho) {
        return Err(ModelError::ShootingFailed { residual });
    }
    Ok(proper_time(j))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Closed-form strip distance via the quadric-embedding oracle:
    /// `d = arccos(sin t₁ sin t₂ + cos t₁ cos t₂ cosh ρ)` for causal pairs.
    /// Independent of the shooting path.
    pub(crate) fn embedding_distance(t1: f64, t2: f64, rho: f64) -> f64 {
        let c = t1.sin() * t2.sin() + t1.cos() * t2.cos() * rho.cosh();
        if conformal_time(t2) - conformal_time(t1) >= rho {
            c.clamp(-1.0, 1.0).acos()
        } else {
            0.0
        }
    }

    #[test]
    fn minkowski_distance_examples() {
        let model = ModelSpacetime::minkowski(3);
        assert_abs_diff_eq!(
            model.lorentz_distance(&[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap(),
            1.0
        );
        // null separation
        assert_abs_diff_eq!(
            model.lorentz_distance(&[0.0, 0.0, 0.0], &[0.6, 0.8, 1.0]).unwrap(),
            0.0
        );
        // spacelike and past-directed both give zero
        assert_abs_diff_eq!(
            model.lorentz_distance(&[0.0, 0.0, 0.0], &[2.0, 0.0, 1.0]).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            model.lorentz_distance(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn strip_vertical_distance_is_time_difference() {
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let d = model.lorentz_distance(&[0.3, -0.4], &[0.3, 0.9]).unwrap();
        assert_abs_diff_eq!(d, 1.3, epsilon = 1e-12);
    }

    #[test]
    fn strip_distance_matches_embedding_oracle() {
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut checked = 0;
        while checked < 60 {
            let t1 = rng.gen_range(-1.2..1.2);
            let t2 = rng.gen_range(-1.2..1.2);
            let s1 = rng.gen_range(-1.0..1.0);
            let s2 = rng.gen_range(-1.0..1.0);
            let d = model.lorentz_distance(&[s1, t1], &[s2, t2]).unwrap();
            let oracle = embedding_distance(t1, t2, (s2 - s1).abs());
            assert_abs_diff_eq!(d, oracle, epsilon = 1e-9);
            if oracle > 0.0 {
                checked += 1;
            }
        }
    }

    #[test]
    fn hyperbolic_strip_distance_matches_embedding_oracle() {
        let fiber = Fiber::HyperbolicBall(2);
        let model = ModelSpacetime::strip(fiber);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut checked = 0;
        while checked < 40 {
            let p = [
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-1.0..1.0),
            ];
            let q = [
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-1.0..1.0),
            ];
            let rho = fiber.distance(&p[..2], &q[..2]);
            let d = model.lorentz_distance(&p, &q).unwrap();
            let oracle = embedding_distance(p[2], q[2], rho);
            assert_abs_diff_eq!(d, oracle, epsilon = 1e-9);
            if oracle > 0.0 {
                checked += 1;
            }
        }
    }

    #[test]
    fn strip_line_asymptotic_distance() {
        // lim_{t->pi/2} d(γ₂(τ), γ₁(t)) = π/2 − τ for vertical lines
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let tau = 0.3;
        let gamma2 = ModelLine::vertical(vec![0.8]);
        let q = gamma2.point_at(tau);
        let gamma1 = ModelLine::vertical(vec![0.0]);
        let t = std::f64::consts::FRAC_PI_2 - 1e-7;
        let d = model.lorentz_distance(&q, &gamma1.point_at(t)).unwrap();
        assert_abs_diff_eq!(d, std::f64::consts::FRAC_PI_2 - tau, epsilon = 1e-5);
    }

    #[test]
    fn near_boundary_level_sets_are_slices() {
        // the distance to a near-boundary point is asymptotically independent
        // of the fiber offset: {d(., (pi/2, 0)) = a} approaches the slice
        // {t = pi/2 - a}
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let t_near = std::f64::consts::FRAC_PI_2 - 1e-8;
        let a = 0.7;
        let t_level = std::f64::consts::FRAC_PI_2 - a;
        for s in [-1.5, -0.3, 0.0, 0.9, 2.0] {
            let d = model
                .lorentz_distance(&[s, t_level], &[0.0, t_near])
                .unwrap();
            assert!((d - a).abs() < 1e-5, "s = {s}: d = {d}");
        }
    }

    #[test]
    fn reverse_triangle_inequality_on_chains() {
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 200 {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.4..-0.6)];
            let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-0.4..0.4)];
            let z = [rng.gen_range(-1.0..1.0), rng.gen_range(0.6..1.4)];
            let dpq = model.lorentz_distance(&p, &q).unwrap();
            let dqz = model.lorentz_distance(&q, &z).unwrap();
            let dpz = model.lorentz_distance(&p, &z).unwrap();
            if dpq > 0.0 && dqz > 0.0 {
                assert!(
                    dpq + dqz <= dpz + 1e-9,
                    "reverse triangle violated: {dpq} + {dqz} > {dpz}"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn vertical_lines_are_unit_speed() {
        for model in [
            ModelSpacetime::minkowski(3),
            ModelSpacetime::strip(Fiber::Flat(2)),
            ModelSpacetime::strip(Fiber::HyperbolicBall(2)),
        ] {
            let line = ModelLine::vertical(vec![0.2; model.dim() - 1]);
            let worst = line.check_unit_speed(&model, &[-0.5, 0.0, 0.7]);
            assert!(worst < 1e-9, "speed defect {worst}");
        }
    }

    #[test]
    fn cosmological_time_closed_form_and_bruteforce() {
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let q = [0.25, 0.0];
        let tau = model.cosmological_time(&q).unwrap();
        assert_abs_diff_eq!(tau, std::f64::consts::FRAC_PI_2, epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let estimate = model
            .cosmological_time_bruteforce(&q, 200, &mut rng)
            .unwrap();
        assert!(estimate <= tau + 1e-12);
        assert!((tau - estimate).abs() < 1e-3, "estimate {estimate} vs {tau}");
    }

    #[test]
    fn boundary_limit_of_cosmological_time() {
        let model = ModelSpacetime::strip(Fiber::Flat(1));
        let q = [0.0, -std::f64::consts::FRAC_PI_2 + 1e-6];
        assert!(model.cosmological_time(&q).unwrap() < 2e-6);
    }

    #[test]
    fn dimension_and_domain_checks() {
        let model = ModelSpacetime::strip(Fiber::HyperbolicBall(2));
        assert!(matches!(
            model.lorentz_distance(&[0.0, 0.0], &[0.0, 0.0, 0.0]),
            Err(ModelError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            model.lorentz_distance(&[0.0, 0.0, 2.0], &[0.0, 0.0, 0.0]),
            Err(ModelError::OutsideStrip { .. })
        ));
        assert!(matches!(
            model.lorentz_distance(&[1.2, 0.0, 0.0], &[0.0, 0.0, 0.1]),
            Err(ModelError::OutsideBall { .. })
        ));
    }
}

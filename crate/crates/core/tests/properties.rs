//! Property-based invariants for the public API.

use proptest::prelude::*;

use maxlab_core::maxlab::{ComparisonFunction, GridFunction};
use maxlab_core::quad;
use maxlab_core::quasilinear::{certify_ellipticity, flat_mean_curvature};
use maxlab_core::symkernel::{psd_ordering, SymMatrix};

fn sym_from_seed(n: usize, entries: &[f64]) -> SymMatrix {
    let mut it = entries.iter().copied().cycle();
    SymMatrix::from_fn(n, |_, _| it.next().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn psd_ordering_is_reflexive(
        n in 1usize..6,
        entries in proptest::collection::vec(-5.0f64..5.0, 21),
    ) {
        let a = sym_from_seed(n, &entries);
        prop_assert!(psd_ordering(&a, &a, 0.0).unwrap());
    }

    #[test]
    fn psd_ordering_is_antisymmetric_up_to_tol(
        n in 1usize..6,
        entries in proptest::collection::vec(-5.0f64..5.0, 21),
        bump in proptest::collection::vec(-1.0f64..1.0, 21),
        scale in 0.0f64..2.0,
        tol in 1e-12f64..1e-2,
    ) {
        let a = sym_from_seed(n, &entries);
        let perturbation = sym_from_seed(n, &bump).scaled(scale * tol);
        let b = a.add(&perturbation);
        let forward = psd_ordering(&a, &b, tol).unwrap();
        let backward = psd_ordering(&b, &a, tol).unwrap();
        if forward && backward {
            // both orderings pin every eigenvalue of B - A inside [-tol, tol]
            prop_assert!(b.sub(&a).max_abs_entry() <= tol * (n as f64) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn grid_csv_round_trips_bit_exactly(
        nx in 2usize..7,
        ny in 2usize..7,
        origin in proptest::collection::vec(-10.0f64..10.0, 2),
        values in proptest::collection::vec(-1e6f64..1e6, 36),
    ) {
        let grid = GridFunction::new(
            origin,
            vec![0.25, 0.5],
            vec![nx, ny],
            values[..nx * ny].to_vec(),
        ).unwrap();
        let back = GridFunction::from_csv(&grid.to_csv()).unwrap();
        prop_assert_eq!(grid, back);
    }

    #[test]
    fn barrier_bands_hold_for_random_exponents(
        alpha in 0.1f64..20.0,
        radius_frac in 0.0f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let r0 = 1.0 / 3.0;
        let radius = r0 + (3.0 * r0 - r0) * radius_frac;
        let x = [radius * angle.cos(), radius * angle.sin()];
        let w = ComparisonFunction::new(alpha).unwrap();
        let cap = alpha * r0.powf(-(alpha + 2.0));
        let grad: f64 = w.gradient(&x).unwrap().iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(grad <= cap * (1.0 + 1e-12));
        let bounds = w.hessian(&x).unwrap().spectral_bounds();
        prop_assert!(bounds.lambda_min >= -cap * (1.0 + 1e-12));
        prop_assert!(bounds.lambda_max <= (alpha + 2.0) * cap * (1.0 + 1e-12));
    }

    #[test]
    fn quadrature_is_exact_on_polynomials(
        coeffs in proptest::collection::vec(-3.0f64..3.0, 6),
        a in -2.0f64..0.0,
        b in 0.5f64..2.0,
    ) {
        let poly = |t: f64| {
            coeffs.iter().enumerate().map(|(k, c)| c * t.powi(k as i32)).sum::<f64>()
        };
        let exact: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0))
            .sum();
        let numeric = quad::integrate(8, a, b, poly);
        prop_assert!((numeric - exact).abs() <= 1e-11 * (1.0 + exact.abs()));
    }

    #[test]
    fn ellipticity_certificate_is_monotone(
        seeds in proptest::collection::vec((-0.7f64..0.7, -0.7f64..0.7), 16),
        headroom in 0.01f64..5.0,
    ) {
        let op = flat_mean_curvature(2);
        let samples: Vec<_> = seeds
            .iter()
            .filter(|(p1, p2)| p1 * p1 + p2 * p2 < 0.8)
            .map(|&(p1, p2)| (vec![0.0, 0.0], 0.0, vec![p1, p2]))
            .collect();
        prop_assume!(!samples.is_empty());
        let measured = certify_ellipticity(&op, samples.clone(), f64::INFINITY).unwrap();
        let tight = measured.worst_ratio.max(measured.worst_derivative_bound).max(1.0);
        // valid at the measured constant implies valid at anything larger
        prop_assert!(certify_ellipticity(&op, samples.clone(), tight * (1.0 + 1e-12)).is_ok());
        prop_assert!(certify_ellipticity(&op, samples, tight + headroom).is_ok());
    }
}

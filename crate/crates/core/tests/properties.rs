use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isosec_core::convex::{
    fit_sphere, mixed_discriminant, newton_report, normalized_elementary_symmetric, random_support_function,
    surface_area_measure_zonal, RevolutionBody,
};
use isosec_core::harmonics::{analyze, synthesize_grid};
use isosec_core::linalg::Sym2;
use isosec_core::sphere::Cap;
use isosec_core::transforms::{lp_norm, radial_symmetrize, SphericalFunction};
use isosec_core::{Coeffs, Grid, Vector};

const BAND: usize = 8;

fn coeff_vec() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, (BAND + 1) * (BAND + 1))
}

fn sym2() -> impl Strategy<Value = Sym2<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b, c)| Sym2::new(a, b, c))
}

fn unit_vector() -> impl Strategy<Value = Vector> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU)
        .prop_map(|(t, p)| Vector::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn harmonic_roundtrip(data in coeff_vec()) {
        let grid = Grid::new(10, 20).unwrap();
        let c = Coeffs::from_vec(BAND, data).unwrap();
        let back = analyze(&grid, &synthesize_grid(&c, &grid), BAND).unwrap();
        prop_assert!(back.max_abs_diff(&c) < 1e-10);
    }

    #[test]
    fn mixed_discriminant_is_symmetric_and_polarizes_det(a in sym2(), b in sym2()) {
        prop_assert!((mixed_discriminant(&a, &b) - mixed_discriminant(&b, &a)).abs() < 1e-12);
        prop_assert!((mixed_discriminant(&a, &a) - a.det()).abs() < 1e-12);
        // det(A + B) = D(A,A) + 2 D(A,B) + D(B,B)
        let sum = a.add(&b);
        let expand = a.det() + 2.0 * mixed_discriminant(&a, &b) + b.det();
        prop_assert!((sum.det() - expand).abs() < 1e-11);
    }

    #[test]
    fn symmetric_means_decrease(r1 in 0.0..10.0f64, r2 in 0.0..10.0f64) {
        let s1 = normalized_elementary_symmetric(&[r1, r2], 1);
        let s2 = normalized_elementary_symmetric(&[r1, r2], 2);
        prop_assert!(s1 >= s2.sqrt() - 1e-12);
    }

    #[test]
    fn symmetrization_keeps_mass(vals in prop::collection::vec(0.0..5.0f64, 6 * 12)) {
        let grid = Arc::new(Grid::new(6, 12).unwrap());
        let f = SphericalFunction::from_values(grid, vals).unwrap();
        let s = radial_symmetrize(&f, &Vector::basis(2)).unwrap();
        let (a, b) = (lp_norm(&f, 1.0).unwrap(), lp_norm(&s, 1.0).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert!(lp_norm(&s, 2.0).unwrap() <= lp_norm(&f, 2.0).unwrap() + 1e-12);
        let again = radial_symmetrize(&s, &Vector::basis(2)).unwrap();
        prop_assert_eq!(again.values(), s.values());
    }

    #[test]
    fn newton_inequality_on_random_bodies(seed in any::<u64>()) {
        let grid = Arc::new(Grid::new(10, 20).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_support_function(grid.clone(), 6, &mut rng).unwrap();
        prop_assert!(h.certificate().passes());
        for u in grid.nodes() {
            prop_assert!(newton_report(&h, u, 1, 2).unwrap().gap >= -1e-10);
        }
    }

    #[test]
    fn sphere_fit_recovers_sphere(c in (-3.0..3.0f64, -3.0..3.0f64, -3.0..3.0f64), r in 0.1..5.0f64) {
        let center = Vector::new(c.0, c.1, c.2);
        let grid = Grid::new(4, 8).unwrap();
        let pts: Vec<Vector> = grid.nodes().iter().map(|u| center + *u * r).collect();
        let fit = fit_sphere(&pts).unwrap();
        prop_assert!((fit.center - center).norm() < 1e-9 * r.max(1.0));
        prop_assert!((fit.radius - r).abs() < 1e-9 * r.max(1.0));
        prop_assert!(fit.residual < 1e-9 * r.max(1.0));
    }

    #[test]
    fn cap_membership_matches_distance(center in unit_vector(), x in unit_vector(), a in 0.05..0.95f64) {
        let cap = Cap::new(center, a);
        prop_assert_eq!(cap.contains(&x), x.dot(&center) > a);
        prop_assert_eq!(cap.contains_sym(&x), cap.contains(&x) || cap.contains(&(x * -1.0)));
    }

    #[test]
    fn zonal_measure_carries_the_surface_area(p in 0.5..1.0f64, rim in 0.0..1.0f64, d in 0.3..2.0f64) {
        let body = RevolutionBody::from_fn(d, |rho: f64| (1.0 - (rho / d).powi(2)).max(0.0).powf(p) + rim, 48).unwrap();
        let edges: Vec<f64> = (0..=10).map(|k| -1.0 + 0.2 * k as f64).collect();
        let mu = surface_area_measure_zonal(&body, &edges).unwrap();
        prop_assert!((mu.total() - body.total_area()).abs() < 1e-6 * body.total_area());
    }
}

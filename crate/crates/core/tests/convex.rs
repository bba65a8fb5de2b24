use std::f64::consts::PI;
use std::sync::Arc;

use isosec_core::convex::{
    area_density, first_area_density_spectral, mixed_volume, newton_report, radial_symmetrize_support, radii,
    random_support_function, surface_area_measure_zonal, umbilic_sphere_check, Ball, Ellipsoid, Lens, MinkowskiSum,
    RevolutionBody, Spherocylinder, SupportModel,
};
use isosec_core::linalg::Jet;
use isosec_core::sphere::{tangent_basis, Cap};
use isosec_core::{Grid, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Arc<Grid> {
    Arc::new(Grid::new(24, 48).unwrap())
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vector {
    Vector::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
    .normalized()
}

/// `Q(e, f)` from values only: second differences along great circles give
/// the covariant Hessian, plus `h(u)` on the diagonal.
fn radii_by_differences<S: SupportModel<f64>>(h: &S, u: &Vector) -> [f64; 3] {
    let (e1, e2) = tangent_basis(u);
    let step = 1e-3;
    let along = |e: Vector| {
        let at = |t: f64| h.value(&(*u * t.cos() + e * t.sin()));
        (at(step) - 2.0 * at(0.0) + at(-step)) / (step * step) + at(0.0)
    };
    let diag = (e1 + e2) * 0.5f64.sqrt();
    let (q11, q22, qd) = (along(e1), along(e2), along(diag));
    [q11, qd - 0.5 * (q11 + q22), q22]
}

#[test]
fn jet_radii_match_finite_differences() {
    let grid = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..5 {
        let h = random_support_function(grid.clone(), 6, &mut rng).unwrap();
        for _ in 0..10 {
            let u = random_direction(&mut rng);
            let q = radii(&h, &u).q;
            let fd = radii_by_differences(&h, &u);
            for (a, b) in [q.a, q.b, q.c].iter().zip(fd) {
                assert!((a - b).abs() < 1e-5, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn ellipsoid_radii_match_closed_form() {
    let (a, b, c) = (1.0, 1.0, 2.0);
    let e = Ellipsoid::new(a, b, c);
    let r = radii(&e, &Vector::basis(0));
    assert!((r.r1 - 1.0).abs() < 1e-13 && (r.r2 - 4.0).abs() < 1e-13);
    let r = radii(&e, &Vector::basis(2));
    assert!((r.r1 - 0.5).abs() < 1e-13 && (r.r2 - 0.5).abs() < 1e-13);
    // Gauss curvature at the point with normal u is h(u)⁴ / (abc)²
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let u = random_direction(&mut rng);
        let h = ((a * u.x()).powi(2) + (b * u.y()).powi(2) + (c * u.z()).powi(2)).sqrt();
        let r = radii(&e, &u);
        assert!((r.r1 * r.r2 - (a * b * c).powi(2) / h.powi(4)).abs() < 1e-12);
    }
}

#[test]
fn first_density_two_routes() {
    let grid = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..50 {
        let h = random_support_function(grid.clone(), 8, &mut rng).unwrap();
        let spectral = first_area_density_spectral(h.coeffs());
        let u = random_direction(&mut rng);
        assert!((area_density(&h, &u, 1).unwrap() - spectral.eval(&u)).abs() < 1e-8);
    }
}

#[test]
fn newton_holds_with_equality_exactly_on_umbilics() {
    let grid = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let h = random_support_function(grid.clone(), 8, &mut rng).unwrap();
        for u in grid.nodes() {
            let n = newton_report(&h, u, 1, 2).unwrap();
            assert!(n.gap >= -1e-10);
            let r = radii(&h, u);
            let umbilic = (r.r2 - r.r1) <= 1e-4 * r.r2.abs().max(1.0);
            if n.equality {
                assert!(umbilic);
            }
        }
    }
    let ball = Ball::new(2.0);
    assert!(grid
        .nodes()
        .iter()
        .all(|u| newton_report(&ball, u, 1, 2).unwrap().equality));
    assert!(newton_report(&ball, &Vector::basis(0), 2, 1).is_err());
}

/// `λ h`, for the scaling part of the stability check.
struct Scaled<S>(f64, S);

impl<S: SupportModel<f64>> SupportModel<f64> for Scaled<S> {
    fn jet(&self, u: &Vector) -> Jet<f64> {
        self.1.jet(u).scale(self.0)
    }
}

#[test]
fn umbilic_on_a_cap_survives_sums_and_dilations() {
    let grid = grid();
    let cap = Cap::new(Vector::basis(2), 0.7);
    let h1 = Ball::translated(1.5, Vector::new(0.2, -0.1, 0.3));
    // the upper cap of the lens is a piece of a unit ball
    let h2 = Lens::new(1.0, 0.5);
    let tol = 1e-10;
    assert!(umbilic_sphere_check(&h1, &grid, &cap, tol).is_umbilic);
    assert!(umbilic_sphere_check(&h2, &grid, &cap, tol).is_umbilic);
    for lambda in [0.5, 1.0, 2.0] {
        let sum = Scaled(lambda, MinkowskiSum(h1, h2));
        let rep = umbilic_sphere_check(&sum, &grid, &cap, tol);
        assert!(rep.is_umbilic && rep.radii_spread < tol, "λ = {lambda}");
        let fit = rep.fit.unwrap();
        assert!((fit.radius - lambda * 2.5).abs() < 1e-9);
    }
}

#[test]
fn aleksandrov_fenchel_on_random_triples() {
    let grid = Arc::new(Grid::new(16, 32).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let b = Ball::new(1.0);
    for _ in 0..100 {
        let k = random_support_function(grid.clone(), 6, &mut rng).unwrap();
        let l = random_support_function(grid.clone(), 6, &mut rng).unwrap();
        let vkl = mixed_volume(&grid, &b, &k, &l);
        let vkk = mixed_volume(&grid, &b, &k, &k);
        let vll = mixed_volume(&grid, &b, &l, &l);
        assert!((vkl * vkl - vkk * vll) / (vkk * vll) >= -1e-9);
    }
    assert!((mixed_volume(&grid, &b, &b, &b) - 4.0 * PI / 3.0).abs() < 1e-12);
}

#[test]
fn symmetrized_support_function_is_certified() {
    let grid = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let h = random_support_function(grid.clone(), 8, &mut rng).unwrap();
        let s = radial_symmetrize_support(&h).unwrap();
        assert!(s.certificate().passes());
    }
}

#[test]
fn spherocylinder_as_a_body_of_revolution() {
    let len = 1.5;
    let body = RevolutionBody::from_fn(1.0, |r: f64| (1.0 - r * r).max(0.0).sqrt() + len / 2.0, 64).unwrap();
    let model = Spherocylinder::new(1.0, len);
    for k in 0..=40 {
        let t = -1.0 + 0.05 * k as f64;
        assert!((body.support_at(t) - (1.0 + len / 2.0 * t.abs())).abs() < 1e-10);
        let u = Vector::new((1.0 - t * t).max(0.0).sqrt(), 0.0, t);
        assert!((body.support_at(t) - model.value(&u)).abs() < 1e-10);
    }
    assert!((body.total_area() - (4.0 * PI + 2.0 * PI * len)).abs() < 1e-8);
    let (_, atom) = body.wall_atom().unwrap();
    assert!((atom - 2.0 * PI * len).abs() < 1e-10);
}

#[test]
fn ball_cap_band_has_area_pi() {
    let body = RevolutionBody::from_fn(1.0, |r: f64| (1.0 - r * r).max(0.0).sqrt(), 64).unwrap();
    let mu = surface_area_measure_zonal(&body, &[-1.0, -0.5, 0.5, 1.0]).unwrap();
    let masses: Vec<f64> = mu.bands().map(|(_, _, m)| m).collect();
    assert!((masses[2] - PI).abs() < 1e-8);
    assert!((masses[0] - PI).abs() < 1e-8);
    assert!((mu.total() - 4.0 * PI).abs() < 1e-8);
    assert!(body.wall_atom().is_none());
}

#[test]
fn lens_is_umbilic_on_pieces_but_not_a_sphere() {
    let grid = Arc::new(Grid::new(32, 64).unwrap());
    let lens = Lens::new(1.0, 0.5);
    let top = umbilic_sphere_check(&lens, &grid, &Cap::new(Vector::basis(2), lens.threshold()), 1e-10);
    assert!(top.is_umbilic);
    let across = umbilic_sphere_check(&lens, &grid, &Cap::new(Vector::basis(0), 0.3), 1e-4);
    assert!(!across.is_umbilic && across.fit.is_none());
}

#[test]
fn spherocylinder_across_the_equator_fits_no_sphere() {
    let grid = Arc::new(Grid::new(32, 64).unwrap());
    let rep = umbilic_sphere_check(
        &Spherocylinder::new(1.0, 1.0),
        &grid,
        &Cap::new(Vector::basis(0), 0.5),
        1e-4,
    );
    assert!(rep.is_umbilic);
    assert!(rep.fit.unwrap().residual > 1e-2);
    let above = umbilic_sphere_check(
        &Spherocylinder::new(1.0, 1.0),
        &grid,
        &Cap::new(Vector::basis(2), 0.5),
        1e-4,
    );
    assert!(above.fit.unwrap().residual < 1e-10);
}

use std::f64::consts::PI;
use std::sync::Arc;

use isosec_core::sphere::great_circle;
use isosec_core::transforms::{lp_norm, radial_symmetrize, section_isotropy_tensor, sr_l1_identity, SphericalFunction};
use isosec_core::zonoid::random_density;
use isosec_core::{Coeffs, Grid, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e3() -> Vector {
    Vector::basis(2)
}

#[test]
fn symmetrization_contracts_lp_and_keeps_l1() {
    let grid = Arc::new(Grid::new(28, 56).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let f = random_density(grid.clone(), 24, &mut rng);
        let s = radial_symmetrize(&f, &e3()).unwrap();
        let (a, b) = (lp_norm(&f, 1.0).unwrap(), lp_norm(&s, 1.0).unwrap());
        assert!((a - b).abs() <= 1e-10 * a);
        for p in [2.0, 3.0] {
            assert!(lp_norm(&s, p).unwrap() <= lp_norm(&f, p).unwrap() + 1e-12);
        }
    }
}

#[test]
fn symmetrization_is_idempotent_bitwise() {
    let grid = Arc::new(Grid::new(16, 33).unwrap());
    let f = SphericalFunction::from_fn(grid, |x| (x.x() * 2.0 + x.y()).sin() + x.z());
    let once = radial_symmetrize(&f, &e3()).unwrap();
    let twice = radial_symmetrize(&once, &e3()).unwrap();
    assert!(once
        .values()
        .iter()
        .zip(twice.values())
        .all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn symmetrization_ignores_axial_grid_rotations() {
    let grid = Arc::new(Grid::new(12, 20).unwrap());
    let f = SphericalFunction::from_fn(grid.clone(), |x| (x.x() + 0.3 * x.y() * x.z()).exp());
    let base = radial_symmetrize(&f, &e3()).unwrap();
    let np = grid.n_phi();
    for shift in [1, 7, 19] {
        // f∘R for R the rotation by 2π·shift/n_phi about e3
        let mut rotated = f.values().to_vec();
        for ring in 0..grid.n_theta() {
            for k in 0..np {
                rotated[ring * np + k] = f.values()[ring * np + (k + shift) % np];
            }
        }
        let g = SphericalFunction::from_values(grid.clone(), rotated).unwrap();
        let s = radial_symmetrize(&g, &e3()).unwrap();
        for (a, b) in s.values().iter().zip(base.values()) {
            assert!((a - b).abs() < 1e-14 * a.abs().max(1.0));
        }
    }
}

#[test]
fn symmetrization_requires_the_ring_axis() {
    let grid = Arc::new(Grid::new(6, 12).unwrap());
    let f = SphericalFunction::from_values(grid.clone(), vec![1.0; grid.len()]).unwrap();
    assert!(radial_symmetrize(&f, &Vector::basis(0)).is_err());
}

#[test]
fn l1_identity_constant_and_general() {
    let grid = Arc::new(Grid::new(32, 64).unwrap());
    let one = SphericalFunction::from_values(grid.clone(), vec![1.0; grid.len()]).unwrap();
    let (lhs, rhs) = sr_l1_identity(&one).unwrap();
    assert!((lhs - 4.0 * PI).abs() < 1e-12);
    assert!((rhs - 4.0 * PI).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let f = random_density(grid.clone(), 16, &mut rng);
        let (lhs, rhs) = sr_l1_identity(&f).unwrap();
        assert!((lhs - rhs).abs() < 1e-6 * rhs);
    }
}

/// Brute-force degree-2 Fourier content of `g` on the circle `u⊥`.
fn circle_fourier(g: &Coeffs, u: &Vector, m: usize) -> (f64, f64) {
    let c = great_circle(u, m).unwrap();
    let mut mean = 0.0;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..m {
        let a = 2.0 * PI * k as f64 / m as f64;
        let v = g.eval(&c.point(a));
        mean += v;
        re += v * (2.0 * a).cos();
        im += v * (2.0 * a).sin();
    }
    (mean / m as f64, (re * re + im * im).sqrt() / m as f64)
}

#[test]
fn isotropy_deviation_tracks_degree_two_fourier_mass() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut ratios = Vec::new();
    for _ in 0..20 {
        let mut g = Coeffs::from_fn(10, |l, _| if l % 2 == 0 { rng.gen_range(-0.2..0.2) } else { 0.0 });
        g.set(0, 0, 10.0);
        let u = Vector::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalized();
        let rep = section_isotropy_tensor(&g, &u, 256).unwrap();
        let (mean, f2) = circle_fourier(&g, &u, 256);
        ratios.push(rep.deviation / (f2 / mean));
    }
    for r in &ratios {
        assert!((r - ratios[0]).abs() < 1e-10, "{ratios:?}");
    }
    assert!((ratios[0] - 0.5f64.sqrt()).abs() < 1e-10);
}

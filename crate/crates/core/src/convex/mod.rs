//! Support-function geometry: principal radii, area-measure densities,
//! Newton and Aleksandrov–Fenchel diagnostics, boundary points and sphere
//! fitting.
//!
//! Everything works through [`SupportModel`]: any smooth extension of `h`
//! off the sphere will do, since the radii matrix is assembled as
//! `Q = D²E|_{u⊥} + (h − ⟨∇E, u⟩) I`, which does not depend on the choice.

mod bodies;
mod revolution;
mod support;

pub use bodies::{Ball, Ellipsoid, Lens, MinkowskiSum, Spherocylinder};
pub use revolution::{
    cap_measure, minkowski_solve_revolution, profile_to_support, surface_area_measure_zonal, MinkowskiSolution,
    RevolutionBody, ZonalMeasure,
};
pub use support::{
    blaschke_minkowski_symmetrize, radial_symmetrize_support, random_support_function, Certificate, SupportFunction,
    CERTIFICATE_TOLERANCE,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoeffs;
use crate::linalg::{least_squares, solve_dense, Jet, Sym2, Vec3};
use crate::scalar::{pairwise_sum_by, Real};
use crate::sphere::{tangent_basis, Cap, SphericalGrid};

/// A support function with analytic derivatives.
pub trait SupportModel<T: Real> {
    /// Jet of some smooth extension of `h` to a neighbourhood of `u ∈ S²`.
    fn jet(&self, u: &Vec3<T>) -> Jet<T>;

    fn value(&self, u: &Vec3<T>) -> T {
        self.jet(u).value
    }
}

impl<T: Real> SupportModel<T> for HarmonicCoeffs<T> {
    fn jet(&self, u: &Vec3<T>) -> Jet<T> {
        HarmonicCoeffs::jet(self, u)
    }
    fn value(&self, u: &Vec3<T>) -> T {
        self.eval(u)
    }
}

impl<T: Real, S: SupportModel<T> + ?Sized> SupportModel<T> for &S {
    fn jet(&self, u: &Vec3<T>) -> Jet<T> {
        (**self).jet(u)
    }
    fn value(&self, u: &Vec3<T>) -> T {
        (**self).value(u)
    }
}

/// Radii-of-curvature matrix at `u` in the `tangent_basis(u)` frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiiMatrix<T> {
    pub u: Vec3<T>,
    pub q: Sym2<T>,
    pub r1: T,
    pub r2: T,
}

pub fn radii<T: Real, S: SupportModel<T> + ?Sized>(h: &S, u: &Vec3<T>) -> RadiiMatrix<T> {
    radii_from_jet(&h.jet(u), u)
}

pub(crate) fn radii_from_jet<T: Real>(j: &Jet<T>, u: &Vec3<T>) -> RadiiMatrix<T> {
    let (e1, e2) = tangent_basis(u);
    let shift = j.value - j.grad.dot(u);
    let q = Sym2::new(
        j.hess.form(&e1, &e1) + shift,
        j.hess.form(&e1, &e2),
        j.hess.form(&e2, &e2) + shift,
    );
    let (r1, r2) = q.eigenvalues();
    RadiiMatrix { u: *u, q, r1, r2 }
}

/// Normalized elementary symmetric function `s_j = e_j / C(k, j)` of `k`
/// radii (`s_0 = 1`).
pub fn normalized_elementary_symmetric<T: Real>(radii: &[T], j: usize) -> T {
    let k = radii.len();
    if j > k {
        return T::zero();
    }
    // e[i] after processing a prefix
    let mut e = vec![T::zero(); j + 1];
    e[0] = T::one();
    for &r in radii {
        for i in (1..=j).rev() {
            e[i] = e[i] + r * e[i - 1];
        }
    }
    let mut binom = 1.0f64;
    for i in 0..j {
        binom = binom * (k - i) as f64 / (i + 1) as f64;
    }
    e[j] / T::c(binom)
}

/// Area-measure density `f^(j)(u) = s_j(r1, r2)`, `j ∈ {1, 2}`.
pub fn area_density<T: Real, S: SupportModel<T> + ?Sized>(h: &S, u: &Vec3<T>, j: usize) -> Result<T> {
    if !(1..=2).contains(&j) {
        return Err(Error::InvalidArgument(format!(
            "area density order must be 1 or 2, got {j}"
        )));
    }
    let r = radii(h, u);
    Ok(normalized_elementary_symmetric(&[r.r1, r.r2], j))
}

/// `f^(1)` through the spectral Laplacian, `Δh/2 + h`.
pub fn first_area_density_spectral<T: Real>(h: &HarmonicCoeffs<T>) -> HarmonicCoeffs<T> {
    h.scale_degrees(|l| T::one() - T::from_usize_lossy(l * (l + 1)) * T::half())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NewtonReport<T> {
    /// `s_i^{1/i}`
    pub lhs: T,
    /// `s_j^{1/j}`
    pub rhs: T,
    pub gap: T,
    /// `gap` below [`NEWTON_EQUALITY_TOLERANCE`] (relative to `lhs`).
    pub equality: bool,
}

pub const NEWTON_EQUALITY_TOLERANCE: f64 = 1e-10;

/// Newton inequality `s_i^{1/i} ≥ s_j^{1/j}` at `u`, `1 ≤ i < j ≤ 2`.
pub fn newton_report<T: Real, S: SupportModel<T> + ?Sized>(
    h: &S,
    u: &Vec3<T>,
    i: usize,
    j: usize,
) -> Result<NewtonReport<T>> {
    if !(1 <= i && i < j && j <= 2) {
        return Err(Error::InvalidArgument(format!("need 1 <= i < j <= 2, got ({i}, {j})")));
    }
    let r = radii(h, u);
    Ok(newton_from_radii(&[r.r1, r.r2], i, j))
}

pub(crate) fn newton_from_radii<T: Real>(radii: &[T], i: usize, j: usize) -> NewtonReport<T> {
    let root = |s: T, k: usize| s.max(T::zero()).powf(T::one() / T::from_usize_lossy(k));
    let lhs = root(normalized_elementary_symmetric(radii, i), i);
    let rhs = root(normalized_elementary_symmetric(radii, j), j);
    let gap = lhs - rhs;
    let equality = gap.abs() <= T::c(NEWTON_EQUALITY_TOLERANCE) * lhs.abs().max(T::one());
    NewtonReport {
        lhs,
        rhs,
        gap,
        equality,
    }
}

/// Mixed discriminant `D(Q_K, Q_L)` at `u`.
pub fn mixed_area_density<T: Real, A: SupportModel<T> + ?Sized, B: SupportModel<T> + ?Sized>(
    hk: &A,
    hl: &B,
    u: &Vec3<T>,
) -> T {
    mixed_discriminant(&radii(hk, u).q, &radii(hl, u).q)
}

pub fn mixed_discriminant<T: Real>(a: &Sym2<T>, b: &Sym2<T>) -> T {
    (a.a * b.c + a.c * b.a) * T::half() - a.b * b.b
}

/// `V(K1, K2, K3) = (1/3) ∫ h1 · D(Q2, Q3) dH²` on the grid.
pub fn mixed_volume<T: Real, A, B, C>(grid: &SphericalGrid<T>, h1: &A, h2: &B, h3: &C) -> T
where
    A: SupportModel<T> + ?Sized,
    B: SupportModel<T> + ?Sized,
    C: SupportModel<T> + ?Sized,
{
    let nodes = grid.nodes();
    let w = grid.weights();
    pairwise_sum_by(nodes.len(), &|i| {
        w[i] * h1.value(&nodes[i]) * mixed_area_density(h2, h3, &nodes[i])
    }) / T::c(3.0)
}

/// Gradient of the 1-homogeneous extension: `h u + ∇_S h`. No convexity check.
pub fn support_point<T: Real, S: SupportModel<T> + ?Sized>(h: &S, u: &Vec3<T>) -> Vec3<T> {
    let j = h.jet(u);
    *u * j.value + (j.grad - *u * j.grad.dot(u))
}

/// Boundary point with outer normal `u`; rejects degenerate radii.
pub fn boundary_point<T: Real, S: SupportModel<T> + ?Sized>(h: &S, u: &Vec3<T>) -> Result<Vec3<T>> {
    let j = h.jet(u);
    let r = radii_from_jet(&j, u);
    if r.r1 <= T::c(1e-12) * r.r2.abs().max(T::one()) {
        return Err(Error::DegenerateRadii {
            r1: r.r1.to_f64_lossy(),
        });
    }
    Ok(*u * j.value + (j.grad - *u * j.grad.dot(u)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereFit<T> {
    pub center: Vec3<T>,
    pub radius: T,
    /// `max |‖x − c‖ − R|` over the fitted points.
    pub residual: T,
}

/// Algebraic least-squares sphere (`|x|² = 2⟨c,x⟩ + k`) followed by one
/// Gauss–Newton step on the geometric distances.
pub fn fit_sphere<T: Real>(points: &[Vec3<T>]) -> Option<SphereFit<T>> {
    if points.len() < 4 {
        return None;
    }
    let rows: Vec<Vec<T>> = points
        .iter()
        .map(|p| vec![T::two() * p.x(), T::two() * p.y(), T::two() * p.z(), T::one()])
        .collect();
    let rhs: Vec<T> = points.iter().map(|p| p.dot(p)).collect();
    let sol = least_squares(&rows, &rhs)?;
    let mut c = Vec3::new(sol[0], sol[1], sol[2]);
    let r2 = sol[3] + c.dot(&c);
    if !(r2 > T::zero()) {
        return None;
    }
    let mut r = r2.sqrt();
    // Gauss–Newton on e_i = |x_i − c| − R
    let mut jtj = vec![vec![T::zero(); 4]; 4];
    let mut jte = vec![T::zero(); 4];
    for p in points {
        let d = *p - c;
        let n = d.norm();
        if n == T::zero() {
            continue;
        }
        let row = [-d.x() / n, -d.y() / n, -d.z() / n, -T::one()];
        let e = n - r;
        for a in 0..4 {
            jte[a] = jte[a] - row[a] * e;
            for b in 0..4 {
                jtj[a][b] = jtj[a][b] + row[a] * row[b];
            }
        }
    }
    if let Some(step) = solve_dense(jtj, jte) {
        c += Vec3::new(step[0], step[1], step[2]);
        r = r + step[3];
    }
    let residual = points
        .iter()
        .map(|p| ((*p - c).norm() - r).abs())
        .fold(T::zero(), T::max);
    Some(SphereFit {
        center: c,
        radius: r,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UmbilicReport<T> {
    pub is_umbilic: bool,
    /// `max |r1 − r2| / max(r1, r2)` over the cap nodes.
    pub radii_spread: T,
    pub nodes: usize,
    pub fit: Option<SphereFit<T>>,
}

/// Equal principal radii on the cap nodes, then a sphere fit to the boundary
/// points when they are.
pub fn umbilic_sphere_check<T: Real, S: SupportModel<T> + ?Sized>(
    h: &S,
    grid: &SphericalGrid<T>,
    cap: &Cap<T>,
    tol: T,
) -> UmbilicReport<T> {
    let mut spread = T::zero();
    let mut points = Vec::new();
    for u in grid.nodes().iter().filter(|u| cap.contains(u)) {
        let j = h.jet(u);
        let r = radii_from_jet(&j, u);
        let top = r.r1.abs().max(r.r2.abs());
        let s = if top > T::zero() {
            (r.r2 - r.r1) / top
        } else {
            T::zero()
        };
        spread = spread.max(s);
        points.push(*u * j.value + (j.grad - *u * j.grad.dot(u)));
    }
    let is_umbilic = !points.is_empty() && spread <= tol;
    let fit = if is_umbilic { fit_sphere(&points) } else { None };
    UmbilicReport {
        is_umbilic,
        radii_spread: spread,
        nodes: points.len(),
        fit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn elementary_symmetric() {
        let r = [1.0f64, 2.0, 3.0];
        assert_eq!(normalized_elementary_symmetric(&r, 0), 1.0);
        assert!((normalized_elementary_symmetric(&r, 1) - 2.0).abs() < 1e-15);
        assert!((normalized_elementary_symmetric(&r, 2) - 11.0 / 3.0).abs() < 1e-15);
        assert!((normalized_elementary_symmetric(&r, 3) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn ball_radii_and_densities() {
        let b = Ball::new(2.0f64);
        let u = Vec3::new(0.3, -0.4, 0.5).normalized();
        let r = radii(&b, &u);
        assert!((r.r1 - 2.0).abs() < 1e-14 && (r.r2 - 2.0).abs() < 1e-14);
        assert!((area_density(&b, &u, 2).unwrap() - 4.0).abs() < 1e-13);
        assert!(area_density(&b, &u, 3).is_err());
        let n = newton_report(&b, &u, 1, 2).unwrap();
        assert!(n.equality && n.gap.abs() < 1e-14);
    }

    #[test]
    fn translated_ball_radii_unchanged() {
        let b = Ball::translated(1.5, Vector3::new(0.2, -0.1, 0.3));
        let u = Vec3::new(-0.2, 0.9, 0.1).normalized();
        let r = radii(&b, &u);
        assert!((r.r1 - 1.5).abs() < 1e-14 && (r.r2 - 1.5).abs() < 1e-14);
        let p = boundary_point(&b, &u).unwrap();
        assert!((p - (u * 1.5 + Vector3::new(0.2, -0.1, 0.3))).norm() < 1e-14);
    }

    type Vector3 = Vec3<f64>;

    #[test]
    fn mixed_discriminant_identities() {
        let a = Sym2::new(2.0f64, 0.3, 1.0);
        let b = Sym2::new(0.5, -0.2, 4.0);
        assert_eq!(mixed_discriminant(&a, &b), mixed_discriminant(&b, &a));
        assert!((mixed_discriminant(&a, &a) - a.det()).abs() < 1e-15);
        let id = Sym2::new(1.0, 0.0, 1.0);
        assert!((mixed_discriminant(&a, &id) - a.trace() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn ball_volume() {
        let g = SphericalGrid::new(16, 32).unwrap();
        let b = Ball::new(1.0);
        assert!((mixed_volume(&g, &b, &b, &b) - 4.0 * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_fit_exact_points() {
        let c = Vec3::new(0.1, 0.2, -0.3);
        let pts: Vec<Vec3<f64>> = (0..40)
            .map(|k| {
                let t = 0.5 + 0.5 * (k as f64 / 40.0);
                let p = 2.0 * PI * k as f64 / 7.3;
                let s = (1.0f64 - t * t).sqrt();
                c + Vec3::new(s * p.cos(), s * p.sin(), t) * 2.5
            })
            .collect();
        let fit = fit_sphere(&pts).unwrap();
        assert!((fit.center - c).norm() < 1e-10);
        assert!((fit.radius - 2.5).abs() < 1e-10);
        assert!(fit.residual < 1e-10);
    }
}

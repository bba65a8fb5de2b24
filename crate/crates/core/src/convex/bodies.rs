//! Closed-form support functions, as 1-homogeneous functions on R³.

use crate::linalg::{Jet, Mat3, Vec3};
use crate::scalar::Real;

use super::SupportModel;

/// Jet of `ρ|x|`.
fn radial_jet<T: Real>(rho: T, x: &Vec3<T>) -> Jet<T> {
    let r = x.norm();
    let hess = Mat3::identity()
        .scale(rho / r)
        .add(&Mat3::outer(x, x).scale(-rho / (r * r * r)));
    Jet {
        value: rho * r,
        grad: *x * (rho / r),
        hess,
    }
}

/// Ball of radius `radius` centred at `center`: `h = ρ|x| + ⟨c, x⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball<T> {
    pub radius: T,
    pub center: Vec3<T>,
}

impl<T: Real> Ball<T> {
    pub fn new(radius: T) -> Self {
        Ball {
            radius,
            center: Vec3::zero(),
        }
    }

    pub fn translated(radius: T, center: Vec3<T>) -> Self {
        Ball { radius, center }
    }
}

impl<T: Real> SupportModel<T> for Ball<T> {
    fn jet(&self, x: &Vec3<T>) -> Jet<T> {
        let mut j = radial_jet(self.radius, x);
        j.value = j.value + self.center.dot(x);
        j.grad += self.center;
        j
    }
}

/// Axis-aligned ellipsoid with semi-axes `(a, b, c)`: `h = √(xᵀD²x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipsoid<T> {
    pub axes: [T; 3],
}

impl<T: Real> Ellipsoid<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Ellipsoid { axes: [a, b, c] }
    }

    /// `Σ x_i² / a_i² − 1`, zero on the surface.
    pub fn implicit(&self, p: &Vec3<T>) -> T {
        (0..3)
            .map(|i| p[i] * p[i] / (self.axes[i] * self.axes[i]))
            .fold(T::zero(), |a, b| a + b)
            - T::one()
    }
}

impl<T: Real> SupportModel<T> for Ellipsoid<T> {
    fn jet(&self, x: &Vec3<T>) -> Jet<T> {
        let d2 = Vec3::new(self.axes[0].powi(2), self.axes[1].powi(2), self.axes[2].powi(2));
        let dx = Vec3::new(d2[0] * x[0], d2[1] * x[1], d2[2] * x[2]);
        let h = x.dot(&dx).sqrt();
        let mut diag = Mat3::zero();
        for i in 0..3 {
            diag.0[i][i] = d2[i] / h;
        }
        let hess = diag.add(&Mat3::outer(&dx, &dx).scale(-T::one() / (h * h * h)));
        Jet {
            value: h,
            grad: dx * (T::one() / h),
            hess,
        }
    }
}

/// Ball plus a segment of length `length` along `e3`:
/// `h = ρ|x| + (ℓ/2)|x₃|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spherocylinder<T> {
    pub radius: T,
    pub length: T,
}

impl<T: Real> Spherocylinder<T> {
    pub fn new(radius: T, length: T) -> Self {
        Spherocylinder { radius, length }
    }
}

impl<T: Real> SupportModel<T> for Spherocylinder<T> {
    fn jet(&self, x: &Vec3<T>) -> Jet<T> {
        let mut j = radial_jet(self.radius, x);
        let half = self.length * T::half();
        j.value = j.value + half * x.z().abs();
        j.grad += Vec3::basis(2) * (half * x.z().signum());
        j
    }
}

/// Intersection of the balls of radius `radius` centred at `±offset·e3`.
///
/// Normals with `|t| ≥ δ/R` see one spherical cap; the rest see the edge
/// circle of radius `√(R² − δ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lens<T> {
    pub radius: T,
    pub offset: T,
}

impl<T: Real> Lens<T> {
    pub fn new(radius: T, offset: T) -> Self {
        Lens { radius, offset }
    }

    /// `|t|` above which the normal points into a smooth cap.
    pub fn threshold(&self) -> T {
        self.offset / self.radius
    }

    pub fn edge_radius(&self) -> T {
        (self.radius * self.radius - self.offset * self.offset).sqrt()
    }
}

impl<T: Real> SupportModel<T> for Lens<T> {
    fn jet(&self, x: &Vec3<T>) -> Jet<T> {
        let t = x.z() / x.norm();
        let thr = self.threshold();
        if t.abs() >= thr {
            let mut j = radial_jet(self.radius, x);
            // upper cap is supported by the ball centred at −δ e3
            let s = -self.offset * t.signum();
            j.value = j.value + s * x.z();
            j.grad += Vec3::basis(2) * s;
            return j;
        }
        let k = self.edge_radius();
        let rho = (x.x() * x.x() + x.y() * x.y()).sqrt();
        let p = Vec3::new(x.x(), x.y(), T::zero());
        let mut hess = Mat3::zero();
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { T::one() } else { T::zero() };
                hess.0[a][b] = k * (delta / rho - p[a] * p[b] / (rho * rho * rho));
            }
        }
        Jet {
            value: k * rho,
            grad: p * (k / rho),
            hess,
        }
    }
}

/// Minkowski sum: support functions add.
#[derive(Clone, Copy, Debug)]
pub struct MinkowskiSum<A, B>(pub A, pub B);

impl<T: Real, A: SupportModel<T>, B: SupportModel<T>> SupportModel<T> for MinkowskiSum<A, B> {
    fn jet(&self, x: &Vec3<T>) -> Jet<T> {
        self.0.jet(x).add(&self.1.jet(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{boundary_point, radii};

    #[test]
    fn ellipsoid_boundary_point_on_surface() {
        let e = Ellipsoid::new(1.0f64, 2.0, 3.0);
        for u in [
            Vec3::new(0.2, 0.5, -0.7),
            Vec3::new(-0.9, 0.1, 0.3),
            Vec3::new(0.0, 0.0, 1.0),
        ] {
            let u = u.normalized();
            let p = boundary_point(&e, &u).unwrap();
            assert!(e.implicit(&p).abs() < 1e-13);
            assert!((p.dot(&u) - e.value(&u)).abs() < 1e-13);
        }
    }

    #[test]
    fn ellipsoid_pole_radii() {
        // at the pole of (1, 1, 2) both radii are a²/c = 1/2
        let e = Ellipsoid::new(1.0f64, 1.0, 2.0);
        let r = radii(&e, &Vec3::basis(2));
        assert!((r.r1 - 0.5).abs() < 1e-14 && (r.r2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn lens_pieces() {
        let l = Lens::new(1.0f64, 0.5);
        let up = Vec3::new(0.0, 0.6, 0.8);
        let r = radii(&l, &up);
        assert!((r.r1 - 1.0).abs() < 1e-14 && (r.r2 - 1.0).abs() < 1e-14);
        let mid = Vec3::new(0.8, 0.0, 0.3).normalized();
        let r = radii(&l, &mid);
        assert!(r.r1.abs() < 1e-14 && r.r2 > 0.5);
        // continuity at the threshold
        let t: f64 = 0.5;
        let s = (1.0 - t * t).sqrt();
        let below = Vec3::new(s, 0.0, t - 1e-12);
        let above = Vec3::new(s, 0.0, t + 1e-12);
        assert!((l.value(&below) - l.value(&above)).abs() < 1e-11);
    }
}

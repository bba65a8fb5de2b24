//! Gauss–Legendre × uniform product grids on S², great circles and tangent
//! frames.
//!
//! Nodes are stored ring-major: ring `i` (colatitude `theta_i`, north first)
//! occupies indices `i * n_phi .. (i + 1) * n_phi`.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::{pairwise_sum, pairwise_sum_by, Real};

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence in `f64`, then converted.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre_f64(n);
    (x.into_iter().map(T::c).collect(), w.into_iter().map(T::c).collect())
}

pub(crate) fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = (b - a) * T::half();
    let mid = (b + a) * T::half();
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| wi * half).collect(),
    )
}

/// One latitude ring of a [`SphericalGrid`].
#[derive(Clone, Debug)]
pub struct Ring<T> {
    pub theta: T,
    pub cos_theta: T,
    pub sin_theta: T,
    /// Weight of each node on the ring (`GL weight × 2π / n_phi`).
    pub node_weight: T,
    pub start: usize,
    pub len: usize,
}

impl<T> Ring<T> {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Clone, Debug)]
pub struct SphericalGrid<T> {
    n_theta: usize,
    n_phi: usize,
    nodes: Vec<Vec3<T>>,
    weights: Vec<T>,
    phis: Vec<T>,
    rings: Vec<Ring<T>>,
}

impl<T: Real> SphericalGrid<T> {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 4 {
            return Err(Error::InvalidGrid { n_theta, n_phi });
        }
        let (z, w) = gauss_legendre_f64(n_theta);
        let dphi = std::f64::consts::TAU / n_phi as f64;
        let phis_f64: Vec<f64> = (0..n_phi).map(|j| j as f64 * dphi).collect();
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        let mut rings = Vec::with_capacity(n_theta);
        // north first: z descending
        for i in 0..n_theta {
            let zi = z[n_theta - 1 - i];
            let wi = w[n_theta - 1 - i] * dphi;
            let si = (1.0 - zi * zi).sqrt();
            rings.push(Ring {
                theta: T::c(zi.acos()),
                cos_theta: T::c(zi),
                sin_theta: T::c(si),
                node_weight: T::c(wi),
                start: i * n_phi,
                len: n_phi,
            });
            for &phi in &phis_f64 {
                let (sp, cp) = phi.sin_cos();
                nodes.push(Vec3::new(T::c(si * cp), T::c(si * sp), T::c(zi)));
                weights.push(T::c(wi));
            }
        }
        Ok(SphericalGrid {
            n_theta,
            n_phi,
            nodes,
            weights,
            phis: phis_f64.into_iter().map(T::c).collect(),
            rings,
        })
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }
    pub fn n_phi(&self) -> usize {
        self.n_phi
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn nodes(&self) -> &[Vec3<T>] {
        &self.nodes
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }
    pub fn rings(&self) -> &[Ring<T>] {
        &self.rings
    }
    pub fn phis(&self) -> &[T] {
        &self.phis
    }

    /// Colatitude and longitude of node `i`.
    pub fn angles(&self, i: usize) -> (T, T) {
        (self.rings[i / self.n_phi].theta, self.phis[i % self.n_phi])
    }

    /// Largest total degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        (2 * self.n_theta - 1).min(self.n_phi - 1)
    }

    /// Largest band limit `L` whose L² projection is computed exactly
    /// (products of degree `2L` integrated without aliasing).
    pub fn max_band(&self) -> usize {
        (self.n_theta - 1).min((self.n_phi - 1) / 2)
    }

    /// Index of the node at `-x_i`, when the grid contains it (even `n_phi`).
    pub fn antipode(&self, i: usize) -> Option<usize> {
        if !self.n_phi.is_multiple_of(2) {
            return None;
        }
        let ring = i / self.n_phi;
        let j = i % self.n_phi;
        Some((self.n_theta - 1 - ring) * self.n_phi + (j + self.n_phi / 2) % self.n_phi)
    }

    /// Σ wᵢ fᵢ with pairwise summation.
    pub fn integrate(&self, values: &[T]) -> Result<T> {
        self.check_len(values.len())?;
        Ok(pairwise_sum_by(values.len(), &|i| self.weights[i] * values[i]))
    }

    pub fn integrate_fn<F: Fn(&Vec3<T>) -> T>(&self, f: F) -> T {
        pairwise_sum_by(self.nodes.len(), &|i| self.weights[i] * f(&self.nodes[i]))
    }

    pub fn sample<F: Fn(&Vec3<T>) -> T>(&self, f: F) -> Vec<T> {
        self.nodes.iter().map(f).collect()
    }

    /// Average of `values` over every ring, broadcast back to the ring.
    /// Rings that are already constant are copied bitwise.
    pub fn ring_average(&self, values: &[T]) -> Result<Vec<T>> {
        self.check_len(values.len())?;
        let mut out = Vec::with_capacity(values.len());
        for ring in &self.rings {
            let slice = &values[ring.indices()];
            if slice.iter().all(|v| v.to_bits_eq(&slice[0])) {
                out.extend_from_slice(slice);
            } else {
                let mean = pairwise_sum(slice) / T::from_usize_lossy(slice.len());
                out.extend(std::iter::repeat_n(mean, slice.len()));
            }
        }
        Ok(out)
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.nodes.len() {
            return Err(Error::ShapeMismatch {
                expected: self.nodes.len(),
                got,
            });
        }
        Ok(())
    }

    /// CSV dump `theta,phi,weight,value` at 17 significant digits.
    pub fn write_csv<W: Write>(&self, values: &[T], mut out: W) -> io::Result<()> {
        if values.len() != self.len() {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "sample count mismatch"));
        }
        writeln!(out, "theta,phi,weight,value")?;
        for (i, v) in values.iter().enumerate() {
            let (th, ph) = self.angles(i);
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                th.to_f64_lossy(),
                ph.to_f64_lossy(),
                self.weights[i].to_f64_lossy(),
                v.to_f64_lossy()
            )?;
        }
        Ok(())
    }
}

/// Bitwise comparison used by the idempotence guarantees.
pub(crate) trait BitsEq {
    fn to_bits_eq(&self, other: &Self) -> bool;
}

impl<T: Real> BitsEq for T {
    fn to_bits_eq(&self, other: &Self) -> bool {
        // Both f32 and f64 round-trip exactly through f64.
        let a = self.to_f64_lossy();
        let b = other.to_f64_lossy();
        a.to_bits() == b.to_bits()
    }
}

/// Deterministic orthonormal frame `(ε1, ε2)` of `u⊥` with `ε1 × ε2 = u`.
pub fn tangent_basis<T: Real>(u: &Vec3<T>) -> (Vec3<T>, Vec3<T>) {
    let e1 = if u.z().abs() < T::c(0.9) {
        Vec3::basis(2).cross(u).normalized()
    } else {
        (Vec3::basis(0) - *u * u.x()).normalized()
    };
    let e2 = u.cross(&e1);
    (e1, e2)
}

#[derive(Clone, Debug)]
pub struct GreatCircle<T> {
    pub u: Vec3<T>,
    pub e1: Vec3<T>,
    pub e2: Vec3<T>,
    pub angles: Vec<T>,
    pub weight: T,
}

impl<T: Real> GreatCircle<T> {
    pub fn m(&self) -> usize {
        self.angles.len()
    }

    pub fn point(&self, alpha: T) -> Vec3<T> {
        let (s, c) = alpha.sin_cos();
        self.e1 * c + self.e2 * s
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec3<T>> + '_ {
        self.angles.iter().map(move |&a| self.point(a))
    }
}

pub fn great_circle<T: Real>(u: &Vec3<T>, m: usize) -> Result<GreatCircle<T>> {
    if m < 8 {
        return Err(Error::InvalidArgument(format!("circle needs m >= 8 nodes, got {m}")));
    }
    let (e1, e2) = tangent_basis(u);
    let step = T::tau() / T::from_usize_lossy(m);
    Ok(GreatCircle {
        u: *u,
        e1,
        e2,
        angles: (0..m).map(|k| T::from_usize_lossy(k) * step).collect(),
        weight: step,
    })
}

/// Point-evaluable function on the sphere.
pub trait SphereFn<T> {
    fn eval(&self, x: &Vec3<T>) -> T;
}

impl<T: Real, F: Fn(&Vec3<T>) -> T> SphereFn<T> for F {
    fn eval(&self, x: &Vec3<T>) -> T {
        self(x)
    }
}

/// Trapezoid quadrature of `g` over the circle.
pub fn circle_integrate<T: Real, G: SphereFn<T> + ?Sized>(g: &G, c: &GreatCircle<T>) -> T {
    let vals: Vec<T> = c.nodes().map(|x| g.eval(&x)).collect();
    pairwise_sum(&vals) * c.weight
}

/// Spherical cap `{x : ⟨x, center⟩ > height}`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Cap<T> {
    pub center: Vec3<T>,
    pub height: T,
}

impl<T: Real> Cap<T> {
    pub fn new(center: Vec3<T>, height: T) -> Self {
        Cap {
            center: center.normalized(),
            height,
        }
    }

    pub fn contains(&self, x: &Vec3<T>) -> bool {
        x.dot(&self.center) > self.height
    }

    /// Contains `x` or `-x`.
    pub fn contains_sym(&self, x: &Vec3<T>) -> bool {
        x.dot(&self.center).abs() > self.height
    }

    pub fn angular_radius(&self) -> T {
        self.height.max(-T::one()).min(T::one()).acos()
    }

    /// Geodesic distance from `x` to the closed cap.
    pub fn distance(&self, x: &Vec3<T>) -> T {
        let c = x.dot(&self.center).max(-T::one()).min(T::one());
        (c.acos() - self.angular_radius()).max(T::zero())
    }

    /// Geodesic distance from `x` to the cap or its antipode.
    pub fn distance_sym(&self, x: &Vec3<T>) -> T {
        let c = x.dot(&self.center).abs().min(T::one());
        (c.acos() - self.angular_radius()).max(T::zero())
    }

    /// Indices of grid nodes inside the cap.
    pub fn grid_indices(&self, grid: &SphericalGrid<T>) -> Vec<usize> {
        (0..grid.len()).filter(|&i| self.contains(&grid.nodes()[i])).collect()
    }

    /// Point at polar offset `(t, psi)` about the centre, `t = ⟨x, center⟩`.
    pub fn point_at(&self, t: T, psi: T) -> Vec3<T> {
        let (e1, e2) = tangent_basis(&self.center);
        let s = (T::one() - t * t).max(T::zero()).sqrt();
        let (sp, cp) = psi.sin_cos();
        self.center * t + e1 * (s * cp) + e2 * (s * sp)
    }
}

/// Geodesic distance between unit vectors.
pub fn geodesic<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    // atan2 form stays accurate for nearly equal / antipodal vectors
    a.cross(b).norm().atan2(a.dot(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gl_small_rules() {
        let (x, w) = gauss_legendre::<f64>(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre::<f64>(5);
        assert_eq!(x[2], 0.0);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_2048() {
        let g = SphericalGrid::<f64>::new(32, 64).unwrap();
        assert_eq!(g.len(), 2048);
        let total: f64 = g.integrate(&vec![1.0; 2048]).unwrap();
        assert!((total - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
    }

    #[test]
    fn rejects_small_sizes() {
        assert!(SphericalGrid::<f64>::new(0, 4).is_err());
        assert!(SphericalGrid::<f64>::new(2, 3).is_err());
    }

    #[test]
    fn integrates_z_squared() {
        let g = SphericalGrid::<f64>::new(8, 16).unwrap();
        assert!((g.integrate_fn(|x| x.z() * x.z()) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!(g.integrate_fn(|x| x.z()).abs() < 1e-14);
    }

    #[test]
    fn antipode_index() {
        let g = SphericalGrid::<f64>::new(6, 10).unwrap();
        for i in 0..g.len() {
            let j = g.antipode(i).unwrap();
            assert!((g.nodes()[i] + g.nodes()[j]).norm() < 1e-15);
        }
        assert!(SphericalGrid::<f64>::new(6, 9).unwrap().antipode(0).is_none());
    }

    #[test]
    fn tangent_basis_canonical() {
        let (a, b) = tangent_basis(&Vec3::<f64>::basis(2));
        assert!((a - Vec3::basis(0)).norm() < 1e-15);
        assert!((b - Vec3::basis(1)).norm() < 1e-15);
    }

    #[test]
    fn circle_x1_squared() {
        let c = great_circle(&Vec3::<f64>::basis(2), 128).unwrap();
        assert!((circle_integrate(&|x: &Vec3<f64>| x.x() * x.x(), &c) - PI).abs() < 1e-13);
        assert!((circle_integrate(&|_: &Vec3<f64>| 1.0, &c) - 2.0 * PI).abs() < 1e-13);
        assert!(great_circle(&Vec3::<f64>::basis(2), 4).is_err());
    }

    #[test]
    fn cap_distance() {
        let cap = Cap::new(Vec3::<f64>::basis(2), 0.5);
        assert_eq!(cap.distance(&Vec3::basis(2)), 0.0);
        let d = cap.distance(&Vec3::basis(0));
        assert!((d - (PI / 2.0 - PI / 3.0)).abs() < 1e-15);
        assert_eq!(cap.distance_sym(&-Vec3::basis(2)), 0.0);
    }
}

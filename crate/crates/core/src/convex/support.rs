use std::io::{self, Write};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::HarmonicCoeffs;
use crate::linalg::{Jet, Sym2, Vec3};
use crate::scalar::Real;
use crate::sphere::SphericalGrid;
use crate::transforms::{radial_symmetrize, SphericalFunction};

use super::{radii_from_jet, SupportModel};

/// Relative slack on the smallest radius: `min_eig ≥ −tol · max_eig`.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-8;

/// Extreme radii over the grid nodes and the minimum of `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate<T> {
    pub min_eig: T,
    pub max_eig: T,
    pub min_value: T,
}

impl<T: Real> Certificate<T> {
    pub fn passes(&self) -> bool {
        self.min_eig >= -T::c(CERTIFICATE_TOLERANCE) * self.max_eig.abs() && self.min_value > T::zero()
    }
}

fn certify<T: Real>(grid: &SphericalGrid<T>, c: &HarmonicCoeffs<T>) -> Certificate<T> {
    let mut cert = Certificate {
        min_eig: T::infinity(),
        max_eig: T::neg_infinity(),
        min_value: T::infinity(),
    };
    for u in grid.nodes() {
        let j = c.jet(u);
        let r = radii_from_jet(&j, u);
        cert.min_eig = cert.min_eig.min(r.r1);
        cert.max_eig = cert.max_eig.max(r.r2);
        cert.min_value = cert.min_value.min(j.value);
    }
    cert
}

/// Band-limited support function with its convexity certificate.
#[derive(Clone, Debug)]
pub struct SupportFunction<T> {
    h: SphericalFunction<T>,
    certificate: Certificate<T>,
}

impl<T: Real> SupportFunction<T> {
    /// Certify `c` on `grid`. When `h` is not positive everywhere the body is
    /// first moved to its Steiner point (degree-1 part removed).
    pub fn from_coeffs(grid: Arc<SphericalGrid<T>>, c: HarmonicCoeffs<T>) -> Result<Self> {
        let mut c = c;
        let mut cert = certify(&grid, &c);
        if cert.min_value <= T::zero() && c.band() >= 1 {
            for m in -1..=1 {
                c.set(1, m, T::zero());
            }
            cert = certify(&grid, &c);
        }
        if cert.min_eig < -T::c(CERTIFICATE_TOLERANCE) * cert.max_eig.abs() {
            return Err(Error::NotConvex {
                min_eig: cert.min_eig.to_f64_lossy(),
                max_eig: cert.max_eig.to_f64_lossy(),
            });
        }
        if !(cert.min_value > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "support function is not positive (min {:e}); body has empty interior",
                cert.min_value
            )));
        }
        Ok(SupportFunction {
            h: SphericalFunction::from_coeffs(grid, c),
            certificate: cert,
        })
    }

    pub fn from_function(h: &SphericalFunction<T>) -> Result<Self> {
        Self::from_coeffs(h.grid().clone(), h.evaluator()?.clone())
    }

    /// Band-`band` fit of a closed-form support function.
    pub fn project<S: SupportModel<T> + ?Sized>(grid: Arc<SphericalGrid<T>>, model: &S, band: usize) -> Result<Self> {
        let values = grid.sample(|u| model.value(u));
        let c = crate::harmonics::analyze(&grid, &values, band)?;
        Self::from_coeffs(grid, c)
    }

    pub fn function(&self) -> &SphericalFunction<T> {
        &self.h
    }

    pub fn coeffs(&self) -> &HarmonicCoeffs<T> {
        self.h.coeffs().expect("support functions always carry coefficients")
    }

    pub fn grid(&self) -> &Arc<SphericalGrid<T>> {
        self.h.grid()
    }

    pub fn certificate(&self) -> &Certificate<T> {
        &self.certificate
    }

    pub fn values(&self) -> &[T] {
        self.h.values()
    }

    /// Support function of `self + other`.
    pub fn minkowski_add(&self, other: &Self) -> Result<Self> {
        Self::from_coeffs(self.grid().clone(), self.coeffs().add(other.coeffs()))
    }

    /// Support function of `λ·K`, `λ > 0`.
    pub fn dilate(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidArgument("dilation factor must be positive".into()));
        }
        Self::from_coeffs(self.grid().clone(), self.coeffs().scale(lambda))
    }

    /// CSV dump `theta,phi,h`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,phi,h")?;
        for (i, v) in self.values().iter().enumerate() {
            let (theta, phi) = self.grid().angles(i);
            writeln!(out, "{:.16e},{:.16e},{:.16e}", theta, phi, v)?;
        }
        Ok(())
    }
}

impl<T: Real> SupportModel<T> for SupportFunction<T> {
    fn jet(&self, u: &Vec3<T>) -> Jet<T> {
        self.coeffs().jet(u)
    }
    fn value(&self, u: &Vec3<T>) -> T {
        self.coeffs().eval(u)
    }
}

/// Radial symmetrization of `h` about `e3`, recertified.
pub fn radial_symmetrize_support<T: Real>(h: &SupportFunction<T>) -> Result<SupportFunction<T>> {
    let sr = radial_symmetrize(h.function(), &Vec3::basis(2))?;
    let c = match sr.coeffs() {
        Some(c) => c.clone(),
        None => h.coeffs().zonal_part(),
    };
    SupportFunction::from_coeffs(h.grid().clone(), c)
}

/// The body of revolution `MK` whose support function is `Sr(h_K)`.
pub fn blaschke_minkowski_symmetrize<T: Real>(h: &SupportFunction<T>) -> Result<SupportFunction<T>> {
    radial_symmetrize_support(h)
}

/// `h = 1 + ε·w` with `w` a random even band-`band` expansion.
///
/// `ε*` (largest ε keeping all radii positive) is bracketed by bisection and
/// then scaled by a random factor in `[0.2, 0.9]`.
pub fn random_support_function<T: Real, R: Rng + ?Sized>(
    grid: Arc<SphericalGrid<T>>,
    band: usize,
    rng: &mut R,
) -> Result<SupportFunction<T>> {
    let band = band.max(2);
    let w = HarmonicCoeffs::from_fn(band, |l, _| {
        if l >= 2 && l % 2 == 0 {
            let z: f64 = rng.sample(StandardNormal);
            T::c(z / (1.0 + l as f64))
        } else {
            T::zero()
        }
    });
    // h = 1 + εw has Q = I + ε Q_w and value 1 + ε w
    let per_node: Vec<(Sym2<T>, T)> = grid
        .nodes()
        .iter()
        .map(|u| {
            let j = w.jet(u);
            (radii_from_jet(&j, u).q, j.value)
        })
        .collect();
    let ok = |eps: T| {
        per_node.iter().all(|(q, v)| {
            let (r1, _) = Sym2::new(T::one() + eps * q.a, eps * q.b, T::one() + eps * q.c).eigenvalues();
            r1 > T::zero() && T::one() + eps * *v > T::zero()
        })
    };
    let (mut lo, mut hi) = (T::zero(), T::one());
    while ok(hi) && hi < T::c(1e6) {
        lo = hi;
        hi = hi * T::two();
    }
    for _ in 0..60 {
        let mid = (lo + hi) * T::half();
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let frac = T::c(rng.gen_range(0.2..0.9));
    let mut c = w.scale(lo * frac);
    c.set(0, 0, c.get(0, 0) + T::c(4.0 * std::f64::consts::PI).sqrt());
    SupportFunction::from_coeffs(grid, c)
}

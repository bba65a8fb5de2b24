//! Grid-level transforms: cosine and Funk transforms, the section-isotropy
//! tensor, radial symmetrization and finite rotation averages.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::{analyze, legendre_p, synthesize_grid, HarmonicCoeffs};
use crate::linalg::{Mat3, Sym2, Vec3};
use crate::scalar::{pairwise_sum, pairwise_sum_by, Real};
use crate::sphere::{
    circle_integrate, gauss_legendre, gauss_legendre_interval, great_circle, tangent_basis, SphereFn, SphericalGrid,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Tolerance for declared parity at antipodal node pairs.
pub const PARITY_TOLERANCE: f64 = 1e-10;

/// Samples on a grid, optionally paired with the band-limited expansion that
/// produced them (which then serves as the evaluation rule).
#[derive(Clone, Debug)]
pub struct SphericalFunction<T> {
    grid: Arc<SphericalGrid<T>>,
    values: Vec<T>,
    coeffs: Option<HarmonicCoeffs<T>>,
    parity: Parity,
}

impl<T: Real> SphericalFunction<T> {
    pub fn from_values(grid: Arc<SphericalGrid<T>>, values: Vec<T>) -> Result<Self> {
        grid.check_len(values.len())?;
        Ok(SphericalFunction {
            grid,
            values,
            coeffs: None,
            parity: Parity::None,
        })
    }

    pub fn from_fn<F: Fn(&Vec3<T>) -> T>(grid: Arc<SphericalGrid<T>>, f: F) -> Self {
        let values = grid.sample(f);
        SphericalFunction {
            grid,
            values,
            coeffs: None,
            parity: Parity::None,
        }
    }

    /// Synthesized samples of a band-limited expansion. Parity is read off
    /// the coefficients.
    pub fn from_coeffs(grid: Arc<SphericalGrid<T>>, coeffs: HarmonicCoeffs<T>) -> Self {
        let values = synthesize_grid(&coeffs, &grid);
        let parity = match (coeffs.has_even(), coeffs.has_odd()) {
            (_, false) => Parity::Even,
            (false, true) => Parity::Odd,
            _ => Parity::None,
        };
        SphericalFunction {
            grid,
            values,
            coeffs: Some(coeffs),
            parity,
        }
    }

    /// Band-`band` projection of the samples (values are replaced by the
    /// synthesized projection so samples and expansion agree).
    pub fn band_limited(grid: Arc<SphericalGrid<T>>, values: &[T], band: usize) -> Result<Self> {
        let c = analyze(&grid, values, band)?;
        Ok(Self::from_coeffs(grid, c))
    }

    pub fn grid(&self) -> &Arc<SphericalGrid<T>> {
        &self.grid
    }
    pub fn values(&self) -> &[T] {
        &self.values
    }
    pub fn coeffs(&self) -> Option<&HarmonicCoeffs<T>> {
        self.coeffs.as_ref()
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// The evaluation rule, or [`Error::NotEvaluable`].
    pub fn evaluator(&self) -> Result<&HarmonicCoeffs<T>> {
        self.coeffs.as_ref().ok_or(Error::NotEvaluable)
    }

    pub fn eval(&self, x: &Vec3<T>) -> Result<T> {
        Ok(self.evaluator()?.eval(x))
    }

    pub fn integrate(&self) -> T {
        pairwise_sum_by(self.values.len(), &|i| self.grid.weights()[i] * self.values[i])
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        SphericalFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
            coeffs: None,
            parity: Parity::None,
        }
    }

    /// `a·self + b·other`, keeping the expansion when both have one.
    pub fn linear_combination(&self, a: T, other: &Self, b: T) -> Result<Self> {
        self.grid.check_len(other.values.len())?;
        if let (Some(c1), Some(c2)) = (&self.coeffs, &other.coeffs) {
            return Ok(Self::from_coeffs(self.grid.clone(), c1.scale(a).add(&c2.scale(b))));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * *x + b * *y)
            .collect();
        Ok(SphericalFunction {
            grid: self.grid.clone(),
            values,
            coeffs: None,
            parity: Parity::None,
        })
    }

    /// Declare a parity, checked at antipodal node pairs.
    pub fn with_parity(mut self, parity: Parity) -> Result<Self> {
        if parity != Parity::None {
            let sign = if parity == Parity::Even { T::one() } else { -T::one() };
            let tol = T::c(PARITY_TOLERANCE);
            for i in 0..self.values.len() {
                let v_anti = match self.grid.antipode(i) {
                    Some(j) => self.values[j],
                    None => self.eval(&-self.grid.nodes()[i])?,
                };
                if (self.values[i] - sign * v_anti).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "function is not {parity:?} at node {i}"
                    )));
                }
            }
        }
        self.parity = parity;
        Ok(self)
    }

    /// `(f(x) + f(−x)) / 2`.
    pub fn even_part(&self) -> Result<Self> {
        if let Some(c) = &self.coeffs {
            let even = HarmonicCoeffs::from_fn(c.band(), |l, m| if l % 2 == 0 { c.get(l, m) } else { T::zero() });
            return Ok(Self::from_coeffs(self.grid.clone(), even));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.values.len() {
            let j = self.grid.antipode(i).ok_or(Error::NotEvaluable)?;
            values.push((self.values[i] + self.values[j]) * T::half());
        }
        Ok(SphericalFunction {
            grid: self.grid.clone(),
            values,
            coeffs: None,
            parity: Parity::Even,
        })
    }

    /// CSV dump `theta,phi,weight,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        self.grid.write_csv(&self.values, out)
    }
}

/// Plain node quadrature `Σ wᵢ |⟨xᵢ,u⟩| g(xᵢ)` at a single direction.
pub fn cosine_at_plain<T: Real>(g: &SphericalFunction<T>, u: &Vec3<T>) -> T {
    let grid = g.grid();
    let nodes = grid.nodes();
    let w = grid.weights();
    let vals = g.values();
    pairwise_sum_by(nodes.len(), &|i| w[i] * nodes[i].dot(u).abs() * vals[i])
}

/// Cosine transform at `u` for a band-`band` function, by a quadrature
/// adapted to `u`: split Gauss–Legendre in `s = ⟨x,u⟩` on `[−1,0]` and
/// `[0,1]` times the trapezoid rule around each circle `⟨x,u⟩ = s`.
/// Exact (up to rounding) for band-limited `g`, unlike node quadrature,
/// which only converges slowly across the kink of `|⟨x,u⟩|`.
pub fn cosine_at<T: Real, G: SphereFn<T> + ?Sized>(g: &G, band: usize, u: &Vec3<T>) -> T {
    let n_s = band / 2 + 2;
    let m_a = band + 2;
    let (e1, e2) = tangent_basis(u);
    let step = T::tau() / T::from_usize_lossy(m_a);
    let trig: Vec<(T, T)> = (0..m_a).map(|k| (T::from_usize_lossy(k) * step).sin_cos()).collect();
    let mut parts = Vec::with_capacity(2 * n_s);
    for (lo, hi) in [(-T::one(), T::zero()), (T::zero(), T::one())] {
        let (s_nodes, s_w) = gauss_legendre_interval(n_s, lo, hi);
        for (s, ws) in s_nodes.iter().zip(&s_w) {
            let r = (T::one() - *s * *s).max(T::zero()).sqrt();
            let ring: Vec<T> = trig
                .iter()
                .map(|(sa, ca)| g.eval(&(*u * *s + e1 * (r * *ca) + e2 * (r * *sa))))
                .collect();
            parts.push(*ws * s.abs() * pairwise_sum(&ring) * step);
        }
    }
    pairwise_sum(&parts)
}

/// Cosine transform at every grid node. Uses the `u`-adapted quadrature
/// when `g` carries an expansion, otherwise node quadrature.
pub fn cosine_transform<T: Real>(g: &SphericalFunction<T>) -> SphericalFunction<T> {
    let grid = g.grid().clone();
    let values: Vec<T> = match g.coeffs() {
        Some(c) => grid.nodes().iter().map(|u| cosine_at(c, c.band(), u)).collect(),
        None => grid.nodes().iter().map(|u| cosine_at_plain(g, u)).collect(),
    };
    SphericalFunction {
        grid,
        values,
        coeffs: None,
        parity: Parity::Even,
    }
}

/// Cosine transform by node quadrature only.
pub fn cosine_transform_plain<T: Real>(g: &SphericalFunction<T>) -> SphericalFunction<T> {
    let grid = g.grid().clone();
    let values = grid.nodes().iter().map(|u| cosine_at_plain(g, u)).collect();
    SphericalFunction {
        grid,
        values,
        coeffs: None,
        parity: Parity::Even,
    }
}

/// `R(g)(u) = ∫_{S²∩u⊥} g dH¹` by the trapezoid rule with `m` nodes.
pub fn funk_at<T: Real, G: SphereFn<T> + ?Sized>(g: &G, u: &Vec3<T>, m: usize) -> Result<T> {
    Ok(circle_integrate(g, &great_circle(u, m)?))
}

/// Funk transform at every grid node.
pub fn funk_transform<T: Real>(g: &SphericalFunction<T>, m: usize) -> Result<SphericalFunction<T>> {
    let c = g.evaluator()?;
    let grid = g.grid().clone();
    let values = grid
        .nodes()
        .iter()
        .map(|u| funk_at(c, u, m))
        .collect::<Result<Vec<T>>>()?;
    Ok(SphericalFunction {
        grid,
        values,
        coeffs: None,
        parity: Parity::Even,
    })
}

/// Second-moment tensor of `g` on the section `S² ∩ u⊥`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsotropyReport<T> {
    pub u: Vec3<T>,
    pub t: Sym2<T>,
    pub trace: T,
    pub deviation: T,
}

/// Floor on `|tr T|` in the deviation denominator.
pub const DEVIATION_FLOOR: f64 = 1e-14;

#[derive(Serialize)]
struct IsotropyJson {
    u: [f64; 3],
    #[serde(rename = "T")]
    t: [f64; 3],
    trace: f64,
    deviation: f64,
}

impl<T: Real> IsotropyReport<T> {
    pub fn to_json(&self) -> String {
        let j = IsotropyJson {
            u: self.u.to_f64(),
            t: [
                self.t.a.to_f64_lossy(),
                self.t.b.to_f64_lossy(),
                self.t.c.to_f64_lossy(),
            ],
            trace: self.trace.to_f64_lossy(),
            deviation: self.deviation.to_f64_lossy(),
        };
        serde_json::to_string(&j).expect("plain struct serializes")
    }
}

pub fn section_isotropy_tensor<T: Real, G: SphereFn<T> + ?Sized>(
    g: &G,
    u: &Vec3<T>,
    m: usize,
) -> Result<IsotropyReport<T>> {
    let c = great_circle(u, m)?;
    let mut t11 = Vec::with_capacity(m);
    let mut t12 = Vec::with_capacity(m);
    let mut t22 = Vec::with_capacity(m);
    for &a in &c.angles {
        let (s, co) = a.sin_cos();
        let gv = g.eval(&c.point(a));
        t11.push(co * co * gv);
        t12.push(co * s * gv);
        t22.push(s * s * gv);
    }
    let t = Sym2::new(
        pairwise_sum(&t11) * c.weight,
        pairwise_sum(&t12) * c.weight,
        pairwise_sum(&t22) * c.weight,
    );
    let trace = t.trace();
    let deviation = t.anisotropy() / trace.abs().max(T::c(DEVIATION_FLOOR));
    Ok(IsotropyReport {
        u: *u,
        t,
        trace,
        deviation,
    })
}

fn require_ring_axis<T: Real>(axis: &Vec3<T>) -> Result<()> {
    if (axis.normalized() - Vec3::basis(2)).norm() > T::c(1e-14) {
        return Err(Error::AxisMismatch);
    }
    Ok(())
}

/// Radial symmetrization about the grid's ring axis: ring averages.
///
/// An attached expansion is reduced to its zonal part, which agrees with the
/// ring averages whenever `n_phi > band`.
pub fn radial_symmetrize<T: Real>(f: &SphericalFunction<T>, axis: &Vec3<T>) -> Result<SphericalFunction<T>> {
    require_ring_axis(axis)?;
    let values = f.grid().ring_average(f.values())?;
    let coeffs = f
        .coeffs()
        .filter(|c| f.grid().n_phi() > c.band())
        .map(|c| c.zonal_part());
    Ok(SphericalFunction {
        grid: f.grid().clone(),
        values,
        coeffs,
        parity: f.parity(),
    })
}

/// Rotations by `2πk/m` about `e3`, `k = 0..m`.
pub fn axial_rotations<T: Real>(m: usize) -> Vec<Mat3<T>> {
    let step = T::tau() / T::from_usize_lossy(m);
    (0..m)
        .map(|k| Mat3::rotation(&Vec3::basis(2), T::from_usize_lossy(k) * step))
        .collect()
}

/// `(f∘T₁ + … + f∘T_m) / m` at the grid nodes, each `T_k` an orthogonal map
/// fixing `e3`. Resampling uses the expansion of `f`.
pub fn finite_average<T: Real>(f: &SphericalFunction<T>, rotations: &[Mat3<T>]) -> Result<SphericalFunction<T>> {
    let c = f.evaluator()?;
    if rotations.is_empty() {
        return Err(Error::InvalidArgument("no rotations".into()));
    }
    let tol = T::c(1e-12);
    for r in rotations {
        let fixed = (r.apply(&Vec3::basis(2)) - Vec3::basis(2)).norm();
        let defect = r.orthogonality_defect().max(fixed);
        if defect > tol {
            return Err(Error::RotationNotAxial {
                defect: defect.to_f64_lossy(),
            });
        }
    }
    let m = T::from_usize_lossy(rotations.len());
    let values = f
        .grid()
        .nodes()
        .iter()
        .map(|x| {
            let terms: Vec<T> = rotations.iter().map(|r| c.eval(&r.apply(x))).collect();
            pairwise_sum(&terms) / m
        })
        .collect();
    Ok(SphericalFunction {
        grid: f.grid().clone(),
        values,
        coeffs: None,
        parity: Parity::None,
    })
}

/// `(∫|f|^p)^{1/p}` by grid quadrature.
pub fn lp_norm<T: Real>(f: &SphericalFunction<T>, p: T) -> Result<T> {
    if !(p >= T::one()) {
        return Err(Error::InvalidArgument(format!("p must be >= 1, got {p}")));
    }
    let powered: Vec<T> = f.values().iter().map(|v| v.abs().powf(p)).collect();
    Ok(f.grid().integrate(&powered)?.powf(T::one() / p))
}

/// L² distance between two functions on the same grid.
pub fn l2_distance<T: Real>(f: &SphericalFunction<T>, g: &SphericalFunction<T>) -> Result<T> {
    let d: Vec<T> = f
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .collect();
    Ok(f.grid().integrate(&d)?.sqrt())
}

/// Legendre interpolant through ring values of a zonal function, so it can
/// be evaluated at any `z = cos θ`.
#[derive(Clone, Debug)]
pub struct ZonalProfile<T> {
    coeffs: Vec<T>,
}

impl<T: Real> ZonalProfile<T> {
    /// From a function constant on rings (first value of each ring is used).
    pub fn from_rings(f: &SphericalFunction<T>) -> Self {
        let grid = f.grid();
        let n = grid.n_theta();
        let (_, w) = gauss_legendre::<T>(n);
        // rings are stored north first, GL weights ascending in z
        let samples: Vec<(T, T, T)> = grid
            .rings()
            .iter()
            .enumerate()
            .map(|(i, r)| (r.cos_theta, w[n - 1 - i], f.values()[r.start]))
            .collect();
        let coeffs = (0..n)
            .map(|l| {
                let terms: Vec<T> = samples.iter().map(|(z, wi, v)| *wi * *v * legendre_p(l, *z)).collect();
                pairwise_sum(&terms) * T::from_usize_lossy(2 * l + 1) * T::half()
            })
            .collect();
        ZonalProfile { coeffs }
    }

    pub fn eval(&self, z: T) -> T {
        let (mut p0, mut p1) = (T::one(), z);
        let mut s = self.coeffs[0];
        if self.coeffs.len() > 1 {
            s = s + self.coeffs[1] * z;
        }
        for l in 2..self.coeffs.len() {
            let lf = T::from_usize_lossy(l);
            let p2 = ((T::two() * lf - T::one()) * z * p1 - (lf - T::one()) * p0) / lf;
            s = s + self.coeffs[l] * p2;
            p0 = p1;
            p1 = p2;
        }
        s
    }
}

/// `∫₋₁¹ ∫₀^{√(1−t²)} r √(r²+t²) · Sr(f)(t/√(r²+t²)) dr dt`, evaluated in polar
/// coordinates `r = ρ sin θ`, `t = ρ cos θ` where the integrand becomes
/// `ρ³ sin θ · Sr(f)(cos θ)`.
pub fn sr_double_integral<T: Real>(profile: &ZonalProfile<T>, n_theta: usize) -> T {
    let (rho, w_rho) = gauss_legendre_interval(3, T::zero(), T::one());
    let radial: Vec<T> = rho.iter().zip(&w_rho).map(|(r, w)| *w * *r * *r * *r).collect();
    let radial = pairwise_sum(&radial);
    let (th, w_th) = gauss_legendre_interval(n_theta, T::zero(), T::PI());
    let ang: Vec<T> = th
        .iter()
        .zip(&w_th)
        .map(|(t, w)| *w * t.sin() * profile.eval(t.cos()))
        .collect();
    radial * pairwise_sum(&ang)
}

/// Both sides of the n = 3 L¹ identity: `(8π · double integral, ‖f‖₁)`.
pub fn sr_l1_identity<T: Real>(f: &SphericalFunction<T>) -> Result<(T, T)> {
    let sr = radial_symmetrize(f, &Vec3::basis(2))?;
    let profile = ZonalProfile::from_rings(&sr);
    let lhs = T::c(8.0) * T::PI() * sr_double_integral(&profile, 128);
    Ok((lhs, lp_norm(f, T::one())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(nt: usize, np: usize) -> Arc<SphericalGrid<f64>> {
        Arc::new(SphericalGrid::new(nt, np).unwrap())
    }

    #[test]
    fn cosine_of_constant_is_two_pi() {
        let g = grid(16, 32);
        let one = SphericalFunction::band_limited(g.clone(), &vec![1.0; g.len()], 4).unwrap();
        let c = cosine_transform(&one);
        assert!(c.values().iter().all(|v| (v - 2.0 * PI).abs() < 1e-12));
        let plain = cosine_transform_plain(&SphericalFunction::from_values(g.clone(), vec![1.0; g.len()]).unwrap());
        assert!(plain.values().iter().all(|v| (v - 2.0 * PI).abs() < 1e-2));
    }

    #[test]
    fn isotropy_of_x1_squared() {
        let r = section_isotropy_tensor(&|x: &Vec3<f64>| x.x() * x.x(), &Vec3::basis(2), 256).unwrap();
        assert!((r.t.a - 3.0 * PI / 4.0).abs() < 1e-13);
        assert!((r.t.c - PI / 4.0).abs() < 1e-13);
        assert!(r.t.b.abs() < 1e-13);
        assert!((r.deviation - 2f64.sqrt() / 4.0).abs() < 1e-13);
        let ones = section_isotropy_tensor(&|_: &Vec3<f64>| 1.0, &Vec3::new(0.6, 0.0, 0.8), 64).unwrap();
        assert!(ones.deviation < 1e-15);
        assert!(ones.to_json().starts_with("{\"u\":["));
    }

    #[test]
    fn symmetrize_x1_is_zero() {
        let g = grid(8, 16);
        let f = SphericalFunction::from_fn(g.clone(), |x| x.x());
        let s = radial_symmetrize(&f, &Vec3::basis(2)).unwrap();
        assert!(s.values().iter().all(|v| v.abs() < 1e-15));
        assert!(matches!(
            radial_symmetrize(&f, &Vec3::basis(0)),
            Err(Error::AxisMismatch)
        ));
    }

    #[test]
    fn lp_norm_of_one() {
        let g = grid(8, 16);
        let f = SphericalFunction::from_values(g.clone(), vec![1.0; g.len()]).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap() - (4.0 * PI).sqrt()).abs() < 1e-13);
        assert!(lp_norm(&f, 0.5).is_err());
    }

    #[test]
    fn sr_identity_for_constant() {
        let profile = ZonalProfile { coeffs: vec![1.0f64] };
        assert!((sr_double_integral(&profile, 128) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn finite_average_rejects_tilted_rotation() {
        let g = grid(8, 16);
        let f = SphericalFunction::from_coeffs(g, HarmonicCoeffs::from_fn(3, |l, _| l as f64));
        let tilt = Mat3::rotation(&Vec3::basis(0), 0.1);
        assert!(matches!(
            finite_average(&f, &[tilt]),
            Err(Error::RotationNotAxial { .. })
        ));
    }
}

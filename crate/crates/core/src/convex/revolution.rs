//! Convex bodies of revolution about `e3`, symmetric in the equator:
//! `{(x, z) : |x| ≤ d, |z| ≤ φ(|x|)}` with `φ` concave and non-increasing.
//!
//! The profile is parametrized by `ρ = d·sin θ`, `θ ∈ [0, π/2]`, and
//! interpolated in `θ` on Chebyshev–Lobatto nodes. The substitution removes
//! the square-root singularity that a rounded rim has in `ρ`.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonics::analyze;
use crate::linalg::Vec3;
use crate::scalar::{pairwise_sum_by, Real};
use crate::sphere::{gauss_legendre_interval, Cap, SphericalGrid};

use super::{radii, support_point, SupportFunction, SupportModel};

const STRIP_NODES: usize = 64;
const BISECTION_STEPS: usize = 80;

#[derive(Clone, Debug)]
pub struct RevolutionBody<T> {
    d: T,
    /// Ascending `θ` samples and the projected profile values there.
    theta: Vec<T>,
    phi: Vec<T>,
    cheb: Vec<T>,
    dcheb: Vec<T>,
    ddcheb: Vec<T>,
}

/// Chebyshev coefficients from values at `x_j = cos(πj/N)`.
fn chebyshev_coeffs<T: Real>(f: &[T]) -> Vec<T> {
    let n = f.len() - 1;
    let nn = T::from_usize_lossy(n);
    (0..=n)
        .map(|k| {
            let s = pairwise_sum_by(n + 1, &|j| {
                let w = if j == 0 || j == n { T::half() } else { T::one() };
                w * f[j] * (T::PI() * T::from_usize_lossy(j * k) / nn).cos()
            });
            let a = s * T::two() / nn;
            if k == 0 || k == n {
                a * T::half()
            } else {
                a
            }
        })
        .collect()
}

fn chebyshev_derivative<T: Real>(a: &[T]) -> Vec<T> {
    let n = a.len() - 1;
    let mut b = vec![T::zero(); n + 1];
    if n == 0 {
        return b;
    }
    b[n - 1] = T::two() * T::from_usize_lossy(n) * a[n];
    for k in (1..n).rev() {
        let next = if k < n { b[k + 1] } else { T::zero() };
        b[k - 1] = next + T::two() * T::from_usize_lossy(k) * a[k];
    }
    b[0] = b[0] * T::half();
    b
}

fn clenshaw<T: Real>(a: &[T], x: T) -> T {
    let (mut b1, mut b2) = (T::zero(), T::zero());
    for k in (1..a.len()).rev() {
        let b0 = T::two() * x * b1 - b2 + a[k];
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + a[0]
}

/// Non-increasing weighted isotonic fit (pool adjacent violators).
fn pav_non_increasing<T: Real>(values: &[T], weights: &[T]) -> Vec<T> {
    // blocks of (weighted mean, weight, count)
    let mut blocks: Vec<(T, T, usize)> = Vec::with_capacity(values.len());
    for (v, w) in values.iter().zip(weights) {
        blocks.push((*v, *w, 1));
        while blocks.len() > 1 {
            let (m1, w1, c1) = blocks[blocks.len() - 1];
            let (m0, w0, c0) = blocks[blocks.len() - 2];
            if m0 >= m1 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((m0 * w0 + m1 * w1) / (w0 + w1), w0 + w1, c0 + c1));
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, c)| std::iter::repeat_n(m, c))
        .collect()
}

impl<T: Real> RevolutionBody<T> {
    /// Sample `φ` at `ρ = d sin θ` on `n + 1` Chebyshev–Lobatto nodes in `θ`.
    ///
    /// Violations of concavity or monotonicity beyond rounding are rejected;
    /// what remains is removed by a monotone concave projection.
    pub fn from_fn<F: Fn(T) -> T>(d: T, phi: F, n: usize) -> Result<Self> {
        if !(d > T::zero()) || !d.is_finite() {
            return Err(Error::InvalidProfile(format!("radius d must be positive, got {d}")));
        }
        if n < 4 {
            return Err(Error::InvalidProfile("need at least 5 profile samples".into()));
        }
        let quarter_pi = T::FRAC_PI_4();
        let nn = T::from_usize_lossy(n);
        // ascending θ: j = n..0 of x_j = cos(πj/n)
        let theta: Vec<T> = (0..=n)
            .map(|k| {
                let j = n - k;
                if k == n {
                    T::FRAC_PI_2()
                } else {
                    quarter_pi * (T::one() + (T::PI() * T::from_usize_lossy(j) / nn).cos())
                }
            })
            .collect();
        let rho: Vec<T> = theta
            .iter()
            .map(|t| if *t == T::FRAC_PI_2() { d } else { d * t.sin() })
            .collect();
        let raw: Vec<T> = rho.iter().map(|r| phi(*r)).collect();
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("profile values must be finite".into()));
        }
        let scale = raw.iter().fold(T::one(), |a, v| a.max(v.abs()));
        let dr: Vec<T> = rho.windows(2).map(|w| w[1] - w[0]).collect();
        let slopes: Vec<T> = raw.windows(2).zip(&dr).map(|(w, h)| (w[1] - w[0]) / *h).collect();
        for (k, w) in raw.windows(2).enumerate() {
            if w[1] - w[0] > T::c(1e-12) * scale {
                return Err(Error::InvalidProfile(format!(
                    "profile increases near rho = {}",
                    rho[k + 1]
                )));
            }
        }
        for (k, s) in slopes.windows(2).enumerate() {
            if s[1] - s[0] > T::c(1e-10) * T::one().max(s[0].abs()) {
                return Err(Error::InvalidProfile(format!(
                    "profile is not concave near rho = {}",
                    rho[k + 1]
                )));
            }
        }
        let fitted: Vec<T> = pav_non_increasing(&slopes, &dr)
            .into_iter()
            .map(|s| s.min(T::zero()))
            .collect();
        let values = if fitted == slopes {
            raw
        } else {
            let mut v = Vec::with_capacity(n + 1);
            v.push(raw[0]);
            for (s, h) in fitted.iter().zip(&dr) {
                let prev = *v.last().expect("non-empty");
                v.push(prev + *s * *h);
            }
            v
        };
        if values[n] < T::zero() {
            return Err(Error::InvalidProfile(format!(
                "profile is negative at the rim: {}",
                values[n]
            )));
        }
        // Chebyshev ordering is descending in θ
        let cheb_vals: Vec<T> = values.iter().rev().copied().collect();
        let cheb = chebyshev_coeffs(&cheb_vals);
        let dcheb = chebyshev_derivative(&cheb);
        let ddcheb = chebyshev_derivative(&dcheb);
        Ok(RevolutionBody {
            d,
            theta,
            phi: values,
            cheb,
            dcheb,
            ddcheb,
        })
    }

    pub fn d(&self) -> T {
        self.d
    }

    pub fn rim_height(&self) -> T {
        self.phi[self.phi.len() - 1]
    }

    pub fn apex_height(&self) -> T {
        self.phi[0]
    }

    /// `(ρ, φ(ρ))` samples after projection, ascending in `ρ`.
    pub fn samples(&self) -> Vec<(T, T)> {
        self.theta
            .iter()
            .zip(&self.phi)
            .map(|(t, p)| (self.d * t.sin(), *p))
            .collect()
    }

    /// Largest slope increase and largest value increase between samples.
    pub fn invariant_defects(&self) -> (T, T) {
        let s = self.samples();
        let slopes: Vec<T> = s.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        let concave = slopes.windows(2).fold(T::zero(), |a, w| a.max(w[1] - w[0]));
        let mono = s.windows(2).fold(T::zero(), |a, w| a.max(w[1].1 - w[0].1));
        (concave, mono)
    }

    fn x_of(theta: T) -> T {
        theta * T::c(4.0) / T::PI() - T::one()
    }

    /// `φ̂(θ) = φ(d sin θ)`.
    pub fn phi_hat(&self, theta: T) -> T {
        clenshaw(&self.cheb, Self::x_of(theta))
    }

    fn dphi_hat(&self, theta: T) -> T {
        clenshaw(&self.dcheb, Self::x_of(theta)) * T::c(4.0) / T::PI()
    }

    fn ddphi_hat(&self, theta: T) -> T {
        let k = T::c(4.0) / T::PI();
        clenshaw(&self.ddcheb, Self::x_of(theta)) * k * k
    }

    /// `φ(ρ)` for `0 ≤ ρ ≤ d`.
    pub fn profile(&self, rho: T) -> T {
        let s = (rho / self.d).max(T::zero()).min(T::one());
        self.phi_hat(s.asin())
    }

    /// Vertical normal component on the upper surface at `θ`.
    fn normal_t(&self, theta: T) -> T {
        let c = theta.cos();
        if c < T::c(1e-6) {
            return self.rim_normal();
        }
        let dp = self.dphi_hat(theta);
        let dc = self.d * c;
        dc / (dc * dc + dp * dp).sqrt()
    }

    fn rim_flat_slope(&self) -> bool {
        self.dphi_hat(T::FRAC_PI_2()).abs() <= T::c(1e-8) * (self.d + self.apex_height().abs())
    }

    /// Upper end of the normal fan at the rim (0 for a rounded rim).
    pub fn rim_normal(&self) -> T {
        if self.rim_flat_slope() {
            let dd = self.ddphi_hat(T::FRAC_PI_2());
            self.d / (self.d * self.d + dd * dd).sqrt()
        } else {
            T::zero()
        }
    }

    /// Lower end of the normal fan at the apex (1 for a smooth top).
    pub fn apex_normal(&self) -> T {
        let dp = self.dphi_hat(T::zero());
        self.d / (self.d * self.d + dp * dp).sqrt()
    }

    /// `θ` on the upper surface whose normal has vertical component `t`.
    fn theta_of(&self, t: T) -> T {
        if t >= self.apex_normal() {
            return T::zero();
        }
        if t <= self.rim_normal() {
            return T::FRAC_PI_2();
        }
        let (mut lo, mut hi) = (T::zero(), T::FRAC_PI_2());
        for _ in 0..BISECTION_STEPS {
            let mid = (lo + hi) * T::half();
            if self.normal_t(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::half()
    }

    /// Support value at any unit vector with vertical component `t`.
    pub fn support_at(&self, t: T) -> T {
        let t = t.abs().min(T::one());
        let s = (T::one() - t * t).max(T::zero()).sqrt();
        if t <= self.rim_normal() {
            return self.d * s + self.rim_height() * t;
        }
        if t >= self.apex_normal() {
            return self.apex_height() * t;
        }
        let th = self.theta_of(t);
        self.d * th.sin() * s + self.phi_hat(th) * t
    }

    /// Area of the upper surface with normals in `[a, b] ⊂ [0, 1]`, atoms excluded.
    fn upper_strip(&self, a: T, b: T) -> T {
        if b <= a {
            return T::zero();
        }
        let (th_lo, th_hi) = (self.theta_of(b), self.theta_of(a));
        if th_hi <= th_lo {
            return T::zero();
        }
        let (x, w) = gauss_legendre_interval::<T>(STRIP_NODES, th_lo, th_hi);
        let d = self.d;
        T::tau()
            * pairwise_sum_by(x.len(), &|k| {
                let th = x[k];
                let dc = d * th.cos();
                let dp = self.dphi_hat(th);
                w[k] * d * th.sin() * (dc * dc + dp * dp).sqrt()
            })
    }

    /// Lateral wall at `t = 0`, area `4π d φ(d)`.
    pub fn wall_atom(&self) -> Option<(T, T)> {
        let h = self.rim_height();
        (h > T::zero()).then(|| (T::zero(), T::c(4.0) * T::PI() * self.d * h))
    }

    /// Surface area with normals in `[lo, hi] ⊂ [−1, 1]`, wall included when
    /// `lo ≤ 0 ≤ hi`.
    pub fn mass_between(&self, lo: T, hi: T) -> T {
        let z = T::zero();
        let mut m = self.upper_strip(lo.max(z), hi.max(z)) + self.upper_strip((-hi).max(z), (-lo).max(z));
        if let Some((t, a)) = self.wall_atom() {
            if lo <= t && t <= hi {
                m = m + a;
            }
        }
        m
    }

    pub fn total_area(&self) -> T {
        self.mass_between(-T::one(), T::one())
    }
}

/// Band masses of a zonal measure on `t = ⟨u, e3⟩ ∈ [−1, 1]`.
///
/// Band `k` is `[edges[k], edges[k+1])`, the last one closed. `atoms` are
/// singular masses; `fans` are normal-cone intervals at corners, which carry
/// no area and are listed for diagnostics only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZonalMeasure<T> {
    pub edges: Vec<T>,
    pub masses: Vec<T>,
    pub atoms: Vec<(T, T)>,
    pub fans: Vec<(T, T)>,
}

fn check_edges<T: Real>(edges: &[T]) -> Result<()> {
    let ok = edges.len() >= 2
        && edges[0] == -T::one()
        && edges[edges.len() - 1] == T::one()
        && edges.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "band edges must increase strictly from -1 to 1".into(),
        ))
    }
}

impl<T: Real> ZonalMeasure<T> {
    pub fn bands(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.edges.windows(2).zip(&self.masses).map(|(w, m)| (w[0], w[1], *m))
    }

    pub fn total(&self) -> T {
        self.masses.iter().fold(T::zero(), |a, b| a + *b)
    }

    /// CSV dump: `t_lo,t_hi,mass` rows, then `atom_t,atom_mass` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t_lo,t_hi,mass")?;
        for (lo, hi, m) in self.bands() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", lo, hi, m)?;
        }
        writeln!(out, "atom_t,atom_mass")?;
        for (t, m) in &self.atoms {
            writeln!(out, "{:.16e},{:.16e}", t, m)?;
        }
        Ok(())
    }
}

fn band_index<T: Real>(edges: &[T], t: T) -> usize {
    let n = edges.len() - 1;
    (0..n).find(|&k| t < edges[k + 1]).unwrap_or(n - 1)
}

/// Band masses of the surface area measure of `body`.
pub fn surface_area_measure_zonal<T: Real>(body: &RevolutionBody<T>, edges: &[T]) -> Result<ZonalMeasure<T>> {
    check_edges(edges)?;
    let z = T::zero();
    let mut masses: Vec<T> = edges
        .windows(2)
        .map(|w| body.upper_strip(w[0].max(z), w[1].max(z)) + body.upper_strip((-w[1]).max(z), (-w[0]).max(z)))
        .collect();
    let atoms: Vec<(T, T)> = body.wall_atom().into_iter().collect();
    for (t, m) in &atoms {
        let k = band_index(edges, *t);
        masses[k] = masses[k] + *m;
    }
    let mut fans = Vec::new();
    let rim = body.rim_normal();
    if rim > z {
        fans.push((-rim, rim));
    }
    let apex = body.apex_normal();
    if apex < T::one() {
        fans.push((-T::one(), -apex));
        fans.push((apex, T::one()));
    }
    Ok(ZonalMeasure {
        edges: edges.to_vec(),
        masses,
        atoms,
        fans,
    })
}

fn check_cap<T: Real>(cap: &Cap<T>) -> Result<T> {
    let off_axis = (cap.center - Vec3::basis(2)).norm();
    let a = cap.height;
    if off_axis > T::c(1e-12) || !(a > T::c(1e-9)) || !(a < T::one()) {
        return Err(Error::CapNotAdmissible);
    }
    Ok(a)
}

fn meridian<T: Real>(t: T) -> Vec3<T> {
    Vec3::new((T::one() - t * t).max(T::zero()).sqrt(), T::zero(), t)
}

/// `μ(ω) = S(K, ω ∩ U) + S(K, (−ω) ∩ U)` on bands, for a body `K` that is
/// rotationally symmetric about `e3` and smooth over `U = cap(e3, a)`.
pub fn cap_measure<T: Real, S: SupportModel<T> + ?Sized>(
    source: &S,
    cap: &Cap<T>,
    edges: &[T],
) -> Result<ZonalMeasure<T>> {
    let a = check_cap(cap)?;
    check_edges(edges)?;
    let s_u = |lo: T, hi: T| {
        let (lo, hi) = (lo.max(a), hi.min(T::one()));
        if hi <= lo {
            return T::zero();
        }
        let (x, w) = gauss_legendre_interval::<T>(STRIP_NODES, lo, hi);
        T::tau()
            * pairwise_sum_by(x.len(), &|k| {
                let r = radii(source, &meridian(x[k]));
                w[k] * r.r1 * r.r2
            })
    };
    let masses = edges.windows(2).map(|w| s_u(w[0], w[1]) + s_u(-w[1], -w[0])).collect();
    Ok(ZonalMeasure {
        edges: edges.to_vec(),
        masses,
        atoms: Vec::new(),
        fans: Vec::new(),
    })
}

#[derive(Clone, Debug)]
pub struct MinkowskiSolution<T> {
    pub body: RevolutionBody<T>,
    pub measure: ZonalMeasure<T>,
    /// Largest relative band error against `μ`.
    pub max_rel_band_error: T,
    /// Surface area of the solution with normals in `[−a, a]`.
    pub mass_outside: T,
}

/// The symmetric body of revolution whose surface area measure is `μ`,
/// built from the part of `source`'s boundary with normals in `U`.
///
/// The meridian of that boundary piece is lowered so its rim sits at height
/// 0 and reflected in the equator.
pub fn minkowski_solve_revolution<T: Real, S: SupportModel<T> + ?Sized>(
    mu: &ZonalMeasure<T>,
    source: &S,
    cap: &Cap<T>,
    samples: usize,
) -> Result<MinkowskiSolution<T>> {
    let a = check_cap(cap)?;
    let point = |t: T| support_point(source, &meridian(t));
    let rim = point(a);
    let d = rim.x();
    let top = point(T::one());
    if !(d > T::c(1e-12)) || top.z() - rim.z() <= T::c(1e-12) * d {
        return Err(Error::Cylinder);
    }
    let height = |rho: T| {
        if rho >= d {
            return T::zero();
        }
        // ρ(t) decreases from d at t = a to 0 at t = 1
        let (mut lo, mut hi) = (a, T::one());
        for _ in 0..BISECTION_STEPS {
            let mid = (lo + hi) * T::half();
            if point(mid).x() > rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        point((lo + hi) * T::half()).z() - rim.z()
    };
    let body = RevolutionBody::from_fn(d, height, samples)?;
    let measure = surface_area_measure_zonal(&body, &mu.edges)?;
    let floor = T::c(1e-12) * mu.total().max(T::c(1e-300));
    let max_rel_band_error = measure
        .masses
        .iter()
        .zip(&mu.masses)
        .map(|(m, target)| (*m - *target).abs() / target.max(floor))
        .fold(T::zero(), T::max);
    let mass_outside = body.mass_between(-a, a);
    Ok(MinkowskiSolution {
        body,
        measure,
        max_rel_band_error,
        mass_outside,
    })
}

/// Band-`band` support function of the body, analysed on `grid`.
pub fn profile_to_support<T: Real>(
    body: &RevolutionBody<T>,
    grid: Arc<SphericalGrid<T>>,
    band: usize,
) -> Result<SupportFunction<T>> {
    let mut values = Vec::with_capacity(grid.len());
    for ring in grid.rings() {
        let h = body.support_at(ring.cos_theta);
        values.extend(std::iter::repeat_n(h, ring.len));
    }
    let c = analyze(&grid, &values, band)?;
    SupportFunction::from_coeffs(grid, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{Ball, Lens};
    use std::f64::consts::PI;

    fn ball() -> RevolutionBody<f64> {
        RevolutionBody::from_fn(1.0, |r: f64| (1.0 - r * r).max(0.0).sqrt(), 64).unwrap()
    }

    #[test]
    fn chebyshev_derivative_of_polynomial() {
        // f = x³ on Lobatto nodes
        let n = 8;
        let f: Vec<f64> = (0..=n).map(|j| (PI * j as f64 / n as f64).cos().powi(3)).collect();
        let a = chebyshev_coeffs(&f);
        let da = chebyshev_derivative(&a);
        for x in [-0.7, 0.1, 0.9] {
            assert!((clenshaw(&a, x) - x * x * x).abs() < 1e-14);
            assert!((clenshaw(&da, x) - 3.0 * x * x).abs() < 1e-13);
        }
    }

    #[test]
    fn pav_pools_violators() {
        let out = pav_non_increasing(&[3.0, 1.0, 2.0, 0.0], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(out, vec![3.0, 1.5, 1.5, 0.0]);
    }

    #[test]
    fn ball_profile() {
        let b = ball();
        for t in [0.0, 0.3, 0.77, 1.0] {
            assert!((b.support_at(t) - 1.0).abs() < 1e-12);
        }
        assert!((b.total_area() - 4.0 * PI).abs() < 1e-10);
        assert!((b.mass_between(0.5, 1.0) - PI).abs() < 1e-10);
        assert!(b.wall_atom().is_none());
    }

    #[test]
    fn rejects_non_concave() {
        let r = RevolutionBody::from_fn(1.0, |r: f64| 1.0 - r.sqrt(), 32);
        assert!(matches!(r, Err(Error::InvalidProfile(_))));
        let r = RevolutionBody::from_fn(1.0, |r: f64| r, 32);
        assert!(matches!(r, Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn lens_from_ball_and_cap() {
        let edges: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let u = Cap::new(Vec3::basis(2), 0.5);
        let mu = cap_measure(&Ball::new(1.0), &u, &edges).unwrap();
        let sol = minkowski_solve_revolution(&mu, &Ball::new(1.0), &u, 64).unwrap();
        assert!(sol.max_rel_band_error < 1e-6, "{}", sol.max_rel_band_error);
        assert!(sol.mass_outside < 1e-12);
        assert!((sol.body.d() - 0.75f64.sqrt()).abs() < 1e-12);
        assert!((sol.body.rim_normal() - 0.5).abs() < 1e-8);
        let lens = Lens::new(1.0, 0.5);
        for k in 0..=20 {
            let t = k as f64 / 20.0;
            let exact = lens.value(&meridian(t));
            assert!((sol.body.support_at(t) - exact).abs() < 1e-10, "t={t}");
        }
        assert_eq!(sol.measure.fans.len(), 1);
    }

    #[test]
    fn equator_cap_rejected() {
        let edges = vec![-1.0, 0.0, 1.0];
        let u = Cap::new(Vec3::basis(2), 0.0);
        assert!(matches!(
            cap_measure(&Ball::new(1.0), &u, &edges),
            Err(Error::CapNotAdmissible)
        ));
    }
}

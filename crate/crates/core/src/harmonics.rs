//! Real spherical harmonics, Funk–Hecke multipliers and spectral transforms.
//!
//! Convention: fully normalized (`∫ Y_lm² dH² = 1`), no Condon–Shortley
//! phase,
//!
//! ```text
//! Y_l0  = Q_l0(z)
//! Y_lm  = √2 · Q_lm(z) · Re (x + iy)^m      (m > 0)
//! Y_l-m = √2 · Q_lm(z) · Im (x + iy)^m
//! ```
//!
//! where `Q_lm = P̄_l^m / sin^m θ` is a polynomial in `z`. The product form is
//! a polynomial on R³, so gradients and Hessians come out analytically and
//! without pole singularities.

use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{Jet, Mat3, Vec3};
use crate::scalar::{pairwise_sum, Real};
use crate::sphere::{gauss_legendre_interval, Cap, SphereFn, SphericalGrid};
use crate::transforms::SphericalFunction;

/// Flat index of `(l, m)`.
#[inline]
pub fn lm_index(l: usize, m: i64) -> usize {
    idx(l, m)
}

/// Three-term recurrence constants for `Q_lm`, shared between coefficient
/// tables of the same band.
#[derive(Debug)]
struct Recurrence<T> {
    band: usize,
    /// `c_m = Q_mm`.
    diag: Vec<T>,
    /// `a_lm` and `a_lm / a_{l-1,m}` in triangular layout, row `m`.
    a: Vec<Vec<T>>,
    b: Vec<Vec<T>>,
}

impl<T: Real> Recurrence<T> {
    fn new(band: usize) -> Self {
        let mut diag = Vec::with_capacity(band + 1);
        let mut c = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        let mut a = Vec::with_capacity(band + 1);
        let mut b = Vec::with_capacity(band + 1);
        for m in 0..=band {
            if m > 0 {
                c *= ((2 * m + 1) as f64 / (2 * m) as f64).sqrt();
            }
            diag.push(T::c(c));
            let alm = |l: usize| -> f64 {
                let (l, m) = (l as f64, m as f64);
                ((4.0 * l * l - 1.0) / (l * l - m * m)).sqrt()
            };
            let mut row_a = Vec::new();
            let mut row_b = Vec::new();
            for l in m + 1..=band {
                let al = alm(l);
                row_a.push(T::c(al));
                row_b.push(if l >= m + 2 { T::c(al / alm(l - 1)) } else { T::zero() });
            }
            a.push(row_a);
            b.push(row_b);
        }
        Recurrence { band, diag, a, b }
    }

    /// `Q_lm(z)` for `l = m..=band`, written into `out[l - m]`.
    fn column(&self, m: usize, z: T, out: &mut Vec<T>) {
        out.clear();
        let mut q2 = T::zero();
        let mut q1 = self.diag[m];
        out.push(q1);
        for k in 0..self.band - m {
            let q = self.a[m][k] * z * q1 - self.b[m][k] * q2;
            out.push(q);
            q2 = q1;
            q1 = q;
        }
    }

    /// `Q_lm` with first and second `z`-derivatives.
    fn column_jet(&self, m: usize, z: T, out: &mut Vec<[T; 3]>) {
        out.clear();
        let zero = T::zero();
        let mut p2 = [zero; 3];
        let mut p1 = [self.diag[m], zero, zero];
        out.push(p1);
        for k in 0..self.band - m {
            let (a, b) = (self.a[m][k], self.b[m][k]);
            let q = [
                a * z * p1[0] - b * p2[0],
                a * (p1[0] + z * p1[1]) - b * p2[1],
                a * (T::two() * p1[1] + z * p1[2]) - b * p2[2],
            ];
            out.push(q);
            p2 = p1;
            p1 = q;
        }
    }
}

/// Band-limited real spherical-harmonic coefficients `c[l][m]`,
/// `0 ≤ l ≤ L`, `-l ≤ m ≤ l`, stored at `l² + l + m`.
#[derive(Clone, Debug)]
pub struct HarmonicCoeffs<T> {
    band: usize,
    data: Vec<T>,
    rec: Arc<Recurrence<T>>,
}

impl<T: Real> PartialEq for HarmonicCoeffs<T> {
    fn eq(&self, o: &Self) -> bool {
        self.band == o.band && self.data == o.data
    }
}

impl<T: Real> HarmonicCoeffs<T> {
    pub fn zeros(band: usize) -> Self {
        HarmonicCoeffs {
            band,
            data: vec![T::zero(); (band + 1) * (band + 1)],
            rec: Arc::new(Recurrence::new(band)),
        }
    }

    pub fn from_vec(band: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != (band + 1) * (band + 1) {
            return Err(Error::ShapeMismatch {
                expected: (band + 1) * (band + 1),
                got: data.len(),
            });
        }
        let mut c = Self::zeros(band);
        c.data = data;
        Ok(c)
    }

    pub fn from_fn<F: FnMut(usize, i64) -> T>(band: usize, mut f: F) -> Self {
        let mut c = Self::zeros(band);
        for l in 0..=band {
            for m in -(l as i64)..=l as i64 {
                c.data[idx(l, m)] = f(l, m);
            }
        }
        c
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn get(&self, l: usize, m: i64) -> T {
        if l > self.band || m.unsigned_abs() as usize > l {
            return T::zero();
        }
        self.data[idx(l, m)]
    }

    pub fn set(&mut self, l: usize, m: i64, v: T) {
        assert!(
            l <= self.band && m.unsigned_abs() as usize <= l,
            "({l}, {m}) out of range"
        );
        self.data[idx(l, m)] = v;
    }

    /// Iterate `(l, m, value)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, T)> + '_ {
        (0..=self.band).flat_map(move |l| (-(l as i64)..=l as i64).map(move |m| (l, m, self.data[idx(l, m)])))
    }

    /// Copy into a table of a different band limit (truncate or zero-pad).
    pub fn with_band(&self, band: usize) -> Self {
        Self::from_fn(band, |l, m| self.get(l, m))
    }

    pub fn norm(&self) -> T {
        pairwise_sum(&self.data.iter().map(|v| *v * *v).collect::<Vec<_>>()).sqrt()
    }

    /// `‖odd-degree part‖ / ‖all‖` (0 for the zero table).
    pub fn odd_fraction(&self) -> T {
        let total = self.norm();
        if total == T::zero() {
            return T::zero();
        }
        let odd: Vec<T> = self
            .iter()
            .filter(|(l, _, _)| l % 2 == 1)
            .map(|(_, _, v)| v * v)
            .collect();
        pairwise_sum(&odd).sqrt() / total
    }

    pub fn has_odd(&self) -> bool {
        self.iter().any(|(l, _, v)| l % 2 == 1 && v != T::zero())
    }

    pub fn has_even(&self) -> bool {
        self.iter().any(|(l, _, v)| l % 2 == 0 && v != T::zero())
    }

    /// Multiply each degree-`l` block by `f(l)`.
    pub fn scale_degrees<F: Fn(usize) -> T>(&self, f: F) -> Self {
        let mut out = self.clone();
        for l in 0..=self.band {
            let s = f(l);
            for m in -(l as i64)..=l as i64 {
                out.data[idx(l, m)] = out.data[idx(l, m)] * s;
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        self.scale_degrees(|_| s)
    }

    /// `self + other`, at the larger band.
    pub fn add(&self, other: &Self) -> Self {
        let band = self.band.max(other.band);
        Self::from_fn(band, |l, m| self.get(l, m) + other.get(l, m))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let band = self.band.max(other.band);
        let mut worst = T::zero();
        for l in 0..=band {
            for m in -(l as i64)..=l as i64 {
                worst = worst.max((self.get(l, m) - other.get(l, m)).abs());
            }
        }
        worst
    }

    /// Spherical Laplacian, `Δ Y_l = −l(l+1) Y_l`.
    pub fn laplacian(&self) -> Self {
        self.scale_degrees(|l| -T::from_usize_lossy(l * (l + 1)))
    }

    /// Zonal part (m = 0 only).
    pub fn zonal_part(&self) -> Self {
        Self::from_fn(self.band, |l, m| if m == 0 { self.get(l, 0) } else { T::zero() })
    }

    /// Point evaluation of the polynomial extension at `x` (exact on S²).
    pub fn eval(&self, x: &Vec3<T>) -> T {
        let l_max = self.band;
        let (px, py, z) = (x.x(), x.y(), x.z());
        let sqrt2 = T::two().sqrt();
        let mut col = Vec::with_capacity(l_max + 1);
        let (mut re, mut im) = (T::one(), T::zero());
        let mut total = T::zero();
        for m in 0..=l_max {
            if m > 0 {
                let nre = re * px - im * py;
                im = re * py + im * px;
                re = nre;
            }
            self.rec.column(m, z, &mut col);
            let mut a = T::zero();
            let mut b = T::zero();
            for (k, q) in col.iter().enumerate() {
                let l = m + k;
                a = a + self.data[idx(l, m as i64)] * *q;
                if m > 0 {
                    b = b + self.data[idx(l, -(m as i64))] * *q;
                }
            }
            total = total + if m == 0 { a } else { sqrt2 * (a * re + b * im) };
        }
        total
    }

    /// Value, gradient and Hessian of the polynomial extension at `x`.
    pub fn jet(&self, x: &Vec3<T>) -> Jet<T> {
        let l_max = self.band;
        let (px, py, z) = (x.x(), x.y(), x.z());
        let sqrt2 = T::two().sqrt();
        let mut re = vec![T::one(); l_max + 1];
        let mut im = vec![T::zero(); l_max + 1];
        for k in 1..=l_max {
            re[k] = re[k - 1] * px - im[k - 1] * py;
            im[k] = re[k - 1] * py + im[k - 1] * px;
        }
        let mut col = Vec::with_capacity(l_max + 1);
        let mut v = T::zero();
        let mut g = [T::zero(); 3];
        let mut h = [[T::zero(); 3]; 3];
        for m in 0..=l_max {
            self.rec.column_jet(m, z, &mut col);
            let mut a = [T::zero(); 3];
            let mut b = [T::zero(); 3];
            for (k, q) in col.iter().enumerate() {
                let l = m + k;
                let ca = self.data[idx(l, m as i64)];
                let cb = if m > 0 {
                    self.data[idx(l, -(m as i64))]
                } else {
                    T::zero()
                };
                for d in 0..3 {
                    a[d] = a[d] + ca * q[d];
                    b[d] = b[d] + cb * q[d];
                }
            }
            if m == 0 {
                v = v + a[0];
                g[2] = g[2] + a[1];
                h[2][2] = h[2][2] + a[2];
                continue;
            }
            let mf = T::from_usize_lossy(m);
            let mm1 = T::from_usize_lossy(m * (m - 1));
            let (r1, i1) = (re[m - 1], im[m - 1]);
            let (r2, i2) = if m >= 2 {
                (re[m - 2], im[m - 2])
            } else {
                (T::zero(), T::zero())
            };
            // Re w^m = P, Im w^m = Q and their x/y derivatives
            let (p, px_, py_) = (re[m], mf * r1, -mf * i1);
            let (pxx, pxy, pyy) = (mm1 * r2, -mm1 * i2, -mm1 * r2);
            let (q, qx, qy) = (im[m], mf * i1, mf * r1);
            let (qxx, qxy, qyy) = (mm1 * i2, mm1 * r2, -mm1 * i2);
            let s = sqrt2;
            v = v + s * (a[0] * p + b[0] * q);
            g[0] = g[0] + s * (a[0] * px_ + b[0] * qx);
            g[1] = g[1] + s * (a[0] * py_ + b[0] * qy);
            g[2] = g[2] + s * (a[1] * p + b[1] * q);
            h[0][0] = h[0][0] + s * (a[0] * pxx + b[0] * qxx);
            h[0][1] = h[0][1] + s * (a[0] * pxy + b[0] * qxy);
            h[1][1] = h[1][1] + s * (a[0] * pyy + b[0] * qyy);
            h[0][2] = h[0][2] + s * (a[1] * px_ + b[1] * qx);
            h[1][2] = h[1][2] + s * (a[1] * py_ + b[1] * qy);
            h[2][2] = h[2][2] + s * (a[2] * p + b[2] * q);
        }
        h[1][0] = h[0][1];
        h[2][0] = h[0][2];
        h[2][1] = h[1][2];
        Jet {
            value: v,
            grad: Vec3(g),
            hess: Mat3(h),
        }
    }

    /// CSV dump `l,m,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "l,m,value")?;
        for (l, m, v) in self.iter() {
            writeln!(out, "{l},{m},{:.16e}", v.to_f64_lossy())?;
        }
        Ok(())
    }
}

#[inline]
fn idx(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

impl<T: Real> SphereFn<T> for HarmonicCoeffs<T> {
    fn eval(&self, x: &Vec3<T>) -> T {
        HarmonicCoeffs::eval(self, x)
    }
}

/// Evaluate at arbitrary points.
pub fn synthesize<T: Real>(coeffs: &HarmonicCoeffs<T>, points: &[Vec3<T>]) -> Vec<T> {
    points.iter().map(|x| coeffs.eval(x)).collect()
}

/// `cos(mφ_j)`, `sin(mφ_j)` tables, row `m`.
fn fourier_tables<T: Real>(grid: &SphericalGrid<T>, band: usize) -> (Vec<Vec<T>>, Vec<Vec<T>>) {
    let n_phi = grid.n_phi();
    let mut cos = Vec::with_capacity(band + 1);
    let mut sin = Vec::with_capacity(band + 1);
    for m in 0..=band {
        let (c, s): (Vec<T>, Vec<T>) = (0..n_phi)
            .map(|j| {
                let ang = std::f64::consts::TAU * ((m * j) % n_phi) as f64 / n_phi as f64;
                (T::c(ang.cos()), T::c(ang.sin()))
            })
            .unzip();
        cos.push(c);
        sin.push(s);
    }
    (cos, sin)
}

/// Normalized associated Legendre values `P̄_l^m(cos θ)` for one ring, row `m`.
fn ring_legendre<T: Real>(rec: &Recurrence<T>, z: T, s: T) -> Vec<Vec<T>> {
    let mut rows = Vec::with_capacity(rec.band + 1);
    let mut sm = T::one();
    for m in 0..=rec.band {
        if m > 0 {
            sm = sm * s;
        }
        let mut col = Vec::new();
        rec.column(m, z, &mut col);
        rows.push(col.into_iter().map(|q| q * sm).collect());
    }
    rows
}

/// Synthesis at every grid node, ring by ring.
pub fn synthesize_grid<T: Real>(coeffs: &HarmonicCoeffs<T>, grid: &SphericalGrid<T>) -> Vec<T> {
    let band = coeffs.band;
    let (cos, sin) = fourier_tables(grid, band);
    let sqrt2 = T::two().sqrt();
    let mut out = Vec::with_capacity(grid.len());
    for ring in grid.rings() {
        let p = ring_legendre(&coeffs.rec, ring.cos_theta, ring.sin_theta);
        let mut am = vec![T::zero(); band + 1];
        let mut bm = vec![T::zero(); band + 1];
        for m in 0..=band {
            for (k, pv) in p[m].iter().enumerate() {
                let l = m + k;
                am[m] = am[m] + coeffs.data[idx(l, m as i64)] * *pv;
                if m > 0 {
                    bm[m] = bm[m] + coeffs.data[idx(l, -(m as i64))] * *pv;
                }
            }
        }
        for j in 0..grid.n_phi() {
            let mut v = am[0];
            for m in 1..=band {
                v = v + sqrt2 * (am[m] * cos[m][j] + bm[m] * sin[m][j]);
            }
            out.push(v);
        }
    }
    out
}

/// L² projection onto degree ≤ `band`, exact for band-limited input when
/// `band <= grid.max_band()`.
pub fn analyze<T: Real>(grid: &SphericalGrid<T>, values: &[T], band: usize) -> Result<HarmonicCoeffs<T>> {
    grid.check_len(values.len())?;
    if band > grid.max_band() {
        return Err(Error::GridTooCoarse {
            n_theta: grid.n_theta(),
            n_phi: grid.n_phi(),
            band,
        });
    }
    let mut out = HarmonicCoeffs::zeros(band);
    let (cos, sin) = fourier_tables(grid, band);
    let sqrt2 = T::two().sqrt();
    for ring in grid.rings() {
        let f = &values[ring.indices()];
        let p = ring_legendre(&out.rec, ring.cos_theta, ring.sin_theta);
        for m in 0..=band {
            let a: Vec<T> = f.iter().zip(&cos[m]).map(|(v, c)| *v * *c).collect();
            let mut am = pairwise_sum(&a) * ring.node_weight;
            let mut bm = T::zero();
            if m > 0 {
                let b: Vec<T> = f.iter().zip(&sin[m]).map(|(v, s)| *v * *s).collect();
                bm = pairwise_sum(&b) * ring.node_weight * sqrt2;
                am = am * sqrt2;
            }
            for (k, pv) in p[m].iter().enumerate() {
                let l = m + k;
                let i = idx(l, m as i64);
                out.data[i] = out.data[i] + am * *pv;
                if m > 0 {
                    let j = idx(l, -(m as i64));
                    out.data[j] = out.data[j] + bm * *pv;
                }
            }
        }
    }
    Ok(out)
}

/// Legendre polynomial `P_l(t)`.
pub fn legendre_p<T: Real>(l: usize, t: T) -> T {
    let (mut p0, mut p1) = (T::one(), t);
    if l == 0 {
        return p0;
    }
    for k in 2..=l {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::two() * kf - T::one()) * t * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    /// `F(t) = |t|`
    Cosine,
    /// `F = δ(t)`, integration over the great circle `u⊥`.
    Funk,
}

/// `2π ∫ F(t) P_l(t) dt` for the kernel; odd degrees return exact 0.
pub fn funk_hecke_multiplier<T: Real>(kernel: Kernel, l: usize) -> T {
    T::c(multiplier_f64(kernel, l))
}

fn multiplier_f64(kernel: Kernel, l: usize) -> f64 {
    use std::f64::consts::PI;
    if l % 2 == 1 {
        return 0.0;
    }
    match kernel {
        Kernel::Cosine => {
            // 2π ∫|t| P_l = 4π ∫₀¹ t P_l(t) dt; integrand has degree l + 1
            let (x, w) = gauss_legendre_interval::<f64>(l / 2 + 2, 0.0, 1.0);
            let terms: Vec<f64> = x.iter().zip(&w).map(|(t, wi)| wi * t * legendre_p(l, *t)).collect();
            4.0 * PI * pairwise_sum(&terms)
        }
        Kernel::Funk => 2.0 * PI * legendre_p(l, 0.0),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierTable<T> {
    pub kernel: Kernel,
    pub lambda: Vec<T>,
}

impl<T: Real> MultiplierTable<T> {
    pub fn new(kernel: Kernel, band: usize) -> Self {
        MultiplierTable {
            kernel,
            lambda: (0..=band).map(|l| funk_hecke_multiplier(kernel, l)).collect(),
        }
    }

    /// CSV dump `l,lambda`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "l,lambda")?;
        for (l, v) in self.lambda.iter().enumerate() {
            writeln!(out, "{l},{:.16e}", v.to_f64_lossy())?;
        }
        Ok(())
    }
}

/// Odd-degree tolerance for spectral transforms, relative to the total norm.
pub const ODD_TOLERANCE: f64 = 1e-8;
/// Smallest multiplier magnitude accepted by the inversions.
pub const MULTIPLIER_FLOOR: f64 = 1e-12;
/// Hard band ceiling for inversion.
pub const INVERSION_CEILING: usize = 64;

fn require_even<T: Real>(c: &HarmonicCoeffs<T>) -> Result<()> {
    let frac = c.odd_fraction().to_f64_lossy();
    if frac > ODD_TOLERANCE {
        return Err(Error::OddContent { fraction: frac });
    }
    Ok(())
}

fn apply_multipliers<T: Real>(c: &HarmonicCoeffs<T>, kernel: Kernel) -> Result<HarmonicCoeffs<T>> {
    require_even(c)?;
    Ok(c.scale_degrees(|l| funk_hecke_multiplier(kernel, l)))
}

fn invert_multipliers<T: Real>(c: &HarmonicCoeffs<T>, kernel: Kernel) -> Result<HarmonicCoeffs<T>> {
    if c.band() > INVERSION_CEILING {
        return Err(Error::BandTooHigh {
            band: c.band(),
            ceiling: INVERSION_CEILING,
        });
    }
    require_even(c)?;
    for l in (0..=c.band()).step_by(2) {
        let lam = multiplier_f64(kernel, l);
        if lam.abs() <= MULTIPLIER_FLOOR {
            return Err(Error::MultiplierFloor { degree: l, value: lam });
        }
    }
    Ok(c.scale_degrees(|l| {
        if l % 2 == 1 {
            T::zero()
        } else {
            T::one() / funk_hecke_multiplier(kernel, l)
        }
    }))
}

pub fn cosine_transform_spectral<T: Real>(c: &HarmonicCoeffs<T>) -> Result<HarmonicCoeffs<T>> {
    apply_multipliers(c, Kernel::Cosine)
}

pub fn inverse_cosine_transform<T: Real>(g: &HarmonicCoeffs<T>) -> Result<HarmonicCoeffs<T>> {
    invert_multipliers(g, Kernel::Cosine)
}

pub fn funk_transform_spectral<T: Real>(c: &HarmonicCoeffs<T>) -> Result<HarmonicCoeffs<T>> {
    apply_multipliers(c, Kernel::Funk)
}

pub fn inverse_funk_transform<T: Real>(c: &HarmonicCoeffs<T>) -> Result<HarmonicCoeffs<T>> {
    invert_multipliers(c, Kernel::Funk)
}

/// Exact (un-truncated) plateau function
/// `v_U + (v_V − v_U) · χ(dist(x, V ∪ −V))`.
#[derive(Clone, Copy, Debug)]
pub struct PlateauSpec<T> {
    pub u: Cap<T>,
    pub v: Cap<T>,
    pub v_u: T,
    pub v_v: T,
    pub transition: T,
}

/// C^∞ ramp: 1 for `s ≤ 0`, 0 for `s ≥ 1`.
pub fn smooth_step_down<T: Real>(s: T) -> T {
    fn psi<T: Real>(x: T) -> T {
        if x <= T::zero() {
            T::zero()
        } else {
            (-T::one() / x).exp()
        }
    }
    if s <= T::zero() {
        return T::one();
    }
    if s >= T::one() {
        return T::zero();
    }
    let a = psi(T::one() - s);
    a / (a + psi(s))
}

impl<T: Real> PlateauSpec<T> {
    pub fn eval(&self, x: &Vec3<T>) -> T {
        if self.v_u == self.v_v {
            return self.v_u;
        }
        let d = self.v.distance_sym(x);
        self.v_u + (self.v_v - self.v_u) * smooth_step_down(d / self.transition)
    }

    /// Check the four caps `±U`, `±V` are pairwise `2·transition` apart.
    pub fn validate(&self) -> Result<()> {
        if !(self.transition > T::zero()) {
            return Err(Error::InvalidArgument("transition must be positive".into()));
        }
        let need = T::two() * self.transition * (T::one() - T::c(1e-12));
        for cap in [&self.u, &self.v] {
            let r = cap.angular_radius();
            let gap = T::PI() - T::two() * r;
            if gap <= T::zero() {
                return Err(Error::CapOverlapsAntipode {
                    radius: r.to_f64_lossy(),
                });
            }
            if gap < need {
                return Err(Error::CapsTooClose {
                    separation: gap.to_f64_lossy(),
                    required: need.to_f64_lossy(),
                });
            }
        }
        let sep = cap_separation(&self.u, &self.v);
        if sep < need {
            return Err(Error::CapsTooClose {
                separation: sep.to_f64_lossy(),
                required: need.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

/// Geodesic gap between `U ∪ −U` and `V ∪ −V` (negative when they overlap).
pub fn cap_separation<T: Real>(u: &Cap<T>, v: &Cap<T>) -> T {
    let c = u.center.dot(&v.center).abs().min(T::one());
    c.acos() - u.angular_radius() - v.angular_radius()
}

/// Plateau function with its band-limited truncation.
#[derive(Clone, Debug)]
pub struct Plateau<T> {
    pub spec: PlateauSpec<T>,
    /// Exact samples at the grid nodes.
    pub samples: SphericalFunction<T>,
    /// Band-`L` analysis of the samples.
    pub coeffs: HarmonicCoeffs<T>,
    /// `max |G_L − v_U|` over grid nodes in `U ∪ −U`.
    pub residual_u: T,
    /// `max |G_L − v_V|` over grid nodes in `V ∪ −V`.
    pub residual_v: T,
}

impl<T: Real> Plateau<T> {
    pub fn residual(&self) -> T {
        self.residual_u.max(self.residual_v)
    }

    /// The truncated function as an evaluable [`SphericalFunction`].
    pub fn truncated(&self) -> SphericalFunction<T> {
        SphericalFunction::from_coeffs(self.samples.grid().clone(), self.coeffs.clone())
    }
}

pub fn smooth_plateau<T: Real>(
    grid: &Arc<SphericalGrid<T>>,
    u: Cap<T>,
    v: Cap<T>,
    v_u: T,
    v_v: T,
    transition: T,
    band: usize,
) -> Result<Plateau<T>> {
    let spec = PlateauSpec {
        u,
        v,
        v_u,
        v_v,
        transition,
    };
    spec.validate()?;
    let samples = SphericalFunction::from_fn(grid.clone(), |x| spec.eval(x));
    let coeffs = analyze(grid, samples.values(), band)?;
    let trunc = synthesize_grid(&coeffs, grid);
    let mut residual_u = T::zero();
    let mut residual_v = T::zero();
    for (x, val) in grid.nodes().iter().zip(&trunc) {
        if u.contains_sym(x) {
            residual_u = residual_u.max((*val - v_u).abs());
        }
        if v.contains_sym(x) {
            residual_v = residual_v.max((*val - v_v).abs());
        }
    }
    Ok(Plateau {
        spec,
        samples,
        coeffs,
        residual_u,
        residual_v,
    })
}

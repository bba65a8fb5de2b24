//! Zonoids `Z(g)` with `h = C(g)` for an even density `g ≥ 0`, Weil's
//! formula for their area-measure densities at `n = 3`, the isotropic-section
//! diagnostics and the plateau counterexample.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::convex::SupportFunction;
use crate::error::{Error, Result};
use crate::harmonics::{
    cosine_transform_spectral, funk_hecke_multiplier, inverse_cosine_transform, smooth_plateau, synthesize,
    synthesize_grid, HarmonicCoeffs, Kernel, Plateau,
};
use crate::linalg::{least_squares, Vec3};
use crate::scalar::{pairwise_sum, Real};
use crate::sphere::{great_circle, Cap, SphereFn, SphericalGrid};
use crate::transforms::{funk_at, section_isotropy_tensor, SphericalFunction};

/// Most negative sample tolerated in a generating density.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Circle nodes for the single Weil integral.
pub const WEIL_M1: usize = 256;
/// Circle nodes per axis for the double Weil integral.
pub const WEIL_M2: usize = 128;

/// Dimension constants of Weil's formula.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DimensionConstants<T> {
    pub n: usize,
    /// `a_n = (∫|x₁| dH^{n−1})⁻¹`.
    pub a_n: T,
    /// Multiplier in `f^(1) = b_n R(g)`.
    pub b_n: T,
    /// Prefactor of the `j`-fold circle integral, `j = 1, 2`, fixed by the
    /// constant-density ball.
    pub prefactor: [T; 2],
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / k as f64 * unit_ball_volume(k - 2),
    }
}

impl<T: Real> DimensionConstants<T> {
    /// Printed form `2^{n−1}/(n−1)! · a_n^{n−j−1}` at `n = 3`.
    pub fn printed_prefactor(j: usize) -> T {
        let a = 1.0 / (2.0 * unit_ball_volume(2));
        T::c(2.0 * a.powi(2 - j as i32))
    }

    /// Calibrate on `g ≡ 1`, whose zonoid is the ball of radius `2π`, and
    /// check the result against the printed constants.
    pub fn three() -> Result<Self> {
        let tau = T::tau();
        let ones = |_: &Vec3<T>| T::one();
        let e3 = Vec3::basis(2);
        let raw1 = single_integral(&ones, &e3, WEIL_M1)?;
        let raw2 = double_integral(&ones, &e3, WEIL_M2)?;
        let prefactor = [tau / raw1, tau * tau / raw2];
        for (j, k) in prefactor.iter().enumerate() {
            let printed = Self::printed_prefactor(j + 1);
            if ((*k - printed) / printed).abs() > T::c(1e-10) {
                return Err(Error::InvalidArgument(format!(
                    "calibrated Weil prefactor {} disagrees with printed {} for j = {}",
                    k,
                    printed,
                    j + 1
                )));
            }
        }
        let a_n = T::c(1.0 / (2.0 * unit_ball_volume(2)));
        // f1 = k1 · π · R(g)
        let b_n = prefactor[0] * T::PI();
        Ok(DimensionConstants {
            n: 3,
            a_n,
            b_n,
            prefactor,
        })
    }
}

/// `∫∫ sin²(α−β) g(x(α)) dα dβ` over the circle `u⊥`; the `β` integral is `π`.
fn single_integral<T: Real, G: SphereFn<T> + ?Sized>(g: &G, u: &Vec3<T>, m: usize) -> Result<T> {
    let c = great_circle(u, m)?;
    let vals: Vec<T> = c.nodes().map(|x| g.eval(&x)).collect();
    Ok(T::PI() * pairwise_sum(&vals) * c.weight)
}

/// `∫∫ sin²(α−β) g(x(α)) g(x(β)) dα dβ` as a literal double sum.
fn double_integral<T: Real, G: SphereFn<T> + ?Sized>(g: &G, u: &Vec3<T>, m: usize) -> Result<T> {
    let c = great_circle(u, m)?;
    let vals: Vec<T> = c.nodes().map(|x| g.eval(&x)).collect();
    let sin2: Vec<T> = (0..m).map(|k| (c.angles[k]).sin().powi(2)).collect();
    let rows: Vec<T> = (0..m)
        .map(|a| {
            let row: Vec<T> = (0..m).map(|b| sin2[(a + m - b) % m] * vals[b]).collect();
            vals[a] * pairwise_sum(&row)
        })
        .collect();
    Ok(pairwise_sum(&rows) * c.weight * c.weight)
}

/// Zonoid with generating density `g` and support function `h = C(g)`.
#[derive(Clone, Debug)]
pub struct ZonoidSpec<T> {
    pub g: SphericalFunction<T>,
    pub h: SupportFunction<T>,
    pub constants: DimensionConstants<T>,
}

impl<T: Real> ZonoidSpec<T> {
    pub fn density(&self) -> &HarmonicCoeffs<T> {
        self.g.coeffs().expect("zonoid densities carry coefficients")
    }
}

/// Even-symmetrize `g`, check `g ≥ 0` at the nodes and form `h = C(g)`
/// through the Funk–Hecke multipliers.
pub fn make_zonoid<T: Real>(g: &SphericalFunction<T>) -> Result<ZonoidSpec<T>> {
    g.evaluator()?;
    let g = g.even_part()?;
    let min = g.values().iter().fold(T::infinity(), |a, v| a.min(*v));
    if min < -T::c(NEGATIVITY_TOLERANCE) {
        return Err(Error::NegativeDensity {
            min: min.to_f64_lossy(),
        });
    }
    let hc = cosine_transform_spectral(g.evaluator()?)?;
    let h = SupportFunction::from_coeffs(g.grid().clone(), hc)?;
    Ok(ZonoidSpec {
        g,
        h,
        constants: DimensionConstants::three()?,
    })
}

/// `f^(j)_{Z(g)}(u)` by Weil's formula on the circle `u⊥` with `m` nodes
/// (per axis for `j = 2`).
pub fn weil_density<T: Real>(spec: &ZonoidSpec<T>, u: &Vec3<T>, j: usize, m: usize) -> Result<T> {
    weil_density_of(&spec.constants, spec.density(), u, j, m)
}

/// [`weil_density`] for a bare density, skipping the support certificate.
pub fn weil_density_of<T: Real, G: SphereFn<T> + ?Sized>(
    k: &DimensionConstants<T>,
    g: &G,
    u: &Vec3<T>,
    j: usize,
    m: usize,
) -> Result<T> {
    match j {
        1 => Ok(k.prefactor[0] * single_integral(g, u, m)?),
        2 => Ok(k.prefactor[1] * double_integral(g, u, m)?),
        _ => Err(Error::InvalidArgument(format!(
            "Weil density order must be 1 or 2, got {j}"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Lemma41Report<T> {
    pub dev: T,
    pub gap: T,
    pub f1: T,
    pub f2: T,
}

/// Floor on `f^(2)` in the gap denominator.
pub const GAP_FLOOR: f64 = 1e-14;

/// Isotropy deviation of the section at `u` next to `|f1² − f2| / f2`.
pub fn lemma41_report<T: Real>(spec: &ZonoidSpec<T>, u: &Vec3<T>) -> Result<Lemma41Report<T>> {
    lemma41_report_of(&spec.constants, spec.density(), u)
}

pub fn lemma41_report_of<T: Real, G: SphereFn<T> + ?Sized>(
    k: &DimensionConstants<T>,
    g: &G,
    u: &Vec3<T>,
) -> Result<Lemma41Report<T>> {
    let dev = section_isotropy_tensor(g, u, WEIL_M1)?.deviation;
    let f1 = weil_density_of(k, g, u, 1, WEIL_M1)?;
    let f2 = weil_density_of(k, g, u, 2, WEIL_M2)?;
    let gap = (f1 * f1 - f2).abs() / f2.max(T::c(GAP_FLOOR));
    Ok(Lemma41Report { dev, gap, f1, f2 })
}

/// Random even density of degree `≤ band`, shifted to be positive.
pub fn random_density<T: Real, R: Rng + ?Sized>(
    grid: Arc<SphericalGrid<T>>,
    band: usize,
    rng: &mut R,
) -> SphericalFunction<T> {
    let mut c = HarmonicCoeffs::from_fn(band, |l, _| {
        if l % 2 == 0 {
            let z: f64 = rng.sample(StandardNormal);
            T::c(z / (1.0 + l as f64))
        } else {
            T::zero()
        }
    });
    let vals = synthesize_grid(&c, &grid);
    let (lo, hi) = vals
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), v| (a.min(*v), b.max(*v)));
    // margin covers the gap between node minimum and true minimum
    let shift = -lo + T::c(0.2) * (hi - lo);
    c.set(0, 0, c.get(0, 0) + shift * T::c(4.0 * std::f64::consts::PI).sqrt());
    SphericalFunction::from_coeffs(grid, c)
}

/// Uniform random point of the cap.
pub fn sample_cap<T: Real, R: Rng + ?Sized>(cap: &Cap<T>, rng: &mut R) -> Vec3<T> {
    let a = cap.height.to_f64_lossy();
    let t: f64 = rng.gen_range(a..1.0);
    let psi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    cap.point_at(T::c(t), T::c(psi))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CounterexampleDiagnostics {
    pub c0: f64,
    pub plateau_residual: f64,
    pub isotropy_max_dev_on_u: f64,
    pub funk_mean_u: f64,
    pub funk_mean_v: f64,
    pub funk_gap_uv: f64,
    /// Variance of `g` over the circle `U⊥` divided by its mean.
    pub u_perp_variance_ratio: f64,
    /// Plateau residual times the inversion conditioning at the band.
    pub budget: f64,
    pub samples: usize,
}

pub const ISOTROPY_TOLERANCE: f64 = 1e-5;
pub const FUNK_GAP_TOLERANCE: f64 = 5e-3;
pub const VARIANCE_RATIO_FLOOR: f64 = 0.1;

impl CounterexampleDiagnostics {
    pub fn isotropic_on_u(&self) -> bool {
        self.isotropy_max_dev_on_u < ISOTROPY_TOLERANCE
    }
    pub fn funk_gap_ok(&self) -> bool {
        (self.funk_gap_uv - 1.0).abs() < FUNK_GAP_TOLERANCE
    }
    pub fn non_constant_on_u_perp(&self) -> bool {
        self.u_perp_variance_ratio > VARIANCE_RATIO_FLOOR
    }
    pub fn passes(&self) -> bool {
        self.isotropic_on_u() && self.funk_gap_ok() && self.non_constant_on_u_perp()
    }
}

#[derive(Clone, Debug)]
pub struct Counterexample<T> {
    pub u: Cap<T>,
    pub v: Cap<T>,
    pub plateau: Plateau<T>,
    /// `w = C⁻¹(G)`.
    pub w: SphericalFunction<T>,
    pub c0: T,
    pub zonoid: ZonoidSpec<T>,
    pub diagnostics: CounterexampleDiagnostics,
}

/// `max_l |λ_l| / min_l |λ_l|` over even `l ≤ band` for the cosine kernel.
pub fn cosine_conditioning(band: usize) -> f64 {
    let lam: Vec<f64> = (0..=band)
        .step_by(2)
        .map(|l| funk_hecke_multiplier::<f64>(Kernel::Cosine, l).abs())
        .collect();
    let hi = lam.iter().cloned().fold(0.0, f64::max);
    let lo = lam.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

/// Density `g = w + c0` with `C(w)` the band-`band` plateau that is 1 on
/// `±U` and 2 on `±V`, `c0 = 1 + max |w|`.
///
/// `transition` defaults to half the cap separation. Diagnostics use
/// `samples` seeded directions in each cap and `m`-node circles.
#[allow(clippy::too_many_arguments)]
pub fn build_counterexample<T: Real>(
    grid: &Arc<SphericalGrid<T>>,
    u: Cap<T>,
    v: Cap<T>,
    band: usize,
    transition: Option<T>,
    samples: usize,
    m: usize,
    seed: u64,
) -> Result<Counterexample<T>> {
    let tau = transition.unwrap_or_else(|| crate::harmonics::cap_separation(&u, &v) * T::half());
    let plateau = smooth_plateau(grid, u, v, T::one(), T::two(), tau, band)?;
    let wc = inverse_cosine_transform(&plateau.coeffs)?;
    let w = SphericalFunction::from_coeffs(grid.clone(), wc.clone());
    let c0 = T::one() + w.values().iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let mut gc = wc;
    gc.set(0, 0, gc.get(0, 0) + c0 * T::c(4.0 * std::f64::consts::PI).sqrt());
    let zonoid = make_zonoid(&SphericalFunction::from_coeffs(grid.clone(), gc))?;
    let g = zonoid.density();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let us: Vec<Vec3<T>> = (0..samples).map(|_| sample_cap(&u, &mut rng)).collect();
    let vs: Vec<Vec3<T>> = (0..samples).map(|_| sample_cap(&v, &mut rng)).collect();
    let mut dev = T::zero();
    for x in &us {
        dev = dev.max(section_isotropy_tensor(g, x, m)?.deviation);
    }
    let mean_funk = |pts: &[Vec3<T>]| -> Result<T> {
        let vals = pts.iter().map(|x| funk_at(g, x, m)).collect::<Result<Vec<T>>>()?;
        Ok(pairwise_sum(&vals) / T::from_usize_lossy(vals.len().max(1)))
    };
    let funk_u = mean_funk(&us)?;
    let funk_v = mean_funk(&vs)?;
    let circle = great_circle(&u.center, m)?;
    let pts: Vec<Vec3<T>> = circle.nodes().collect();
    let on_perp = synthesize(g, &pts);
    let nn = T::from_usize_lossy(on_perp.len());
    let mean = pairwise_sum(&on_perp) / nn;
    let var = pairwise_sum(&on_perp.iter().map(|x| (*x - mean) * (*x - mean)).collect::<Vec<_>>()) / nn;
    let residual = plateau.residual().to_f64_lossy();
    let diagnostics = CounterexampleDiagnostics {
        c0: c0.to_f64_lossy(),
        plateau_residual: residual,
        isotropy_max_dev_on_u: dev.to_f64_lossy(),
        funk_mean_u: funk_u.to_f64_lossy(),
        funk_mean_v: funk_v.to_f64_lossy(),
        funk_gap_uv: (funk_v - funk_u).to_f64_lossy(),
        u_perp_variance_ratio: (var / mean).to_f64_lossy(),
        budget: residual * cosine_conditioning(band),
        samples,
    };
    Ok(Counterexample {
        u,
        v,
        plateau,
        w,
        c0,
        zonoid,
        diagnostics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RigidityReport<T> {
    pub cap: Cap<T>,
    pub c: T,
    pub a: Vec3<T>,
    pub affine_residual: T,
    pub funk_constant: T,
    pub funk_residual: T,
    pub nodes: usize,
}

/// Fit `h|_U ≈ c + ⟨a, ·⟩` and `R(g)|_U ≈ c′` over the grid nodes in `U`.
pub fn verify_local_rigidity<T: Real>(spec: &ZonoidSpec<T>, cap: &Cap<T>, m: usize) -> Result<RigidityReport<T>> {
    let grid = spec.h.grid();
    let idx = cap.grid_indices(grid);
    if idx.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "cap contains only {} grid nodes",
            idx.len()
        )));
    }
    let nodes = grid.nodes();
    let hv = spec.h.values();
    let rows: Vec<Vec<T>> = idx
        .iter()
        .map(|&i| vec![T::one(), nodes[i].x(), nodes[i].y(), nodes[i].z()])
        .collect();
    let rhs: Vec<T> = idx.iter().map(|&i| hv[i]).collect();
    let sol = least_squares(&rows, &rhs).ok_or_else(|| Error::InvalidArgument("affine fit is singular".into()))?;
    let a = Vec3::new(sol[1], sol[2], sol[3]);
    let affine_residual = idx
        .iter()
        .map(|&i| (hv[i] - sol[0] - a.dot(&nodes[i])).abs())
        .fold(T::zero(), T::max);
    let funk = idx
        .iter()
        .map(|&i| funk_at(spec.density(), &nodes[i], m))
        .collect::<Result<Vec<T>>>()?;
    let funk_constant = pairwise_sum(&funk) / T::from_usize_lossy(funk.len());
    let funk_residual = funk.iter().map(|f| (*f - funk_constant).abs()).fold(T::zero(), T::max);
    Ok(RigidityReport {
        cap: *cap,
        c: sol[0],
        a,
        affine_residual,
        funk_constant,
        funk_residual,
        nodes: idx.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Arc<SphericalGrid<f64>> {
        Arc::new(SphericalGrid::new(24, 48).unwrap())
    }

    fn constant(c: f64) -> SphericalFunction<f64> {
        let mut k = HarmonicCoeffs::zeros(2);
        k.set(0, 0, c * (4.0 * PI).sqrt());
        SphericalFunction::from_coeffs(grid(), k)
    }

    #[test]
    fn prefactors_match_printed() {
        let k = DimensionConstants::<f64>::three().unwrap();
        assert!((k.prefactor[0] - 1.0 / PI).abs() < 1e-14);
        assert!((k.prefactor[1] - 2.0).abs() < 1e-13);
        assert!((k.b_n - 1.0).abs() < 1e-14);
        assert!((k.a_n - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn ball_density() {
        let z = make_zonoid(&constant(1.0 / (2.0 * PI))).unwrap();
        let u = Vec3::new(0.3, 0.1, -0.9).normalized();
        assert!((z.h.values()[5] - 1.0).abs() < 1e-13);
        assert!((weil_density(&z, &u, 1, 64).unwrap() - 1.0).abs() < 1e-13);
        assert!((weil_density(&z, &u, 2, 64).unwrap() - 1.0).abs() < 1e-13);
        let r = lemma41_report(&z, &u).unwrap();
        assert!(r.dev < 1e-14 && r.gap < 1e-13);
    }

    #[test]
    fn negative_lobe_rejected() {
        let mut k = HarmonicCoeffs::zeros(2);
        k.set(0, 0, 0.1);
        k.set(2, 0, 1.0);
        let g = SphericalFunction::from_coeffs(grid(), k);
        assert!(matches!(make_zonoid(&g), Err(Error::NegativeDensity { .. })));
    }

    #[test]
    fn ball_rigidity() {
        let z = make_zonoid(&constant(1.0)).unwrap();
        let r = verify_local_rigidity(&z, &Cap::new(Vec3::basis(2), 0.5), 64).unwrap();
        assert!((r.c - 2.0 * PI).abs() < 1e-10 && r.a.norm() < 1e-10);
        assert!(r.affine_residual < 1e-10 && r.funk_residual < 1e-10);
    }

    #[test]
    fn ball_volumes() {
        assert_eq!(unit_ball_volume(2), PI);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
    }
}

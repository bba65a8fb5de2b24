//! Verification suites behind `isosec verify`. Every suite is seeded from
//! the config, so the same config gives the same rows.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isosec_core::convex::{
    area_density, cap_measure, minkowski_solve_revolution, mixed_discriminant, newton_report, radii,
    random_support_function, umbilic_sphere_check, Ball, Ellipsoid, Lens, Spherocylinder, SupportModel, UmbilicReport,
};
use isosec_core::harmonics::{analyze, cosine_transform_spectral, HarmonicCoeffs};
use isosec_core::linalg::Sym2;
use isosec_core::sphere::{great_circle, Cap, SphericalGrid};
use isosec_core::transforms::{
    axial_rotations, finite_average, funk_at, l2_distance, lp_norm, radial_symmetrize, sr_l1_identity,
    SphericalFunction,
};
use isosec_core::zonoid::{
    lemma41_report_of, make_zonoid, random_density, verify_local_rigidity, weil_density_of, Counterexample,
    DimensionConstants, WEIL_M1,
};
use isosec_core::{Grid, Vector};

use crate::commands;
use crate::config::RunConfig;
use crate::report::ReportRow;
use crate::{CliError, Suite};

const NEWTON_BODIES: usize = 50;
const AF_PAIRS: usize = 100;
const RANDOM_BODY_BAND: usize = 8;
const SR_CASES: usize = 10;
const TEST_BAND: usize = 16;
const LEMMA41_CASES: usize = 200;
const CALIBRATION_DENSITIES: usize = 20;
const CALIBRATION_DIRECTIONS: usize = 20;
/// Fourier oracle cases need `|F|² ≥ this · f1²` to be compared relatively.
const FOURIER_FLOOR: f64 = 1e-6;
const CALIBRATION_FUNK: f64 = 1e-7;
const PROFILE_SAMPLES: usize = 64;

/// Shared state for one `verify` run; the counterexample is built at most once.
pub struct Context {
    pub cfg: RunConfig,
    pub grid: Arc<Grid>,
    counterexample: Option<Counterexample<f64>>,
}

impl Context {
    pub fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let grid = Arc::new(SphericalGrid::new(cfg.n_theta, cfg.n_phi)?);
        Ok(Context {
            cfg: cfg.clone(),
            grid,
            counterexample: None,
        })
    }

    pub fn counterexample(&mut self) -> Result<&Counterexample<f64>, CliError> {
        if self.counterexample.is_none() {
            self.counterexample = Some(commands::build(&self.cfg, &self.grid)?);
        }
        Ok(self.counterexample.as_ref().expect("just built"))
    }

    /// Independent stream per suite so running one suite alone reproduces its
    /// rows inside `all`.
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        r.set_stream(stream);
        r
    }
}

pub fn run(ctx: &mut Context, suite: Suite) -> Result<Vec<ReportRow>, CliError> {
    Ok(match suite {
        Suite::Newton => newton(ctx)?,
        Suite::Af => af(ctx)?,
        Suite::Sr => sr(ctx)?,
        Suite::Lemma41 => lemma41(ctx)?,
        Suite::Rigidity => rigidity(ctx)?,
        Suite::MinkowskiRev => minkowski_rev(ctx)?,
        Suite::Umbilic => umbilic(ctx)?,
        Suite::All => {
            let mut rows = Vec::new();
            for s in [
                Suite::Newton,
                Suite::Af,
                Suite::Sr,
                Suite::Lemma41,
                Suite::Rigidity,
                Suite::MinkowskiRev,
                Suite::Umbilic,
            ] {
                rows.extend(run(ctx, s)?);
            }
            rows
        }
    })
}

/// Smallest Newton gap over the grid and whether every node reports equality.
fn newton_scan<S: SupportModel<f64> + ?Sized>(h: &S, grid: &Grid) -> Result<(f64, f64, bool), CliError> {
    let (mut min_gap, mut max_gap, mut all_equal) = (f64::INFINITY, 0.0f64, true);
    for u in grid.nodes() {
        let r = newton_report(h, u, 1, 2)?;
        min_gap = min_gap.min(r.gap);
        max_gap = max_gap.max(r.gap.abs());
        all_equal &= r.equality;
    }
    Ok((min_gap, max_gap, all_equal))
}

fn newton(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let tol = ctx.cfg.tol.newton;
    let grid = ctx.grid.clone();
    let mut rng = ctx.rng(1);
    let mut rows = Vec::new();

    let (_, ball_gap, ball_flag) = newton_scan(&Ball::new(1.0), &grid)?;
    rows.push(ReportRow::below(
        "newton.ball_gap",
        "newton-inequality-equality-case",
        ball_gap,
        tol,
    ));

    let mut min_slack = f64::INFINITY;
    let mut random_flagged = 0usize;
    for _ in 0..NEWTON_BODIES {
        let h = random_support_function(grid.clone(), RANDOM_BODY_BAND, &mut rng)?;
        let (lo, _, flag) = newton_scan(&h, &grid)?;
        min_slack = min_slack.min(lo);
        random_flagged += flag as usize;
    }
    rows.push(ReportRow::slack(
        "newton.random_min_slack",
        "newton-inequality",
        min_slack,
        tol,
    ));

    let ellipsoid = Ellipsoid::new(1.0, 1.0, 2.0);
    let (_, _, ellipsoid_flag) = newton_scan(&ellipsoid, &grid)?;
    let wrong = (!ball_flag) as usize + ellipsoid_flag as usize + random_flagged;
    rows.push(ReportRow::new(
        "newton.equality_flags_only_ball",
        "newton-inequality-equality-case",
        wrong as f64,
        0.0,
        wrong == 0,
    ));
    let e1_gap = newton_report(&ellipsoid, &Vector::basis(0), 1, 2)?.gap;
    rows.push(ReportRow::above(
        "newton.ellipsoid_strict_gap",
        "newton-inequality",
        e1_gap,
        tol,
    ));
    Ok(rows)
}

/// Values and radii matrices of a body at every node.
fn node_data<S: SupportModel<f64> + ?Sized>(h: &S, grid: &Grid) -> (Vec<f64>, Vec<Sym2<f64>>) {
    grid.nodes().iter().map(|u| (h.value(u), radii(h, u).q)).unzip()
}

/// `V(K1, K2, K3)` from precomputed node data.
fn mixed_volume_cached(grid: &Grid, h1: &[f64], q2: &[Sym2<f64>], q3: &[Sym2<f64>]) -> f64 {
    let terms: Vec<f64> = (0..grid.len())
        .map(|i| grid.weights()[i] * h1[i] * mixed_discriminant(&q2[i], &q3[i]))
        .collect();
    terms.iter().sum::<f64>() / 3.0
}

fn af(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let tol = ctx.cfg.tol.af;
    let grid = ctx.grid.clone();
    let mut rng = ctx.rng(2);
    let (hb, qb) = node_data(&Ball::new(1.0), &grid);
    let mut min_slack = f64::INFINITY;
    let mut perm_err = 0.0f64;
    for _ in 0..AF_PAIRS {
        let k = random_support_function(grid.clone(), RANDOM_BODY_BAND, &mut rng)?;
        let l = random_support_function(grid.clone(), RANDOM_BODY_BAND, &mut rng)?;
        let (hk, qk) = node_data(&k, &grid);
        let (hl, ql) = node_data(&l, &grid);
        // V(K, L, B) = (1/3) ∫ h_B D(Q_K, Q_L)
        let vkl = mixed_volume_cached(&grid, &hb, &qk, &ql);
        let vkk = mixed_volume_cached(&grid, &hb, &qk, &qk);
        let vll = mixed_volume_cached(&grid, &hb, &ql, &ql);
        min_slack = min_slack.min((vkl * vkl - vkk * vll) / (vkk * vll));
        let alt = [
            mixed_volume_cached(&grid, &hk, &ql, &qb),
            mixed_volume_cached(&grid, &hl, &qk, &qb),
        ];
        for v in alt {
            perm_err = perm_err.max((v - vkl).abs() / vkl.abs());
        }
    }
    let ball = mixed_volume_cached(&grid, &hb, &qb, &qb);
    Ok(vec![
        ReportRow::slack("af.random_pairs_relative_slack", "aleksandrov-fenchel", min_slack, tol),
        ReportRow::below("af.mixed_volume_symmetry", "mixed-volume-symmetry", perm_err, 1e-8),
        ReportRow::below(
            "af.ball_volume",
            "mixed-volume-of-ball",
            (ball - 4.0 * PI / 3.0).abs(),
            1e-10,
        ),
    ])
}

fn sr(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let t = ctx.cfg.tol.clone();
    let grid = ctx.grid.clone();
    let mut rng = ctx.rng(3);
    let axis = Vector::basis(2);
    let rotations = axial_rotations(64);
    let (mut l1_err, mut l2_excess, mut identity_err, mut idem_diff, mut avg_dist) =
        (0.0f64, f64::NEG_INFINITY, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..SR_CASES {
        let f = random_density(grid.clone(), TEST_BAND, &mut rng);
        let s = radial_symmetrize(&f, &axis)?;
        let l1 = lp_norm(&f, 1.0)?;
        l1_err = l1_err.max((lp_norm(&s, 1.0)? - l1).abs() / l1);
        l2_excess = l2_excess.max(lp_norm(&s, 2.0)? - lp_norm(&f, 2.0)?);
        let (lhs, rhs) = sr_l1_identity(&f)?;
        identity_err = identity_err.max((lhs - rhs).abs() / rhs);
        let twice = radial_symmetrize(&s, &axis)?;
        for (a, b) in s.values().iter().zip(twice.values()) {
            if a.to_bits() != b.to_bits() {
                idem_diff = idem_diff.max((a - b).abs().max(f64::MIN_POSITIVE));
            }
        }
        avg_dist = avg_dist.max(l2_distance(&finite_average(&f, &rotations)?, &s)?);
    }
    let one = SphericalFunction::from_values(grid.clone(), vec![1.0; grid.len()])?;
    let (lhs_one, _) = sr_l1_identity(&one)?;
    Ok(vec![
        ReportRow::below("sr.l1_preserved", "sr-l1-norm", l1_err, t.sr_l1),
        ReportRow::slack("sr.l2_not_increased", "sr-l2-contraction", -l2_excess, 0.0),
        ReportRow::below("sr.l1_identity", "sr-l1-double-integral", identity_err, t.sr_identity),
        ReportRow::below(
            "sr.identity_constant_4pi",
            "sr-l1-double-integral",
            (lhs_one - 4.0 * PI).abs(),
            t.sr_exact,
        ),
        ReportRow::new("sr.idempotent", "sr-definition", idem_diff, 0.0, idem_diff == 0.0),
        ReportRow::below(
            "sr.rotation_average_l2",
            "rotation-averages-converge",
            avg_dist,
            t.sr_average,
        ),
    ])
}

/// `g = p(⟨x, a⟩) + ε r` with `p` even and positive; `u = a` makes the
/// section isotropic exactly when `ε r` is.
fn lemma41_case(grid: &Arc<Grid>, k: usize, rng: &mut ChaCha8Rng) -> Result<(HarmonicCoeffs<f64>, Vector), CliError> {
    let eps = [0.0, 1e-9, 1e-6, 0.05, 0.3, 1.0][k % 6];
    let a = Vector::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0) + 1e-3,
    )
    .normalized();
    let coef: Vec<f64> = (0..=TEST_BAND / 2).map(|_| rng.gen_range(0.0..1.0)).collect();
    let r = random_density(grid.clone(), TEST_BAND, rng);
    let vals: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(r.values())
        .map(|(x, rv)| {
            let t2 = x.dot(&a).powi(2);
            let p = coef.iter().rev().fold(0.0, |acc, c| acc * t2 + c) + 0.1;
            p + eps * rv
        })
        .collect();
    Ok((analyze(grid, &vals, TEST_BAND)?, a))
}

/// `|∫ g e^{2iα} dα|²` over the circle `u⊥`.
fn degree_two_mass(g: &HarmonicCoeffs<f64>, u: &Vector, m: usize) -> Result<f64, CliError> {
    let c = great_circle(u, m)?;
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..m {
        let alpha = 2.0 * PI * k as f64 / m as f64;
        let v = g.eval(&c.point(alpha));
        re += v * (2.0 * alpha).cos();
        im += v * (2.0 * alpha).sin();
    }
    let h = 2.0 * PI / m as f64;
    Ok((re * h).powi(2) + (im * h).powi(2))
}

fn lemma41(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let t = ctx.cfg.tol.clone();
    let grid = ctx.grid.clone();
    let mut rng = ctx.rng(4);
    let k = DimensionConstants::<f64>::three()?;
    let mut mismatches = 0usize;
    let mut fourier_err = 0.0f64;
    for case in 0..LEMMA41_CASES {
        let (g, u) = lemma41_case(&grid, case, &mut rng)?;
        let r = lemma41_report_of(&k, &g, &u)?;
        if (r.gap < t.lemma41_gap) != (r.dev < t.lemma41_dev) {
            mismatches += 1;
        }
        let mass = degree_two_mass(&g, &u, WEIL_M1)?;
        if mass >= FOURIER_FLOOR * r.f1 * r.f1 {
            fourier_err = fourier_err.max(((r.f1 * r.f1 - r.f2) - mass).abs() / mass);
        }
    }
    let ball = |_: &Vector| 1.0 / (2.0 * PI);
    let ball_report = lemma41_report_of(&k, &ball, &Vector::new(0.3, -0.4, 0.866).normalized())?;

    let mut funk_err = 0.0f64;
    let mut dual_err = 0.0f64;
    for _ in 0..CALIBRATION_DENSITIES {
        let g = random_density(grid.clone(), TEST_BAND, &mut rng);
        let gc = g.evaluator()?.clone();
        let h = cosine_transform_spectral(&gc)?;
        for _ in 0..CALIBRATION_DIRECTIONS {
            let u = Vector::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0) + 1e-3,
            )
            .normalized();
            let f1 = weil_density_of(&k, &gc, &u, 1, ctx.cfg.circle_m)?;
            funk_err = funk_err.max((f1 - funk_at(&gc, &u, ctx.cfg.circle_m)?).abs());
            dual_err = dual_err.max((f1 - area_density(&h, &u, 1)?).abs());
        }
    }
    Ok(vec![
        ReportRow::new(
            "isotropy_gap.equivalence_mismatches",
            "isotropy-iff-newton-equality",
            mismatches as f64,
            0.0,
            mismatches == 0,
        ),
        ReportRow::below(
            "isotropy_gap.fourier_oracle",
            "isotropy-iff-newton-equality",
            fourier_err,
            t.fourier,
        ),
        ReportRow::below(
            "isotropy_gap.ball",
            "isotropy-iff-newton-equality",
            ball_report.gap.max(ball_report.dev),
            1e-12,
        ),
        ReportRow::below("weil.first_density_is_funk", "weil-formula", funk_err, CALIBRATION_FUNK),
        ReportRow::below("weil.dual_route", "weil-formula", dual_err, 1e-6),
    ])
}

fn constant_density(grid: &Arc<Grid>, c: f64) -> SphericalFunction<f64> {
    let mut k = HarmonicCoeffs::zeros(2);
    k.set(0, 0, c * (4.0 * PI).sqrt());
    SphericalFunction::from_coeffs(grid.clone(), k)
}

fn rigidity(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let t = ctx.cfg.tol.clone();
    let m = ctx.cfg.circle_m;
    let ball = make_zonoid(&constant_density(&ctx.grid, 1.0 / (2.0 * PI)))?;
    let rb = verify_local_rigidity(&ball, &ctx.cfg.u_cap(), m)?;
    let ball_err = (rb.c - 1.0)
        .abs()
        .max(rb.a.norm())
        .max(rb.affine_residual)
        .max(rb.funk_residual);
    let ce = ctx.counterexample()?;
    let r = verify_local_rigidity(&ce.zonoid, &ce.u, m)?;
    Ok(vec![
        ReportRow::below("rigidity.ball", "local-rigidity", ball_err, 1e-10),
        ReportRow::below(
            "rigidity.counterexample_affine",
            "local-rigidity",
            r.affine_residual,
            t.rigidity,
        ),
        ReportRow::below(
            "rigidity.counterexample_funk",
            "local-rigidity",
            r.funk_residual,
            t.rigidity,
        ),
        ReportRow::below(
            "rigidity.counterexample_linear_part",
            "local-rigidity",
            r.a.norm() / r.c.abs(),
            1e-6,
        ),
    ])
}

fn minkowski_rev(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let t = ctx.cfg.tol.clone();
    let cap = Cap::new(Vector::basis(2), 0.5);
    let edges: Vec<f64> = (0..=40).map(|k| -1.0 + 0.05 * k as f64).collect();
    let ball = Ball::new(1.0);
    let mu = cap_measure(&ball, &cap, &edges)?;
    let sol = minkowski_solve_revolution(&mu, &ball, &cap, PROFILE_SAMPLES)?;
    let lens = Lens::new(1.0, 0.5);
    let support_err = (0..=200)
        .map(|k| {
            let z = -1.0 + 0.01 * k as f64;
            let u = Vector::new((1.0 - z * z).max(0.0).sqrt(), 0.0, z);
            (sol.body.support_at(z) - lens.value(&u)).abs()
        })
        .fold(0.0, f64::max);
    Ok(vec![
        ReportRow::below(
            "minkowski_rev.band_masses",
            "minkowski-problem-revolution",
            sol.max_rel_band_error,
            t.minkowski,
        ),
        ReportRow::below(
            "minkowski_rev.mass_outside",
            "minkowski-problem-revolution",
            sol.mass_outside,
            t.mass_outside,
        ),
        ReportRow::below(
            "minkowski_rev.is_lens",
            "minkowski-problem-revolution",
            support_err,
            t.minkowski,
        ),
    ])
}

fn umbilic(ctx: &mut Context) -> Result<Vec<ReportRow>, CliError> {
    let t = ctx.cfg.tol.clone();
    let grid = ctx.grid.clone();
    let u_cap = ctx.cfg.u_cap();
    // without a fit (radii not equal) the spread itself is reported
    let fit_residual = |r: &UmbilicReport<f64>| r.fit.map_or(r.radii_spread, |f| f.residual);

    let ball = umbilic_sphere_check(&Ball::new(1.0), &grid, &u_cap, t.umbilic);
    let ce = ctx.counterexample()?;
    let zon = umbilic_sphere_check(&ce.zonoid.h, &grid, &ce.u, t.umbilic);
    let equator = Cap::new(Vector::basis(0), 0.5);
    let sc = umbilic_sphere_check(&Spherocylinder::new(1.0, 1.0), &grid, &equator, t.umbilic);
    let lens = Lens::new(1.0, 0.5);
    let pieces = umbilic_sphere_check(&lens, &grid, &Cap::new(Vector::basis(2), lens.threshold()), t.umbilic);
    let spanning = umbilic_sphere_check(&lens, &grid, &Cap::new(Vector::basis(0), 0.3), t.umbilic);
    Ok(vec![
        ReportRow::below(
            "umbilic.ball_fit",
            "umbilic-implies-sphere",
            fit_residual(&ball),
            t.umbilic_ball,
        ),
        ReportRow::below(
            "umbilic.counterexample_fit",
            "umbilic-implies-sphere",
            fit_residual(&zon),
            t.umbilic,
        ),
        ReportRow::above(
            "umbilic.spherocylinder_not_one_sphere",
            "absolute-continuity-needed",
            if sc.is_umbilic { fit_residual(&sc) } else { 0.0 },
            t.umbilic_split,
        ),
        ReportRow::below(
            "umbilic.lens_pieces_umbilic",
            "radii-not-curvatures",
            pieces.radii_spread,
            t.umbilic,
        ),
        ReportRow::above(
            "umbilic.lens_normal_cone_split",
            "radii-not-curvatures",
            spanning.radii_spread,
            t.umbilic_split,
        ),
    ])
}

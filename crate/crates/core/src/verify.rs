//! Executable certificates for the structural identities of the kernels.
//!
//! Every check returns a [`CheckReport`] with `passed == (max_rel_err <= tolerance)`.
//! Checks are deterministic in `(space, seed, cfg)`.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Domain, TubeFamily};
use crate::laplace_kernel::{
    bergman_selberg_customary_constant, constant, kernel_closed, kernel_numeric, laplace_transform,
    paraboloid_kernel_formula, KernelHandle, TestProfile,
};
use crate::num_core::{real_norm, Point};
use crate::quadrature::{integrate_iterated, seeded_rng, IntegrationResult, Interval, QuadratureConfig};
use crate::transforms::{pullback_kernel, pullback_target, Biholomorphism};
use crate::weights::{lorentz_symbol_constant, lorentz_symbol_constant_sphere_form, Family, SpaceSpec};

type C64 = Complex<f64>;

/// Outcome of one verification check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub space: String,
    pub samples: usize,
    #[serde(serialize_with = "finite_or_inf")]
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check: CheckKind, space: &str, samples: usize, max_rel_err: f64, tolerance: f64, notes: Vec<String>) -> Self {
        Self {
            check_name: check.name().to_string(),
            space: space.to_string(),
            samples,
            max_rel_err,
            tolerance,
            passed: max_rel_err <= tolerance,
            notes,
        }
    }

    fn failed(check: CheckKind, space: &str, samples: usize, tolerance: f64, err: &Error) -> Self {
        Self::new(check, space, samples, f64::INFINITY, tolerance, vec![format!("check aborted: {err}")])
    }

    fn from_result(check: CheckKind, space: &str, samples: usize, tolerance: f64, r: Result<(f64, Vec<String>)>) -> Self {
        match r {
            Ok((err, notes)) => Self::new(check, space, samples, if err.is_nan() { f64::INFINITY } else { err }, tolerance, notes),
            Err(e) => Self::failed(check, space, samples, tolerance, &e),
        }
    }
}

/// Non-finite errors are written as the string `"inf"` since JSON has no infinity.
fn finite_or_inf<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_str("inf")
    }
}

/// The available checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Symmetry,
    Diagonal,
    NumericAgreement,
    SymbolOracle,
    LogConvexity,
    SelfReproduction,
    Extremal,
    Isometry,
    PointEvalBound,
    Pullback,
    WeightCompatibility,
    RoundTrip,
    Jacobian,
    ChainConsistency,
    Homogeneity,
    Degeneration,
    DiscSeries,
    BallReproduction,
}

impl CheckKind {
    pub const ALL: [CheckKind; 18] = [
        CheckKind::Symmetry,
        CheckKind::Diagonal,
        CheckKind::NumericAgreement,
        CheckKind::SymbolOracle,
        CheckKind::LogConvexity,
        CheckKind::SelfReproduction,
        CheckKind::Extremal,
        CheckKind::Isometry,
        CheckKind::PointEvalBound,
        CheckKind::Pullback,
        CheckKind::WeightCompatibility,
        CheckKind::RoundTrip,
        CheckKind::Jacobian,
        CheckKind::ChainConsistency,
        CheckKind::Homogeneity,
        CheckKind::Degeneration,
        CheckKind::DiscSeries,
        CheckKind::BallReproduction,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Symmetry => "symmetry",
            CheckKind::Diagonal => "diagonal",
            CheckKind::NumericAgreement => "numeric-agreement",
            CheckKind::SymbolOracle => "symbol-oracle",
            CheckKind::LogConvexity => "log-convexity",
            CheckKind::SelfReproduction => "reproduction",
            CheckKind::Extremal => "extremal",
            CheckKind::Isometry => "isometry",
            CheckKind::PointEvalBound => "point-eval-bound",
            CheckKind::Pullback => "pullback",
            CheckKind::WeightCompatibility => "weight-compatibility",
            CheckKind::RoundTrip => "round-trip",
            CheckKind::Jacobian => "jacobian",
            CheckKind::ChainConsistency => "chain-consistency",
            CheckKind::Homogeneity => "homogeneity",
            CheckKind::Degeneration => "degeneration",
            CheckKind::DiscSeries => "disc-series",
            CheckKind::BallReproduction => "ball-reproduction",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the check applies to `space`.
    pub fn applies_to(&self, space: &SpaceSpec<f64>) -> bool {
        let n = space.dim();
        let one_d = space.is_tube() && n == 1;
        let fam = space.family();
        let model = matches!(fam, Family::Siegel { .. } | Family::Ball { .. });
        let ball = matches!(fam, Family::Ball { .. });
        match self {
            CheckKind::Symmetry | CheckKind::Diagonal | CheckKind::PointEvalBound => true,
            CheckKind::NumericAgreement => {
                space.is_tube() && (n <= 2 || matches!(fam, Family::LorentzTube { .. }))
            }
            CheckKind::SymbolOracle | CheckKind::LogConvexity => space.is_tube(),
            CheckKind::SelfReproduction | CheckKind::Extremal | CheckKind::Isometry => one_d,
            CheckKind::Pullback | CheckKind::WeightCompatibility | CheckKind::RoundTrip | CheckKind::Jacobian => model,
            CheckKind::ChainConsistency => ball,
            CheckKind::Homogeneity => matches!(fam, Family::LorentzTube { .. }),
            CheckKind::Degeneration => matches!(fam, Family::ParaboloidTube { .. }),
            CheckKind::DiscSeries => ball && n == 1 && space.alpha() == Some(0.0),
            CheckKind::BallReproduction => ball && n == 1,
        }
    }
}

/// Seed and quadrature settings shared by a verification run.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct VerifyOptions {
    pub seed: u64,
    pub cfg: QuadratureConfig,
}

fn rel(a: C64, b: C64) -> f64 {
    let d = (a - b).norm();
    if d == 0.0 {
        0.0
    } else {
        d / b.norm()
    }
}

fn family_notes(space: &SpaceSpec<f64>) -> Vec<String> {
    let mut notes = Vec::new();
    match space.family() {
        Family::BergmanSelberg { q } => {
            let derived = constant(space).unwrap_or(f64::NAN);
            let customary = bergman_selberg_customary_constant(q).unwrap_or(f64::NAN);
            notes.push(format!(
                "bergman-selberg constant: weight 2y^(2q-2)/(pi Gamma(2q-1)) yields 2^(2q-3) Gamma(2q) = {derived:.12e}; \
                 the customary kernel constant Gamma(2q) = {customary:.12e}; they coincide only at q = 3/2"
            ));
        }
        Family::Ball { .. } => notes.push(
            "ball weight is 4^alpha (1-|z|^2)^alpha / |1+z_n|^(2 alpha), the pullback of the Siegel weight".into(),
        ),
        Family::LorentzTube { alpha } if space.dim() >= 3 => {
            let n = space.dim();
            if let (Ok(c), Ok(p)) = (lorentz_symbol_constant(alpha, n), lorentz_symbol_constant_sphere_form(alpha, n)) {
                notes.push(format!(
                    "lorentz symbol constant {c:.12e}; the variant with Gamma(n/2-1) Gamma(1/2)/Gamma((n-1)/2) is {p:.12e} (ratio {:.12})",
                    p / c
                ));
            }
        }
        _ => {}
    }
    notes
}

fn pairs(space: &SpaceSpec<f64>, count: usize, seed: u64) -> Result<Vec<(Point<f64>, Point<f64>)>> {
    let pts = space.domain().sample_points(2 * count, seed)?;
    Ok(pts.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect())
}

/// Tube points with `|Re|` at most 1 and imaginary parts pushed `0.3 e_n`
/// into the base, which keeps Fourier integrands moderately oscillatory.
pub fn numeric_test_pairs(space: &SpaceSpec<f64>, count: usize, seed: u64) -> Result<Vec<(Point<f64>, Point<f64>)>> {
    let base = space.require_tube()?;
    let n = base.dim();
    let pts = Domain::Tube(base).sample_points(2 * count, seed)?;
    let adjust = |p: &Point<f64>| -> Result<Point<f64>> {
        let coords = p
            .coords()
            .iter()
            .enumerate()
            .map(|(k, c)| Complex::new(0.5 * c.re, c.im + if k == n - 1 { 0.3 } else { 0.0 }))
            .collect();
        Point::new(coords)
    };
    pts.chunks(2).map(|c| Ok((adjust(&c[0])?, adjust(&c[1])?))).collect()
}

/// Random points of `U_I` with margin from its boundary.
pub fn support_points(space: &SpaceSpec<f64>, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    let base = space.require_tube()?;
    let n = base.dim();
    let mut pts = base.sample_interior(count, seed)?;
    for t in pts.iter_mut() {
        t[n - 1] += match base.family() {
            TubeFamily::LorentzCone => 0.2,
            _ => 0.05,
        };
    }
    Ok(pts)
}

// ---------------------------------------------------------------------------
// closed-form identities

/// `K(z, w) = conj(K(w, z))`.
pub fn check_symmetry(space: &SpaceSpec<f64>, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let mut worst: f64 = 0.0;
        for (z, w) in pairs(space, samples, seed)? {
            worst = worst.max(rel(kernel_closed(space, &z, &w)?, kernel_closed(space, &w, &z)?.conj()));
        }
        Ok((worst, family_notes(space)))
    })();
    CheckReport::from_result(CheckKind::Symmetry, &space.label(), samples, tol, r)
}

/// `K(z, z)` real and positive; the error is `|Im K| / |K|` (infinite if `Re K <= 0`).
pub fn check_diagonal(space: &SpaceSpec<f64>, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let mut worst: f64 = 0.0;
        for z in space.domain().sample_points(samples, seed)? {
            let k = kernel_closed(space, &z, &z)?;
            worst = worst.max(if k.re > 0.0 { k.im.abs() / k.norm() } else { f64::INFINITY });
        }
        Ok((worst, family_notes(space)))
    })();
    CheckReport::from_result(CheckKind::Diagonal, &space.label(), samples, tol, r)
}

/// Paraboloid formula at `n = 1` against the `y^alpha` half-plane kernel.
pub fn check_degeneration(alpha: f64, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let label = format!("paraboloid n=1 alpha={alpha} vs halfplane-power v={}", alpha + 1.0);
    let r = (|| {
        let target = SpaceSpec::half_plane_power(alpha + 1.0)?;
        let mut worst: f64 = 0.0;
        for (z, w) in pairs(&target, samples, seed)? {
            worst = worst.max(rel(paraboloid_kernel_formula(1, alpha, &z, &w)?, kernel_closed(&target, &z, &w)?));
        }
        Ok((worst, vec![format!("C1 at n=1 times 2^(-alpha-2) equals 2^alpha (alpha+1)/pi = {:.12e}", 2f64.powf(alpha) * (alpha + 1.0) / PI)]))
    })();
    CheckReport::from_result(CheckKind::Degeneration, &label, samples, tol, r)
}

/// `K(lambda z, lambda w) = lambda^{-2(alpha+n)} K(z, w)` on Lorentz tubes.
pub fn check_lorentz_homogeneity(space: &SpaceSpec<f64>, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let Family::LorentzTube { alpha } = space.family() else {
            return Err(Error::Unsupported(format!("homogeneity is a Lorentz-tube check, got {}", space.label())));
        };
        let n = space.dim() as f64;
        let mut rng = seeded_rng(seed, 7);
        let mut worst: f64 = 0.0;
        for (z, w) in pairs(space, samples, seed)? {
            let lambda: f64 = (rng.random_range(-2.0f64..2.0)).exp();
            let k = kernel_closed(space, &z, &w)?;
            let kl = kernel_closed(space, &z.scale(lambda), &w.scale(lambda))?;
            worst = worst.max(rel(kl, k * lambda.powf(-2.0 * (alpha + n))));
        }
        Ok((worst, vec![]))
    })();
    CheckReport::from_result(CheckKind::Homogeneity, &space.label(), samples, tol, r)
}

/// Disc kernel against `sum_{k<=200} (k+1)(z conj w)^k / pi` for `|z|, |w| <= 0.5`.
pub fn check_disc_series(samples: usize, tol: f64, seed: u64) -> CheckReport {
    let space = SpaceSpec::ball(1, 0.0).expect("valid");
    let r = (|| {
        let mut rng = seeded_rng(seed, 11);
        let mut draw = || {
            let r = 0.5 * rng.random::<f64>().sqrt();
            Complex::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        };
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let (z, w) = (draw(), draw());
            let q = z * w.conj();
            let mut term = Complex::new(1.0, 0.0);
            let mut series = Complex::new(0.0, 0.0);
            for k in 0..=200 {
                series += term * (k as f64 + 1.0);
                term *= q;
            }
            series /= PI;
            worst = worst.max(rel(kernel_closed(&space, &Point::scalar(z)?, &Point::scalar(w)?)?, series));
        }
        Ok((worst, vec!["classical disc kernel reached through C1 -> C2 -> C3".into()]))
    })();
    CheckReport::from_result(CheckKind::DiscSeries, &space.label(), samples, tol, r)
}

// ---------------------------------------------------------------------------
// symbol checks

/// `symbol_numeric` against `symbol_closed` at random support points. Monte
/// Carlo results are scored as `|diff| / (3 stderr)` against tolerance 1.
pub fn check_symbol_oracle(space: &SpaceSpec<f64>, points: usize, cfg: &QuadratureConfig, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let ts = support_points(space, points, seed)?;
        let results: Vec<Result<(f64, bool)>> = ts
            .par_iter()
            .map(|t| {
                let num = space.symbol_numeric(t, cfg)?;
                let closed = space.symbol_closed(t)?.finite().ok_or_else(|| Error::Invariant("support point off U_I".into()))?;
                let v = num.value.finite().ok_or_else(|| Error::Invariant("numeric symbol infinite on U_I".into()))?;
                Ok(if num.monte_carlo {
                    ((v - closed).abs() / (3.0 * num.error_estimate), true)
                } else {
                    ((v - closed).abs() / closed, false)
                })
            })
            .collect();
        let mut worst: f64 = 0.0;
        let mut mc = false;
        for r in results {
            let (e, m) = r?;
            worst = worst.max(e);
            mc |= m;
        }
        let mut notes = family_notes(space);
        if mc {
            notes.push(format!("Monte Carlo with {} samples per point; error is |diff| / (3 stderr)", cfg.mc_samples));
        }
        Ok((worst, notes))
    })();
    CheckReport::from_result(CheckKind::SymbolOracle, &space.label(), points, tol, r)
}

/// Midpoint convexity of `ln I`: error `max(0, I(mid) / sqrt(I(t1) I(t2)) - 1)`.
pub fn check_log_convexity(space: &SpaceSpec<f64>, triples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let a = support_points(space, triples, seed)?;
        let b = support_points(space, triples, seed.wrapping_add(1))?;
        let mut worst: f64 = 0.0;
        let mut violations = 0;
        for (t1, t2) in a.iter().zip(&b) {
            let mid: Vec<f64> = t1.iter().zip(t2).map(|(x, y)| 0.5 * (x + y)).collect();
            let l = |t: &[f64]| -> Result<f64> {
                space.log_symbol_closed(t)?.ok_or_else(|| Error::Invariant("support point off U_I".into()))
            };
            let excess = (l(&mid)? - 0.5 * (l(t1)? + l(t2)?)).exp_m1().max(0.0);
            if excess > tol {
                violations += 1;
            }
            worst = worst.max(excess);
        }
        Ok((worst, vec![format!("{violations} violations beyond tolerance")]))
    })();
    CheckReport::from_result(CheckKind::LogConvexity, &space.label(), triples, tol, r)
}

// ---------------------------------------------------------------------------
// Fourier-Laplace representation

/// `kernel_numeric` against `kernel_closed`. Monte Carlo results are scored
/// as `|diff| / (3 stderr)` against tolerance 1.
pub fn check_numeric_agreement(space: &SpaceSpec<f64>, count: usize, cfg: &QuadratureConfig, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let ps = numeric_test_pairs(space, count, seed)?;
        let mc = space.dim() >= 3;
        let errs: Vec<Result<f64>> = ps
            .par_iter()
            .map(|(z, w)| {
                let num = kernel_numeric(space, z, w, cfg)?;
                let closed = kernel_closed(space, z, w)?;
                Ok(if mc {
                    (num.value - closed).norm() / (3.0 * num.error_estimate.unwrap_or(0.0))
                } else {
                    rel(num.value, closed)
                })
            })
            .collect();
        let mut worst: f64 = 0.0;
        for e in errs {
            worst = worst.max(e?);
        }
        let mut notes = family_notes(space);
        if mc {
            notes.push(format!("Monte Carlo with {} samples per pair; error is |diff| / (3 stderr)", cfg.mc_samples));
        }
        Ok((worst, notes))
    })();
    CheckReport::from_result(CheckKind::NumericAgreement, &space.label(), count, tol, r)
}

// ---------------------------------------------------------------------------
// reproducing property, extremal problem, isometry (one-dimensional families)

fn require_one_d(space: &SpaceSpec<f64>) -> Result<()> {
    if space.is_tube() && space.dim() == 1 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("{} is not a one-dimensional tube family", space.label())))
    }
}

fn loose(cfg: &QuadratureConfig) -> QuadratureConfig {
    cfg.with_rel_tol(cfg.rel_tol.max(1e-8))
}

/// `∫_{Im ζ > 0} K(ζ, w) conj(K(ζ, z)) rho(ζ) dA(ζ)`.
pub fn reproduction_integral(space: &SpaceSpec<f64>, z: &Point<f64>, w: &Point<f64>, cfg: &QuadratureConfig) -> Result<IntegrationResult<C64>> {
    require_one_d(space)?;
    for p in [z, w] {
        if !space.domain().contains(p)? {
            return Err(Error::Domain(format!("point outside the domain of {}", space.label())));
        }
    }
    let (zc, wc) = (z.last(), w.last());
    let height = 0.5 * (zc.im + wc.im);
    let center = 0.5 * (zc.re + wc.re);
    let f = |y: f64, x: f64| -> C64 {
        let zeta = match Point::scalar(Complex::new(x, y)) {
            Ok(p) => p,
            Err(_) => return Complex::new(f64::NAN, 0.0),
        };
        let a = kernel_closed(space, &zeta, w);
        let b = kernel_closed(space, &zeta, z);
        let rho = space.rho_base(&[y]);
        match (a, b, rho) {
            (Ok(a), Ok(b), Ok(r)) => a * b.conj() * r,
            _ => Complex::new(f64::NAN, 0.0),
        }
    };
    integrate_iterated(
        f,
        Interval::HalfLine { start: 0.0, scale: height },
        |y| Interval::Line { center, scale: y + height },
        cfg,
    )
}

/// Reproducing identity `K(z, w) = ∫ K(ζ, w) conj(K(ζ, z)) rho dA` at the given pairs.
pub fn check_self_reproduction(space: &SpaceSpec<f64>, pairs: &[(Point<f64>, Point<f64>)], cfg: &QuadratureConfig, tol: f64) -> CheckReport {
    let r = (|| {
        require_one_d(space)?;
        let k = loose(cfg);
        let errs: Vec<Result<f64>> = pairs
            .par_iter()
            .map(|(z, w)| {
                let integral = reproduction_integral(space, z, w, &k)?.require_converged()?;
                Ok(rel(integral.value, kernel_closed(space, z, w)?))
            })
            .collect();
        let mut worst: f64 = 0.0;
        for e in errs {
            worst = worst.max(e?);
        }
        let mut notes = family_notes(space);
        notes.push("reproducing form F(z) = ∫ F conj(K(·, z)) rho; equivalent to the unconjugated form by Hermitian symmetry".into());
        Ok((worst, notes))
    })();
    CheckReport::from_result(CheckKind::SelfReproduction, &space.label(), pairs.len(), tol, r)
}

/// The extremal function `F = K(·, ζ) / K(ζ, ζ)` has `F(ζ) = 1` and
/// `||F||^2 = 1 / K(ζ, ζ)`.
pub fn check_extremal(space: &SpaceSpec<f64>, points: &[Point<f64>], cfg: &QuadratureConfig, tol: f64) -> CheckReport {
    let r = (|| {
        require_one_d(space)?;
        let k = loose(cfg);
        let errs: Vec<Result<(f64, f64)>> = points
            .par_iter()
            .map(|zeta| {
                let kzz = kernel_closed(space, zeta, zeta)?;
                let f_at = kernel_closed(space, zeta, zeta)? / kzz;
                let norm_sq = reproduction_integral(space, zeta, zeta, &k)?.require_converged()?.value / (kzz * kzz);
                Ok((rel(norm_sq, kzz.inv()), (f_at - 1.0).norm()))
            })
            .collect();
        let mut worst: f64 = 0.0;
        let mut norm_err: f64 = 0.0;
        for e in errs {
            let (a, b) = e?;
            worst = worst.max(a);
            norm_err = norm_err.max(b);
        }
        let mut notes = family_notes(space);
        notes.push(format!("max |F(zeta) - 1| = {norm_err:e}"));
        Ok((worst.max(norm_err), notes))
    })();
    CheckReport::from_result(CheckKind::Extremal, &space.label(), points.len(), tol, r)
}

/// `||Lf||^2_{A^2_rho}` by quadrature over the half plane.
pub fn laplace_norm_sq(space: &SpaceSpec<f64>, f: &TestProfile, cfg: &QuadratureConfig) -> Result<IntegrationResult<f64>> {
    require_one_d(space)?;
    f.check_admissible(space)?;
    let t_typ = match *f {
        TestProfile::TruncatedExponential { rate, power } => (power + 1.0) / rate,
        TestProfile::GaussianBump { center, width, .. } => center.abs() + width,
        TestProfile::Zero => 1.0,
    };
    let s = 1.0 / (2.0 * PI * t_typ);
    let g = |y: f64, x: f64| -> f64 {
        let p = match Point::scalar(Complex::new(x, y)) {
            Ok(p) => p,
            Err(_) => return f64::NAN,
        };
        match (laplace_transform(f, &p), space.rho_base(&[y])) {
            (Ok(v), Ok(r)) => v.norm_sqr() * r,
            _ => f64::NAN,
        }
    };
    integrate_iterated(g, Interval::HalfLine { start: 0.0, scale: s }, |y| Interval::Line { center: 0.0, scale: s + y }, cfg)
}

/// `||Lf||^2_{A^2_rho} = ||f||^2_{L^2_I}` for each profile.
pub fn check_isometry(space: &SpaceSpec<f64>, profiles: &[TestProfile], cfg: &QuadratureConfig, tol: f64) -> CheckReport {
    let r = (|| {
        require_one_d(space)?;
        let errs: Vec<Result<(f64, String)>> = profiles
            .par_iter()
            .map(|f| {
                let rhs = f.norm_sq_l2i(space, cfg)?;
                let lhs = laplace_norm_sq(space, f, cfg)?.require_converged()?.value;
                let e = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { (lhs - rhs).abs() / rhs.abs() };
                Ok((e, format!("{f:?}: ||Lf||^2 = {lhs:.12e}, ||f||^2 = {rhs:.12e}")))
            })
            .collect();
        let mut worst: f64 = 0.0;
        let mut notes = family_notes(space);
        for e in errs {
            let (v, note) = e?;
            worst = worst.max(v);
            notes.push(note);
        }
        Ok((worst, notes))
    })();
    CheckReport::from_result(CheckKind::Isometry, &space.label(), profiles.len(), tol, r)
}

/// Two admissible truncated-exponential profiles per one-dimensional family.
pub fn default_profiles() -> [TestProfile; 2] {
    [
        TestProfile::TruncatedExponential { rate: 1.0, power: 2.0 },
        TestProfile::TruncatedExponential { rate: 2.0, power: 1.0 },
    ]
}

/// Fixed pairs for the reproduction check.
pub fn default_reproduction_pairs() -> Vec<(Point<f64>, Point<f64>)> {
    let p = |re: f64, im: f64| Point::scalar(Complex::new(re, im)).expect("finite");
    vec![
        (p(0.0, 1.0), p(0.0, 1.0)),
        (p(0.0, 1.0), p(0.5, 2.0)),
        (p(-1.0, 0.5), p(0.3, 1.5)),
        (p(2.0, 3.0), p(-1.0, 2.0)),
        (p(0.2, 0.4), p(0.1, 0.8)),
    ]
}

// ---------------------------------------------------------------------------
// point-evaluation bound

/// Minimum of the weight over the closed ball `B(z, delta)`.
///
/// Tube and Siegel weights depend on the point only through a pair
/// `(r, h)` (`|y'|, y_n` or `|z'|, Im z_n`; `x, y` for `n = 1`), and the
/// extreme values over the ball sit on its boundary in the plane spanned by
/// the radial and last directions, so the minimum over a circle suffices.
/// Ball weights are minimized over seeded samples of the ball, which can
/// only overestimate the minimum and thus understates the bound.
pub fn weight_minimum(space: &SpaceSpec<f64>, z: &Point<f64>, delta: f64, seed: u64) -> Result<f64> {
    let n = space.dim();
    match space.family() {
        Family::Ball { .. } => {
            let mut rng = seeded_rng(seed, 13);
            let mut best = space.rho(z)?;
            for k in 0..6000 {
                let g: Vec<f64> = (0..2 * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let gn = real_norm(&g);
                let radius = if k < 4000 { delta } else { delta * rng.random::<f64>().powf(1.0 / (2 * n) as f64) };
                let coords = z
                    .coords()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c + Complex::new(g[2 * j], g[2 * j + 1]) * (radius / gn))
                    .collect();
                best = best.min(space.rho(&Point::new(coords)?)?);
            }
            Ok(best)
        }
        _ => {
            let (r0, h0) = if n == 1 {
                (z.last().re, z.last().im)
            } else if let Family::Siegel { .. } = space.family() {
                (z.head().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(), z.last().im)
            } else {
                let y = z.im();
                (real_norm(&y[..n - 1]), y[n - 1])
            };
            let rho_at = |theta: f64| -> f64 {
                let (r, h) = (r0 + delta * theta.cos(), h0 + delta * theta.sin());
                let v = match space.family() {
                    Family::Siegel { .. } => {
                        let mut c = vec![Complex::new(0.0, 0.0); n];
                        if n > 1 {
                            c[0] = Complex::new(r, 0.0);
                        }
                        c[n - 1] = Complex::new(0.0, h);
                        Point::new(c).and_then(|p| space.rho(&p))
                    }
                    _ if n == 1 => space.rho_base(&[h]),
                    _ => {
                        let mut y = vec![0.0; n];
                        y[0] = r;
                        y[n - 1] = h;
                        space.rho_base(&y)
                    }
                };
                v.unwrap_or(0.0)
            };
            let m = 4096;
            let step = std::f64::consts::TAU / m as f64;
            let (mut arg, mut best) = (0.0, f64::INFINITY);
            for k in 0..m {
                let th = k as f64 * step;
                let v = rho_at(th);
                if v < best {
                    best = v;
                    arg = th;
                }
            }
            // golden-section refinement around the grid minimum
            let (mut a, mut b) = (arg - step, arg + step);
            let g = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..80 {
                let c = b - g * (b - a);
                let d = a + g * (b - a);
                if rho_at(c) < rho_at(d) {
                    b = d;
                } else {
                    a = c;
                }
            }
            Ok(best.min(rho_at(0.5 * (a + b))))
        }
    }
}

/// Evaluates the point-evaluation bound for `F = K(·, w) / sqrt(K(w, w))`
/// (unit norm) at `z` with `p = 2`: returns `(|F(z)|, bound)`.
pub fn point_eval_instance(space: &SpaceSpec<f64>, w: &Point<f64>, z: &Point<f64>, seed: u64) -> Result<(f64, f64)> {
    let n = space.dim();
    let domain = space.domain();
    if !domain.contains(z)? || !domain.contains(w)? {
        return Err(Error::Domain(format!("point outside the domain of {}", space.label())));
    }
    let kww = kernel_closed(space, w, w)?.re;
    let fz = kernel_closed(space, z, w)?.norm() / kww.sqrt();
    let delta = (domain.boundary_distance(z)? / 2.0).min(1.0);
    let eps = weight_minimum(space, z, delta, seed)?;
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let omega = PI.powi(n as i32) / factorial;
    Ok((fz, (omega * eps).powf(-0.5) * delta.powf(-(n as f64))))
}

/// Point-evaluation bound at `count` seeded instances; half of them have
/// `z` moved toward the boundary. Error: `max(0, |F(z)|/bound - 1)`.
pub fn check_point_eval_bound(space: &SpaceSpec<f64>, count: usize, seed: u64) -> CheckReport {
    let r = (|| {
        let ps = pairs(space, count, seed)?;
        let domain = space.domain();
        let mut worst: f64 = 0.0;
        let mut slack = f64::INFINITY;
        for (i, (w, z)) in ps.into_iter().enumerate() {
            let z = if i % 2 == 1 { toward_boundary(&domain, &z)? } else { z };
            let (fz, bound) = point_eval_instance(space, &w, &z, seed.wrapping_add(i as u64))?;
            worst = worst.max((fz / bound - 1.0).max(0.0));
            slack = slack.min(bound / fz);
        }
        Ok((worst, vec![format!("p = 2, F = K(·,w)/sqrt(K(w,w)); smallest bound/|F(z)| = {slack:.6e}")]))
    })();
    CheckReport::from_result(CheckKind::PointEvalBound, &space.label(), count, 0.0, r)
}

/// A point much closer to the boundary than `z`.
fn toward_boundary(domain: &Domain, z: &Point<f64>) -> Result<Point<f64>> {
    let base = z.clone();
    // bisection along the outward direction until the distance shrinks a hundredfold
    let d = domain.boundary_distance(&base)?;
    let target = 0.01 * d;
    let outward = outward_direction(domain, &base)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    let at = |s: f64| -> Result<Point<f64>> {
        Point::new(base.coords().iter().zip(&outward).map(|(c, u)| c + u * s).collect())
    };
    while domain.contains(&at(hi)?)? {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let p = at(mid)?;
        if domain.contains(&p)? && domain.boundary_distance(&p)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

fn outward_direction(domain: &Domain, z: &Point<f64>) -> Result<Vec<C64>> {
    let n = z.dim();
    Ok(match domain {
        Domain::Tube(base) => {
            let y = z.im();
            let p = base.nearest_boundary_point(&y)?;
            p.iter().zip(&y).map(|(a, b)| Complex::new(0.0, a - b)).collect()
        }
        Domain::Model(_) => {
            let norm = z.norm_sqr().sqrt();
            if domain.contains(z)? && matches!(domain, Domain::Model(m) if m.family() == crate::geometry::ModelFamily::UnitBall) {
                if norm > 0.0 {
                    z.coords().iter().map(|c| c / norm).collect()
                } else {
                    let mut v = vec![Complex::new(0.0, 0.0); n];
                    v[0] = Complex::new(1.0, 0.0);
                    v
                }
            } else {
                // Siegel: lower Im z_n
                let mut v = vec![Complex::new(0.0, 0.0); n];
                v[n - 1] = Complex::new(0.0, -1.0);
                v
            }
        }
    })
}

// ---------------------------------------------------------------------------
// biholomorphic pullback

/// The built-in map whose source is the model domain of `space`.
pub fn source_map(space: &SpaceSpec<f64>) -> Result<Biholomorphism> {
    match space.family() {
        Family::Siegel { .. } => Biholomorphism::siegel_to_paraboloid(space.dim()),
        Family::Ball { .. } => Biholomorphism::cayley_ball_to_siegel(space.dim()),
        _ => Err(Error::Unsupported(format!("no built-in map from the domain of {}", space.label()))),
    }
}

/// Pulled-back kernel against the direct closed form.
pub fn check_pullback(space: &SpaceSpec<f64>, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let phi = source_map(space)?;
        let target = pullback_target(&phi, space)?;
        let handle = KernelHandle::closed(target);
        let mut worst: f64 = 0.0;
        for (z, w) in pairs(space, samples, seed)? {
            worst = worst.max(rel(pullback_kernel(&phi, &handle, &z, &w)?, kernel_closed(space, &z, &w)?));
        }
        let mut notes = family_notes(space);
        notes.push(format!("{} from {}", phi.name(), target.label()));
        Ok((worst, notes))
    })();
    CheckReport::from_result(CheckKind::Pullback, &space.label(), samples, tol, r)
}

/// `rho_source(z) = rho_target(Φ(z))`, and for the Siegel map the inverse
/// form `Im(Φ^{-1}(w))_n - |Φ^{-1}(w)'|^2 = v_n - |v'|^2`.
pub fn check_weight_compatibility(space: &SpaceSpec<f64>, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let phi = source_map(space)?;
        let target = pullback_target(&phi, space)?;
        let mut worst: f64 = 0.0;
        for z in space.domain().sample_points(samples, seed)? {
            let a = space.rho(&z)?;
            let b = target.rho(&phi.forward(&z)?)?;
            worst = worst.max((a - b).abs() / a.abs().max(f64::MIN_POSITIVE));
        }
        if let Family::Siegel { .. } = space.family() {
            for w in phi.target().sample_points(samples, seed)? {
                let z = phi.inverse(&w)?;
                let lhs = z.last().im - z.head().iter().map(|c| c.norm_sqr()).sum::<f64>();
                let v = w.im();
                let n = v.len();
                let rhs = v[n - 1] - v[..n - 1].iter().map(|x| x * x).sum::<f64>();
                worst = worst.max((lhs - rhs).abs() / rhs.abs());
            }
        }
        Ok((worst, family_notes(space)))
    })();
    CheckReport::from_result(CheckKind::WeightCompatibility, &space.label(), samples, tol, r)
}

/// `Φ^{-1}∘Φ` and `Φ∘Φ^{-1}` are the identity on sampled points.
pub fn check_round_trip(phi: &Biholomorphism, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let label = format!("{} n={}", phi.name(), phi.dim());
    let r = (|| {
        let dist = |a: &Point<f64>, b: &Point<f64>| -> f64 {
            let d: f64 = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            d / (1.0 + b.norm_sqr().sqrt())
        };
        let mut worst: f64 = 0.0;
        for z in phi.source().sample_points(samples, seed)? {
            worst = worst.max(dist(&phi.inverse(&phi.forward(&z)?)?, &z));
        }
        for w in phi.target().sample_points(samples, seed)? {
            worst = worst.max(dist(&phi.forward(&phi.inverse(&w)?)?, &w));
        }
        Ok((worst, vec!["error relative to 1 + |point|".into()]))
    })();
    CheckReport::from_result(CheckKind::RoundTrip, &label, samples, tol, r)
}

/// `DΦ` against a central-difference complex Jacobian determinant, and
/// `D(Φ^{-1})(Φ(z)) DΦ(z) = 1`.
pub fn check_jacobian(phi: &Biholomorphism, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let label = format!("{} n={}", phi.name(), phi.dim());
    let r = (|| {
        let mut worst: f64 = 0.0;
        for z in phi.source().sample_points(samples, seed)? {
            let exact = phi.jac_det(&z)?;
            worst = worst.max(rel(finite_difference_det(phi, &z)?, exact));
            let inv = phi.inverse_jac_det(&phi.forward(&z)?)?;
            worst = worst.max((inv * exact - 1.0).norm());
            if exact.norm() == 0.0 {
                return Err(Error::Invariant("vanishing Jacobian determinant".into()));
            }
        }
        Ok((worst, vec!["central differences with step 1e-6".into()]))
    })();
    CheckReport::from_result(CheckKind::Jacobian, &label, samples, tol, r)
}

fn finite_difference_det(phi: &Biholomorphism, z: &Point<f64>) -> Result<C64> {
    let n = z.dim();
    let h = 1e-6;
    let mut m = vec![vec![Complex::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let shifted = |s: f64| -> Result<Point<f64>> {
            let mut v = z.coords().to_vec();
            v[j] += s;
            phi.forward(&Point::new(v)?)
        };
        let (p, q) = (shifted(h)?, shifted(-h)?);
        for (i, row) in m.iter_mut().enumerate() {
            row[j] = (p.coords()[i] - q.coords()[i]) / (2.0 * h);
        }
    }
    let mut det = Complex::new(1.0, 0.0);
    for k in 0..n {
        let piv = (k..n).max_by(|&a, &b| m[a][k].norm().total_cmp(&m[b][k].norm())).expect("non-empty");
        if piv != k {
            m.swap(piv, k);
            det = -det;
        }
        let p = m[k][k];
        det *= p;
        if p.norm() == 0.0 {
            return Ok(Complex::new(0.0, 0.0));
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        for row in bottom {
            let f = row[k] / p;
            for (x, t) in row[k..].iter_mut().zip(&top[k][k..]) {
                *x -= f * t;
            }
        }
    }
    Ok(det)
}

/// Ball kernel pulled back through the composed map in one step versus
/// two successive pullbacks.
pub fn check_chain_consistency(space: &SpaceSpec<f64>, samples: usize, tol: f64, seed: u64) -> CheckReport {
    let r = (|| {
        let Family::Ball { .. } = space.family() else {
            return Err(Error::Unsupported(format!("chain consistency starts from the ball, got {}", space.label())));
        };
        let n = space.dim();
        let cay = Biholomorphism::cayley_ball_to_siegel(n)?;
        let sie = Biholomorphism::siegel_to_paraboloid(n)?;
        let chain = cay.clone().then(sie.clone())?;
        let far = KernelHandle::closed(pullback_target(&chain, space)?);
        let mut worst: f64 = 0.0;
        for (z, w) in pairs(space, samples, seed)? {
            let direct = pullback_kernel(&chain, &far, &z, &w)?;
            let inner = pullback_kernel(&sie, &far, &cay.forward(&z)?, &cay.forward(&w)?)?;
            let stepped = cay.jac_det(&z)? * inner * cay.jac_det(&w)?.conj();
            worst = worst.max(rel(direct, stepped));
        }
        Ok((worst, vec![format!("{} from {}", chain.name(), far.space.label())]))
    })();
    CheckReport::from_result(CheckKind::ChainConsistency, &space.label(), samples, tol, r)
}

/// Reproducing identity on the disc by polar quadrature.
pub fn check_ball_reproduction(space: &SpaceSpec<f64>, pairs: &[(Point<f64>, Point<f64>)], cfg: &QuadratureConfig, tol: f64) -> CheckReport {
    let r = (|| {
        if !matches!(space.family(), Family::Ball { .. }) || space.dim() != 1 {
            return Err(Error::Unsupported(format!("ball reproduction needs the disc, got {}", space.label())));
        }
        let k = loose(cfg);
        let mut worst: f64 = 0.0;
        for (z, w) in pairs {
            let f = |r: f64, th: f64| -> C64 {
                let zeta = match Point::scalar(Complex::from_polar(r, th)) {
                    Ok(p) => p,
                    Err(_) => return Complex::new(f64::NAN, 0.0),
                };
                match (kernel_closed(space, &zeta, w), kernel_closed(space, &zeta, z), space.rho(&zeta)) {
                    (Ok(a), Ok(b), Ok(rho)) => a * b.conj() * rho * r,
                    _ => Complex::new(f64::NAN, 0.0),
                }
            };
            let integral = integrate_iterated(
                f,
                Interval::Finite { a: 0.0, b: 1.0 },
                |_| Interval::Finite { a: -PI, b: PI },
                &k,
            )?
            .require_converged()?;
            worst = worst.max(rel(integral.value, kernel_closed(space, z, w)?));
        }
        Ok((worst, family_notes(space)))
    })();
    CheckReport::from_result(CheckKind::BallReproduction, &space.label(), pairs.len(), tol, r)
}

// ---------------------------------------------------------------------------
// suites

/// The default parameter grid: `v, q, alpha` over three values each,
/// `n in {1, 2}`, plus Lorentz tubes at `n = 3`.
pub fn default_spaces() -> Vec<SpaceSpec<f64>> {
    let mut out = vec![SpaceSpec::unweighted_half_plane()];
    for v in [0.5, 1.0, 2.5] {
        out.push(SpaceSpec::half_plane_power(v).expect("valid"));
    }
    for q in [0.75, 1.0, 1.5] {
        out.push(SpaceSpec::bergman_selberg(q).expect("valid"));
    }
    for a in [0.0, 0.5, 1.5] {
        out.push(SpaceSpec::paraboloid(2, a).expect("valid"));
        out.push(SpaceSpec::lorentz(2, a).expect("valid"));
        out.push(SpaceSpec::lorentz(3, a).expect("valid"));
        for n in [1, 2] {
            out.push(SpaceSpec::siegel(n, a).expect("valid"));
            out.push(SpaceSpec::ball(n, a).expect("valid"));
        }
    }
    out
}

/// Every check applicable to `space`.
pub fn default_checks(space: &SpaceSpec<f64>) -> Vec<CheckKind> {
    CheckKind::ALL.into_iter().filter(|k| k.applies_to(space)).collect()
}

/// Runs one check with the default sample counts and tolerances.
pub fn run_check(space: &SpaceSpec<f64>, kind: CheckKind, opts: &VerifyOptions) -> Result<CheckReport> {
    if !kind.applies_to(space) {
        return Err(Error::Unsupported(format!("check {} does not apply to {}", kind.name(), space.label())));
    }
    let seed = opts.seed;
    let cfg = &opts.cfg;
    let n = space.dim();
    let mut report = match kind {
        CheckKind::Symmetry => check_symmetry(space, 500, 1e-12, seed),
        CheckKind::Diagonal => check_diagonal(space, 500, 1e-12, seed),
        CheckKind::NumericAgreement => {
            let (count, tol) = match (space.family(), n) {
                (_, 1) => (20, 1e-8),
                (Family::ParaboloidTube { .. }, _) => (10, 1e-5),
                (_, 2) => (10, 1e-4),
                _ => (4, 1.0),
            };
            check_numeric_agreement(space, count, cfg, tol, seed)
        }
        CheckKind::SymbolOracle => {
            if n <= 2 {
                check_symbol_oracle(space, 50, cfg, 1e-8, seed)
            } else {
                check_symbol_oracle(space, 4, cfg, 1.0, seed)
            }
        }
        CheckKind::LogConvexity => check_log_convexity(space, 200, 1e-9, seed),
        CheckKind::SelfReproduction => check_self_reproduction(space, &default_reproduction_pairs(), cfg, 1e-3),
        CheckKind::Extremal => {
            let pts: Vec<Point<f64>> = default_reproduction_pairs().into_iter().take(2).map(|p| p.1).collect();
            check_extremal(space, &pts, cfg, 1e-3)
        }
        CheckKind::Isometry => check_isometry(space, &default_profiles(), &cfg.with_rel_tol(cfg.rel_tol.min(1e-9)), 1e-6),
        CheckKind::PointEvalBound => check_point_eval_bound(space, 10, seed),
        CheckKind::Pullback => check_pullback(space, 200, 1e-11, seed),
        CheckKind::WeightCompatibility => check_weight_compatibility(space, 100, 1e-12, seed),
        CheckKind::RoundTrip => check_round_trip(&source_map(space)?, 1000, 1e-12, seed),
        CheckKind::Jacobian => check_jacobian(&source_map(space)?, 20, 1e-6, seed),
        CheckKind::ChainConsistency => check_chain_consistency(space, 200, 1e-12, seed),
        CheckKind::Homogeneity => check_lorentz_homogeneity(space, 200, 1e-12, seed),
        CheckKind::Degeneration => check_degeneration(space.alpha().unwrap_or(0.0), 200, 1e-12, seed),
        CheckKind::DiscSeries => check_disc_series(50, 1e-8, seed),
        CheckKind::BallReproduction => {
            let p = |re: f64, im: f64| Point::scalar(Complex::new(re, im)).expect("finite");
            check_ball_reproduction(space, &[(p(0.0, 0.0), p(0.0, 0.0)), (p(0.3, -0.2), p(-0.1, 0.4))], cfg, 1e-6)
        }
    };
    // suite reports are keyed by the space they were run for
    let label = space.label();
    if report.space != label {
        let own = std::mem::replace(&mut report.space, label);
        report.notes.insert(0, format!("subject: {own}"));
    }
    Ok(report)
}

/// Runs `kinds` on `space` in parallel; reports come back in `kinds` order.
pub fn run_suite(space: &SpaceSpec<f64>, kinds: &[CheckKind], opts: &VerifyOptions) -> Result<Vec<CheckReport>> {
    kinds.par_iter().map(|k| run_check(space, *k, opts)).collect()
}

/// Every applicable check on every space in `spaces`, in order.
pub fn run_default(spaces: &[SpaceSpec<f64>], opts: &VerifyOptions) -> Result<Vec<CheckReport>> {
    let per_space: Result<Vec<Vec<CheckReport>>> =
        spaces.par_iter().map(|s| run_suite(s, &default_checks(s), opts)).collect();
    Ok(per_space?.into_iter().flatten().collect())
}

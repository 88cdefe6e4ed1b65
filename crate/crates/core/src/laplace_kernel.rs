//! Reproducing kernels: closed forms for every family, numeric evaluation of
//! `K(z, w) = ∫_{U_I} e^{2 pi i t·(z - conj w)} / I(t) dt`, and the Laplace
//! transform `F(z) = ∫ f(t) e^{2 pi i z t} dt` of one-dimensional profiles.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Proposal, TubeBase, TubeFamily};
use crate::num_core::{bilinear, gamma, ln_gamma, principal_pow, real_norm, Float, Point};
use crate::quadrature::{
    integrate_cone_2d, integrate_finite, integrate_half_line, integrate_mc, integrate_semi_infinite,
    QuadratureConfig, Region2,
};
use crate::weights::{Family, SpaceSpec};

/// Kernel prefactor of each family.
///
/// | family | constant |
/// |---|---|
/// | unweighted half plane | `1/pi` |
/// | `y^{v-1}` | `2^{v-1} v / pi` |
/// | Bergman-Selberg | `2^{2q-3} Gamma(2q)` |
/// | paraboloid tube | `C1 = 2^{n+1+2a} Gamma(n+a+1) / (Gamma(a+1) pi^n)` |
/// | Siegel domain | `C2 = 2^{-2-a} C1` |
/// | unit ball | `C3 = 2^{1-3a-n} C2` |
/// | Lorentz tube | `C4 = 4^a Gamma(a+n/2+1) Gamma(2a+2n) Gamma(a+n/2+1/2) / (pi^n Gamma(a+1) Gamma(2a+n) Gamma(a+n+1/2))` |
pub fn constant<T: Float>(space: &SpaceSpec<T>) -> Result<T> {
    Ok(log_constant(space)?.exp())
}

fn log_constant<T: Float>(space: &SpaceSpec<T>) -> Result<T> {
    let n = T::lit(space.dim() as f64);
    let ln2 = T::lit(2.0).ln();
    let lnpi = T::PI().ln();
    let one = T::one();
    let half = T::lit(0.5);
    let c1 = |a: T| -> Result<T> { Ok((n + one + a + a) * ln2 + ln_gamma(n + a + one)? - ln_gamma(a + one)? - n * lnpi) };
    match space.family() {
        Family::UnweightedHalfPlane => Ok(-lnpi),
        Family::HalfPlanePower { v } => Ok((v - one) * ln2 + v.ln() - lnpi),
        Family::BergmanSelberg { q } => Ok((q + q - T::lit(3.0)) * ln2 + ln_gamma(q + q)?),
        Family::ParaboloidTube { alpha } => c1(alpha),
        Family::Siegel { alpha } => Ok(c1(alpha)? - (T::lit(2.0) + alpha) * ln2),
        Family::Ball { alpha } => {
            Ok(c1(alpha)? - (T::lit(2.0) + alpha) * ln2 + (one - T::lit(3.0) * alpha - n) * ln2)
        }
        Family::LorentzTube { alpha: a } => Ok((a + a) * ln2
            + ln_gamma(a + n * half + one)?
            + ln_gamma(a + a + n + n)?
            + ln_gamma(a + n * half + half)?
            - n * lnpi
            - ln_gamma(a + one)?
            - ln_gamma(a + a + n)?
            - ln_gamma(a + n + half)?),
    }
}

/// The constant `Gamma(2q)` that accompanies the Bergman-Selberg weight in
/// its customary normalization; it agrees with [`constant`] only at `q = 3/2`.
pub fn bergman_selberg_customary_constant<T: Float>(q: T) -> Result<T> {
    gamma(q + q)
}

fn pow<T: Float>(w: Complex<T>, s: T) -> Result<Complex<T>> {
    principal_pow(w, s).map_err(|e| match e {
        Error::BranchCut { re, im } => {
            Error::Invariant(format!("kernel argument {re} + {im}i on the branch cut for in-domain points"))
        }
        other => other,
    })
}

fn check_points<T: Float>(space: &SpaceSpec<T>, z: &Point<T>, w: &Point<T>) -> Result<()> {
    let domain = space.domain();
    for (name, p) in [("z", z), ("w", w)] {
        if !domain.contains(p)? {
            return Err(Error::Domain(format!("{name} is outside the domain of {}", space.label())));
        }
    }
    Ok(())
}

/// Paraboloid-tube kernel formula `C1 (ζ'·ζ' - 2i ζ_n)^{-n-a-1}`, `ζ = z - conj w`,
/// for any `n >= 1`; at `n = 1` it is the `y^a` half-plane kernel.
pub fn paraboloid_kernel_formula<T: Float>(n: usize, alpha: T, z: &Point<T>, w: &Point<T>) -> Result<Complex<T>> {
    if z.dim() != n || w.dim() != n {
        return Err(Error::Dimension { expected: n, got: if z.dim() != n { z.dim() } else { w.dim() } });
    }
    let nf = T::lit(n as f64);
    let one = T::one();
    let ln2 = T::lit(2.0).ln();
    let log_c1 = (nf + one + alpha + alpha) * ln2 + ln_gamma(nf + alpha + one)? - ln_gamma(alpha + one)? - nf * T::PI().ln();
    let zeta = z.minus_conj(w)?;
    let head = zeta.head();
    let arg = bilinear(head, head) - Complex::new(T::zero(), T::lit(2.0)) * zeta.last();
    Ok(pow(arg, -(nf + alpha + one))? * log_c1.exp())
}

/// Closed-form kernel `K(z, w)`.
pub fn kernel_closed<T: Float>(space: &SpaceSpec<T>, z: &Point<T>, w: &Point<T>) -> Result<Complex<T>> {
    check_points(space, z, w)?;
    let n = space.dim();
    let nf = T::lit(n as f64);
    let one = T::one();
    let i = Complex::new(T::zero(), one);
    let c = constant(space)?;
    let zeta = z.minus_conj(w)?;
    let zn = zeta.last();
    Ok(match space.family() {
        Family::UnweightedHalfPlane => {
            let r = i / zn;
            r * r * c
        }
        Family::HalfPlanePower { v } => pow(zn / i, -v - one)? * c,
        Family::BergmanSelberg { q } => pow(i / zn, q + q)? * c,
        Family::ParaboloidTube { alpha } => paraboloid_kernel_formula(n, alpha, z, w)?,
        Family::Siegel { alpha } => {
            let wb = w.conj();
            let arg = i * (wb.last() - z.last()) - bilinear(z.head(), wb.head()) * T::lit(2.0);
            pow(arg, -(nf + alpha + one))? * c
        }
        Family::Ball { alpha } => {
            let wb = w.conj();
            let a = pow(wb.last() + one, alpha)? * pow(z.last() + one, alpha)?;
            let b = pow(Complex::new(one, T::zero()) - bilinear(wb.coords(), z.coords()), -(nf + alpha + one))?;
            a * b * c
        }
        Family::LorentzTube { alpha } => {
            let head = zeta.head();
            let p = bilinear(head, head) - zn * zn;
            pow(p, -(alpha + nf))? * c
        }
    })
}

/// How a [`KernelHandle`] evaluates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelMode {
    ClosedForm,
    Numeric(QuadratureConfig),
}

/// A kernel value with its error estimate (absent for closed forms).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelValue {
    pub value: Complex<f64>,
    pub error_estimate: Option<f64>,
}

/// Evaluator for `K(z, w)` of one space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelHandle {
    pub space: SpaceSpec<f64>,
    pub mode: KernelMode,
}

impl KernelHandle {
    pub fn closed(space: SpaceSpec<f64>) -> Self {
        Self { space, mode: KernelMode::ClosedForm }
    }

    pub fn numeric(space: SpaceSpec<f64>, cfg: QuadratureConfig) -> Self {
        Self { space, mode: KernelMode::Numeric(cfg) }
    }

    pub fn eval(&self, z: &Point<f64>, w: &Point<f64>) -> Result<KernelValue> {
        match self.mode {
            KernelMode::ClosedForm => {
                Ok(KernelValue { value: kernel_closed(&self.space, z, w)?, error_estimate: None })
            }
            KernelMode::Numeric(cfg) => kernel_numeric(&self.space, z, w, &cfg),
        }
    }
}

/// `K(z, w)` by quadrature of the Fourier-Laplace integral with `1/I = 0`
/// off `U_I`: double-exponential rules for `n <= 2`, Monte Carlo for
/// Lorentz tubes with `n >= 3`. The tails are cut by the quadrature's own
/// negligible-term rule, which sees the `e^{-2 pi t·(Im z + Im w)}` decay.
pub fn kernel_numeric(space: &SpaceSpec<f64>, z: &Point<f64>, w: &Point<f64>, cfg: &QuadratureConfig) -> Result<KernelValue> {
    cfg.validate()?;
    let base = space.require_tube()?;
    check_points(space, z, w)?;
    let n = space.dim();
    let zeta = z.minus_conj(w)?;
    let tau = std::f64::consts::TAU;
    let phase = |t: &[f64]| -> Complex<f64> {
        let e: Complex<f64> = zeta.coords().iter().zip(t).map(|(c, &tk)| c * tk).sum();
        (Complex::new(0.0, tau) * e).exp()
    };
    let y = zeta.im();
    let decay: Vec<f64> = y.iter().map(|v| tau * v).collect();
    let integrand = |t: &[f64]| -> Complex<f64> {
        let inv = space.inverse_symbol(t).unwrap_or(0.0);
        if inv == 0.0 {
            Complex::new(0.0, 0.0)
        } else {
            phase(t) * inv
        }
    };
    let result = match (base.family(), n) {
        (TubeFamily::HalfLine, _) => integrate_semi_infinite(|t: f64| integrand(&[t]), decay[0], cfg)?.require_converged()?,
        (TubeFamily::Paraboloid, 2) => integrate_cone_2d(
            |t1: f64, t2: f64| integrand(&[t1, t2]),
            Region2::HalfPlane { curvature: std::f64::consts::PI },
            [decay[0], decay[1]],
            cfg,
        )?
        .require_converged()?,
        (TubeFamily::LorentzCone, 2) => integrate_cone_2d(
            |t1: f64, t2: f64| integrand(&[t1, t2]),
            Region2::LorentzCone,
            [decay[0], decay[1]],
            cfg,
        )?
        .require_converged()?,
        (TubeFamily::LorentzCone, _) => {
            let margin = y[n - 1] - real_norm(&y[..n - 1]);
            let cone = TubeBase::new(TubeFamily::LorentzCone, n)?;
            integrate_mc(integrand, &Proposal::new(cone, tau * margin)?, cfg)?
        }
        (TubeFamily::Paraboloid, _) => {
            return Err(Error::Unsupported(format!("numeric kernel for {} (n > 2)", space.label())))
        }
    };
    Ok(KernelValue { value: result.value, error_estimate: Some(result.error_estimate) })
}

/// Test functions `f` on `U_I = (0, inf)` for the Laplace transform.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestProfile {
    /// `t^power e^{-rate t}`.
    TruncatedExponential { rate: f64, power: f64 },
    /// `t^power e^{-(t - center)^2 / (2 width^2)}`.
    GaussianBump { center: f64, width: f64, power: f64 },
    /// `f = 0`.
    Zero,
}

impl TestProfile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            TestProfile::TruncatedExponential { rate, power } => rate > 0.0 && power >= 0.0 && rate.is_finite() && power.is_finite(),
            TestProfile::GaussianBump { center, width, power } => {
                center.is_finite() && width > 0.0 && width.is_finite() && power >= 0.0 && power.is_finite()
            }
            TestProfile::Zero => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid test profile {self:?}")))
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match *self {
            TestProfile::TruncatedExponential { rate, power } => t.powf(power) * (-rate * t).exp(),
            TestProfile::GaussianBump { center, width, power } => {
                let d = (t - center) / width;
                t.powf(power) * (-0.5 * d * d).exp()
            }
            TestProfile::Zero => 0.0,
        }
    }

    fn power(&self) -> f64 {
        match *self {
            TestProfile::TruncatedExponential { power, .. } | TestProfile::GaussianBump { power, .. } => power,
            TestProfile::Zero => f64::INFINITY,
        }
    }

    /// Rejects profiles whose `L^2_I` norm diverges at `t = 0` for a
    /// one-dimensional family with `I(t) ~ t^{-p}`: needs `2k - p + 1 > 0`.
    pub fn check_admissible(&self, space: &SpaceSpec<f64>) -> Result<()> {
        self.validate()?;
        let p = match space.family() {
            Family::UnweightedHalfPlane => 1.0,
            Family::HalfPlanePower { v } => v,
            Family::BergmanSelberg { q } => 2.0 * q - 1.0,
            _ => return Err(Error::Unsupported(format!("test profiles are one-dimensional; got {}", space.label()))),
        };
        let k = self.power();
        if 2.0 * k - p + 1.0 > 0.0 {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!("||f||_(L^2_I) diverges at t = 0 for {self:?} in {}", space.label())))
        }
    }

    /// `||f||^2_{L^2_I} = ∫ |f|^2 I dt` by quadrature.
    pub fn norm_sq_l2i(&self, space: &SpaceSpec<f64>, cfg: &QuadratureConfig) -> Result<f64> {
        self.check_admissible(space)?;
        if *self == TestProfile::Zero {
            return Ok(0.0);
        }
        let g = |t: f64| {
            let f = self.eval(t);
            if f == 0.0 {
                0.0
            } else {
                // log space: I overflows near t = 0 where f^2 I stays integrable
                match space.log_symbol_closed(&[t]) {
                    Ok(Some(log_i)) => (2.0 * f.abs().ln() + log_i).exp(),
                    _ => 0.0,
                }
            }
        };
        Ok(self.integrate_split(g, cfg)?.require_converged()?.value)
    }

    /// `∫_0^inf g` split at the profile's bulk so narrow bumps are resolved.
    fn integrate_split<V: crate::quadrature::QuadValue>(
        &self,
        g: impl Fn(f64) -> V + Copy,
        cfg: &QuadratureConfig,
    ) -> Result<crate::quadrature::IntegrationResult<V>> {
        match *self {
            TestProfile::GaussianBump { center, width, .. } if center > 0.0 => {
                let a = integrate_finite(g, 0.0, center, cfg)?;
                let b = integrate_half_line(g, center, width, cfg)?;
                Ok(crate::quadrature::IntegrationResult {
                    value: a.value + b.value,
                    error_estimate: a.error_estimate + b.error_estimate,
                    evals: a.evals + b.evals,
                    converged: a.converged && b.converged,
                })
            }
            TestProfile::GaussianBump { width, .. } => integrate_half_line(g, 0.0, width, cfg),
            TestProfile::TruncatedExponential { rate, .. } => integrate_semi_infinite(g, rate, cfg),
            TestProfile::Zero => integrate_semi_infinite(g, 1.0, cfg),
        }
    }
}

/// `F(z) = ∫_0^inf f(t) e^{2 pi i z t} dt` for `Im z > 0`; closed form for
/// truncated exponentials, quadrature otherwise.
pub fn laplace_transform(f: &TestProfile, z: &Point<f64>) -> Result<Complex<f64>> {
    laplace_transform_with(f, z, &QuadratureConfig::default())
}

pub fn laplace_transform_with(f: &TestProfile, z: &Point<f64>, cfg: &QuadratureConfig) -> Result<Complex<f64>> {
    f.validate()?;
    if z.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: z.dim() });
    }
    let zc = z.last();
    if zc.im.is_nan() || zc.im <= 0.0 {
        return Err(Error::Domain(format!("Laplace transform needs Im z > 0, got {zc}")));
    }
    match *f {
        TestProfile::Zero => Ok(Complex::new(0.0, 0.0)),
        TestProfile::TruncatedExponential { rate, power } => {
            let base = Complex::new(rate, 0.0) - Complex::new(0.0, std::f64::consts::TAU) * zc;
            Ok(principal_pow(base, -power - 1.0)? * gamma(power + 1.0)?)
        }
        TestProfile::GaussianBump { .. } => {
            let k = Complex::new(0.0, std::f64::consts::TAU) * zc;
            let g = move |t: f64| (k * t).exp() * f.eval(t);
            Ok(f.integrate_split(g, cfg)?.require_converged()?.value)
        }
    }
}

//! Weighted Bergman space descriptors, their weights `rho`, and the Laplace
//! symbol `I(t) = ∫_B rho(iy) e^{-4 pi y·t} dy` with its support `U_I`.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Domain, ModelDomain, ModelFamily, Proposal, TubeBase, TubeFamily};
use crate::num_core::{ln_gamma, real_norm, Float, Point};
use crate::quadrature::{integrate_cone_2d, integrate_mc, integrate_semi_infinite, QuadratureConfig, Region2};

/// Weight family and its parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family<T> {
    /// `rho = 1` on the upper half plane.
    UnweightedHalfPlane,
    /// `rho(iy) = y^{v-1}`, `v > 0`.
    HalfPlanePower { v: T },
    /// `rho(iy) = 2 y^{2q-2} / (pi Gamma(2q-1))`, `q > 1/2`.
    BergmanSelberg { q: T },
    /// `rho(iy) = (y_n - |y'|^2)^alpha` on the paraboloid tube.
    ParaboloidTube { alpha: T },
    /// `rho(iy) = Delta(y)^alpha` on the Lorentz tube.
    LorentzTube { alpha: T },
    /// `rho(z) = (Im z_n - |z'|^2)^alpha` on the Siegel domain.
    Siegel { alpha: T },
    /// `rho(z) = 4^alpha (1 - |z|^2)^alpha / |1 + z_n|^{2 alpha}` on the unit ball.
    Ball { alpha: T },
}

/// A weighted Bergman space: family, parameter and dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceSpec<T> {
    family: Family<T>,
    dim: usize,
}

impl<T: Float> SpaceSpec<T> {
    /// Validates parameter ranges and the dimension for the family.
    pub fn new(family: Family<T>, dim: usize) -> Result<Self> {
        let bad = |what: String| Err(Error::InvalidParameter(what));
        let check_alpha = |a: T| a.is_finite() && a > -T::one();
        match family {
            Family::UnweightedHalfPlane => {}
            Family::HalfPlanePower { v } => {
                if !(v.is_finite() && v > T::zero()) {
                    return bad(format!("halfplane-power needs v > 0, got {v}"));
                }
            }
            Family::BergmanSelberg { q } => {
                if !(q.is_finite() && q > T::lit(0.5)) {
                    return bad(format!("bergman-selberg needs q > 1/2, got {q}"));
                }
            }
            Family::ParaboloidTube { alpha }
            | Family::LorentzTube { alpha }
            | Family::Siegel { alpha }
            | Family::Ball { alpha } => {
                if !check_alpha(alpha) {
                    return bad(format!("alpha must be > -1, got {alpha}"));
                }
            }
        }
        let dim_ok = match family {
            Family::UnweightedHalfPlane | Family::HalfPlanePower { .. } | Family::BergmanSelberg { .. } => dim == 1,
            Family::ParaboloidTube { .. } | Family::LorentzTube { .. } => dim >= 2,
            Family::Siegel { .. } | Family::Ball { .. } => dim >= 1,
        };
        if !dim_ok {
            return bad(format!("{} cannot have dimension {dim}", family_name(&family)));
        }
        Ok(Self { family, dim })
    }

    pub fn unweighted_half_plane() -> Self {
        Self { family: Family::UnweightedHalfPlane, dim: 1 }
    }

    pub fn half_plane_power(v: T) -> Result<Self> {
        Self::new(Family::HalfPlanePower { v }, 1)
    }

    pub fn bergman_selberg(q: T) -> Result<Self> {
        Self::new(Family::BergmanSelberg { q }, 1)
    }

    pub fn paraboloid(n: usize, alpha: T) -> Result<Self> {
        Self::new(Family::ParaboloidTube { alpha }, n)
    }

    pub fn lorentz(n: usize, alpha: T) -> Result<Self> {
        Self::new(Family::LorentzTube { alpha }, n)
    }

    pub fn siegel(n: usize, alpha: T) -> Result<Self> {
        Self::new(Family::Siegel { alpha }, n)
    }

    pub fn ball(n: usize, alpha: T) -> Result<Self> {
        Self::new(Family::Ball { alpha }, n)
    }

    pub fn family(&self) -> Family<T> {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The `alpha` parameter of the multi-dimensional families.
    pub fn alpha(&self) -> Option<T> {
        match self.family {
            Family::ParaboloidTube { alpha }
            | Family::LorentzTube { alpha }
            | Family::Siegel { alpha }
            | Family::Ball { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Tube families have `x`-independent weights and a Laplace symbol.
    pub fn is_tube(&self) -> bool {
        !matches!(self.family, Family::Siegel { .. } | Family::Ball { .. })
    }

    pub fn tube_base(&self) -> Option<TubeBase> {
        let family = match self.family {
            Family::UnweightedHalfPlane | Family::HalfPlanePower { .. } | Family::BergmanSelberg { .. } => {
                TubeFamily::HalfLine
            }
            Family::ParaboloidTube { .. } => TubeFamily::Paraboloid,
            Family::LorentzTube { .. } => TubeFamily::LorentzCone,
            _ => return None,
        };
        TubeBase::new(family, self.dim).ok()
    }

    pub fn domain(&self) -> Domain {
        match self.family {
            Family::Siegel { .. } => Domain::Model(ModelDomain::new(ModelFamily::Siegel, self.dim).expect("validated")),
            Family::Ball { .. } => Domain::Model(ModelDomain::new(ModelFamily::UnitBall, self.dim).expect("validated")),
            _ => Domain::Tube(self.tube_base().expect("tube family")),
        }
    }

    pub(crate) fn require_tube(&self) -> Result<TubeBase> {
        self.tube_base().ok_or_else(|| {
            Error::Unsupported(format!("{} is not tube-eligible; use pullback", family_name(&self.family)))
        })
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: len });
        }
        Ok(())
    }

    /// Short identifier, e.g. `paraboloid n=2 alpha=1.5`.
    pub fn label(&self) -> String {
        let name = family_name(&self.family);
        match self.family {
            Family::UnweightedHalfPlane => name.to_string(),
            Family::HalfPlanePower { v } => format!("{name} v={v}"),
            Family::BergmanSelberg { q } => format!("{name} q={q}"),
            _ => format!("{name} n={} alpha={}", self.dim, self.alpha().expect("alpha family")),
        }
    }

    pub fn to_f64(&self) -> SpaceSpec<f64> {
        let c = |x: T| x.as_f64();
        let family = match self.family {
            Family::UnweightedHalfPlane => Family::UnweightedHalfPlane,
            Family::HalfPlanePower { v } => Family::HalfPlanePower { v: c(v) },
            Family::BergmanSelberg { q } => Family::BergmanSelberg { q: c(q) },
            Family::ParaboloidTube { alpha } => Family::ParaboloidTube { alpha: c(alpha) },
            Family::LorentzTube { alpha } => Family::LorentzTube { alpha: c(alpha) },
            Family::Siegel { alpha } => Family::Siegel { alpha: c(alpha) },
            Family::Ball { alpha } => Family::Ball { alpha: c(alpha) },
        };
        SpaceSpec { family, dim: self.dim }
    }

    /// The weight at `z`; zero outside the domain.
    pub fn rho(&self, z: &Point<T>) -> Result<T> {
        self.check_len(z.dim())?;
        if !self.domain().contains(z)? {
            return Ok(T::zero());
        }
        match self.family {
            Family::Siegel { alpha } => {
                let h = z.head().iter().fold(T::zero(), |a, c| a + c.norm_sqr());
                Ok((z.last().im - h).powf(alpha))
            }
            Family::Ball { alpha } => {
                let one_plus = (z.last() + T::one()).norm_sqr();
                Ok((T::lit(4.0) * (T::one() - z.norm_sqr()) / one_plus).powf(alpha))
            }
            _ => self.rho_base(&z.im()),
        }
    }

    /// The weight of a tube family as a function of `y = Im z`; zero off `B`.
    pub fn rho_base(&self, y: &[T]) -> Result<T> {
        let base = self.require_tube()?;
        if !base.contains(y)? {
            return Ok(T::zero());
        }
        let n = self.dim;
        let yn = y[n - 1];
        let head = &y[..n - 1];
        Ok(match self.family {
            Family::UnweightedHalfPlane => T::one(),
            Family::HalfPlanePower { v } => yn.powf(v - T::one()),
            Family::BergmanSelberg { q } => {
                let two_q = q + q;
                let log = T::lit(2.0).ln() - T::PI().ln() - ln_gamma(two_q - T::one())?;
                log.exp() * yn.powf(two_q - T::lit(2.0))
            }
            Family::ParaboloidTube { alpha } => {
                (yn - head.iter().fold(T::zero(), |a, &v| a + v * v)).powf(alpha)
            }
            Family::LorentzTube { alpha } => {
                let r = real_norm(head);
                ((yn - r) * (yn + r)).powf(alpha)
            }
            Family::Siegel { .. } | Family::Ball { .. } => unreachable!("require_tube"),
        })
    }

    /// Strict membership of `t` in `U_I`.
    pub fn in_support(&self, t: &[T]) -> Result<bool> {
        let base = self.require_tube()?;
        self.check_len(t.len())?;
        if t.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        let n = self.dim;
        Ok(match base.family() {
            TubeFamily::HalfLine | TubeFamily::Paraboloid => t[n - 1] > T::zero(),
            TubeFamily::LorentzCone => t[n - 1] > real_norm(&t[..n - 1]),
        })
    }

    /// `ln I(t)` in closed form, or `None` off `U_I`.
    pub fn log_symbol_closed(&self, t: &[T]) -> Result<Option<T>> {
        if !self.in_support(t)? {
            return Ok(None);
        }
        let n = self.dim;
        let tn = t[n - 1];
        let four_pi = T::lit(4.0) * T::PI();
        let ln_4pi_t = (four_pi * tn).ln();
        Ok(Some(match self.family {
            Family::UnweightedHalfPlane => -ln_4pi_t,
            Family::HalfPlanePower { v } => ln_gamma(v)? - v * ln_4pi_t,
            Family::BergmanSelberg { q } => {
                T::lit(2.0).ln() - T::PI().ln() - (q + q - T::one()) * ln_4pi_t
            }
            Family::ParaboloidTube { alpha } => {
                let nf = T::lit(n as f64);
                let head2 = t[..n - 1].iter().fold(T::zero(), |a, &v| a + v * v);
                (T::one() - nf) * T::lit(2.0).ln() + ln_gamma(alpha + T::one())?
                    - (alpha + T::one()) * four_pi.ln()
                    + T::PI() * head2 / tn
                    + ((T::one() - nf) * T::lit(0.5) - alpha - T::one()) * tn.ln()
            }
            Family::LorentzTube { alpha } => {
                let r = real_norm(&t[..n - 1]);
                let log_delta = (tn - r).ln() + (tn + r).ln();
                log_lorentz_symbol_constant(alpha, n)? - (alpha + T::lit(n as f64 * 0.5)) * log_delta
            }
            Family::Siegel { .. } | Family::Ball { .. } => unreachable!("in_support requires a tube"),
        }))
    }

    /// `I(t)` in closed form; [`SymbolValue::Infinite`] off `U_I`.
    pub fn symbol_closed(&self, t: &[T]) -> Result<SymbolValue<T>> {
        Ok(match self.log_symbol_closed(t)? {
            Some(l) => SymbolValue::Finite(l.exp()),
            None => SymbolValue::Infinite,
        })
    }

    /// `1 / I(t)`, exactly zero off `U_I`.
    pub fn inverse_symbol(&self, t: &[T]) -> Result<T> {
        Ok(match self.log_symbol_closed(t)? {
            Some(l) => (-l).exp(),
            None => T::zero(),
        })
    }
}

impl SpaceSpec<f64> {
    /// `I(t)` by direct quadrature of its defining integral: deterministic
    /// rules for `n <= 2`, importance-sampled Monte Carlo for `n >= 3`.
    pub fn symbol_numeric(&self, t: &[f64], cfg: &QuadratureConfig) -> Result<NumericSymbol> {
        cfg.validate()?;
        let base = self.require_tube()?;
        if !self.in_support(t)? {
            return Ok(NumericSymbol { value: SymbolValue::Infinite, error_estimate: 0.0, evals: 0, monte_carlo: false });
        }
        let four_pi = 4.0 * std::f64::consts::PI;
        let n = self.dim;
        let alpha = self.alpha().unwrap_or(0.0);
        let (result, mc) = match (base.family(), n) {
            (TubeFamily::HalfLine, _) => {
                let f = |y: f64| self.rho_base(&[y]).unwrap_or(0.0) * (-four_pi * y * t[0]).exp();
                (integrate_semi_infinite(f, four_pi * t[0], cfg)?.require_converged()?, false)
            }
            (TubeFamily::Paraboloid, 2) => {
                let f = |y1: f64, y2: f64| {
                    let s = y2 - y1 * y1;
                    if s > 0.0 {
                        s.powf(alpha) * (-four_pi * (t[0] * y1 + t[1] * y2)).exp()
                    } else {
                        0.0
                    }
                };
                let r = integrate_cone_2d(f, Region2::Paraboloid, [four_pi * t[0], four_pi * t[1]], cfg)?;
                (r.require_converged()?, false)
            }
            (TubeFamily::LorentzCone, 2) => {
                let f = |y1: f64, y2: f64| {
                    let d = (y2 - y1) * (y2 + y1);
                    if d > 0.0 {
                        d.powf(alpha) * (-four_pi * (t[0] * y1 + t[1] * y2)).exp()
                    } else {
                        0.0
                    }
                };
                let r = integrate_cone_2d(f, Region2::LorentzCone, [four_pi * t[0], four_pi * t[1]], cfg)?;
                (r.require_converged()?, false)
            }
            (family, _) => {
                let margin = match family {
                    TubeFamily::LorentzCone => t[n - 1] - real_norm(&t[..n - 1]),
                    _ => t[n - 1],
                };
                let proposal = Proposal::new(base, 0.9 * four_pi * margin)?;
                let f = |y: &[f64]| {
                    let dot: f64 = y.iter().zip(t).map(|(a, b)| a * b).sum();
                    self.rho_base(y).unwrap_or(0.0) * (-four_pi * dot).exp()
                };
                (integrate_mc(f, &proposal, cfg)?, true)
            }
        };
        Ok(NumericSymbol {
            value: SymbolValue::Finite(result.value),
            error_estimate: result.error_estimate,
            evals: result.evals,
            monte_carlo: mc,
        })
    }
}

/// `I(t)`: a positive number on `U_I`, infinite off it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SymbolValue<T> {
    Finite(T),
    Infinite,
}

impl<T: Float> SymbolValue<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, SymbolValue::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            SymbolValue::Finite(v) => Some(v),
            SymbolValue::Infinite => None,
        }
    }

    /// `1/I`, with `1/inf = 0`.
    pub fn reciprocal(&self) -> T {
        match *self {
            SymbolValue::Finite(v) => v.recip(),
            SymbolValue::Infinite => T::zero(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for SymbolValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolValue::Finite(v) => write!(f, "{v}"),
            SymbolValue::Infinite => write!(f, "inf"),
        }
    }
}

/// A numerically integrated symbol value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericSymbol {
    pub value: SymbolValue<f64>,
    /// Quadrature error estimate, or the standard error for Monte Carlo.
    pub error_estimate: f64,
    pub evals: usize,
    pub monte_carlo: bool,
}

pub(crate) fn family_name<T>(family: &Family<T>) -> &'static str {
    match family {
        Family::UnweightedHalfPlane => "unweighted-halfplane",
        Family::HalfPlanePower { .. } => "halfplane-power",
        Family::BergmanSelberg { .. } => "bergman-selberg",
        Family::ParaboloidTube { .. } => "paraboloid",
        Family::LorentzTube { .. } => "lorentz",
        Family::Siegel { .. } => "siegel",
        Family::Ball { .. } => "ball",
    }
}

fn log_lorentz_symbol_constant<T: Float>(alpha: T, n: usize) -> Result<T> {
    let nf = T::lit(n as f64);
    let half = T::lit(0.5);
    Ok((nf - T::one()) * half * T::PI().ln() + ln_gamma(alpha + T::one())? + ln_gamma(alpha + alpha + nf)?
        - ln_gamma(alpha + (nf + T::one()) * half)?
        - (alpha + alpha + nf) * (T::lit(4.0) * T::PI()).ln())
}

/// Constant `c` in the Lorentz-tube symbol `I(t) = c Delta(t)^{-alpha-n/2}`, `n >= 2`.
pub fn lorentz_symbol_constant<T: Float>(alpha: T, n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Lorentz cone needs n >= 2, got {n}")));
    }
    Ok(log_lorentz_symbol_constant(alpha, n)?.exp())
}

/// The alternative form of the Lorentz symbol constant containing
/// `Gamma(n/2 - 1) Gamma(1/2) / Gamma((n-1)/2)`; it differs from
/// [`lorentz_symbol_constant`] by exactly that factor and is undefined at `n = 2`.
pub fn lorentz_symbol_constant_sphere_form<T: Float>(alpha: T, n: usize) -> Result<T> {
    if n < 3 {
        return Err(Error::Domain(format!("Gamma(n/2 - 1) diverges at n = {n}")));
    }
    let nf = T::lit(n as f64);
    let half = T::lit(0.5);
    let log_factor = ln_gamma(nf * half - T::one())? + ln_gamma(half)? - ln_gamma((nf - T::one()) * half)?;
    Ok((log_lorentz_symbol_constant(alpha, n)? + log_factor).exp())
}

//! Double-exponential quadrature on finite intervals, half-lines and the
//! real line; iterated rules over two-dimensional cones; seeded Monte Carlo.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets shared by all integrators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-14, max_evals: 2_000_000, mc_samples: 1_000_000, seed: 0 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol.is_finite() && self.abs_tol >= 0.0) {
            return Err(Error::InvalidParameter(format!("abs_tol must be >= 0, got {}", self.abs_tol)));
        }
        if self.max_evals < 1000 {
            return Err(Error::InvalidParameter(format!("max_evals must be >= 1000, got {}", self.max_evals)));
        }
        if self.mc_samples == 0 {
            return Err(Error::InvalidParameter("mc_samples must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn tolerance(&self, value: f64) -> f64 {
        (self.rel_tol * value).max(self.abs_tol)
    }
}

/// Outcome of one integration. `converged` implies
/// `error_estimate <= max(rel_tol |value|, abs_tol)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationResult<V = Complex<f64>> {
    pub value: V,
    pub error_estimate: f64,
    pub evals: usize,
    pub converged: bool,
}

impl<V: QuadValue> IntegrationResult<V> {
    fn exact(value: V) -> Self {
        Self { value, error_estimate: 0.0, evals: 1, converged: true }
    }

    /// Converts a non-converged result into [`Error::Convergence`].
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            let c = self.value.to_complex();
            Err(Error::Convergence {
                value_re: c.re,
                value_im: c.im,
                error_estimate: self.error_estimate,
                evals: self.evals,
            })
        }
    }
}

/// Values an integrator can accumulate.
pub trait QuadValue:
    Copy + Debug + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> Complex<f64>;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn to_complex(&self) -> Complex<f64> {
        Complex::new(*self, 0.0)
    }
}

impl QuadValue for Complex<f64> {
    fn zero() -> Self {
        Complex::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex<f64> {
        *self
    }
}

/// A proposal distribution with a known density, used for importance sampling.
pub trait Sampler: Sync {
    fn dim(&self) -> usize;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64>;
    fn density(&self, y: &[f64]) -> f64;
}

/// Generator for stream `stream` of seed `seed`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

// ---------------------------------------------------------------------------
// double-exponential core

const MAX_LEVEL: usize = 12;
const H0: f64 = 0.5;
const TAIL_RATIO: f64 = 1e-17;

/// A one-dimensional integration range and the double-exponential rule
/// used on it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Interval {
    /// `[a, b]`, tanh-sinh.
    Finite { a: f64, b: f64 },
    /// `(start, inf)` with length scale `scale`, exp-sinh.
    HalfLine { start: f64, scale: f64 },
    /// The real line around `center` with width `scale`, sinh-sinh.
    Line { center: f64, scale: f64 },
}

impl Interval {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Interval::Finite { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(Error::InvalidParameter(format!("finite interval needs a < b, got [{a}, {b}]")));
                }
                Ok(())
            }
            Interval::HalfLine { start, scale } => {
                if !start.is_finite() {
                    return Err(Error::InvalidParameter("half-line start must be finite".into()));
                }
                check_positive("half-line scale", scale)
            }
            Interval::Line { center, scale } => {
                if !center.is_finite() {
                    return Err(Error::InvalidParameter("line center must be finite".into()));
                }
                check_positive("line scale", scale)
            }
        }
    }

    fn cap(&self) -> f64 {
        match self {
            Interval::Finite { .. } | Interval::Line { .. } => 4.5,
            Interval::HalfLine { .. } => 6.0,
        }
    }

    /// Abscissa and weight at parameter `u`, or `None` once the abscissa is
    /// no longer strictly inside the interval or not representable.
    fn node(&self, u: f64) -> Option<(f64, f64)> {
        let s = FRAC_PI_2 * u.sinh();
        let ds = FRAC_PI_2 * u.cosh();
        let (x, w) = match *self {
            Interval::Finite { a, b } => {
                let e = (-2.0 * s.abs()).exp();
                let dist = (b - a) * e / (1.0 + e);
                let x = if u >= 0.0 { b - dist } else { a + dist };
                if !(x > a && x < b) {
                    return None;
                }
                (x, (b - a) * 0.5 * ds * 4.0 * e / ((1.0 + e) * (1.0 + e)))
            }
            Interval::HalfLine { start, scale } => {
                let g = s.exp();
                let x = start + scale * g;
                if x.is_nan() || x <= start {
                    return None;
                }
                (x, scale * g * ds)
            }
            Interval::Line { center, scale } => (center + scale * s.sinh(), scale * s.cosh() * ds),
        };
        (x.is_finite() && w.is_finite()).then_some((x, w))
    }
}

struct LevelState<V> {
    sum: V,
    err_sum: f64,
    max_term: f64,
    evals: usize,
    finite: bool,
}

impl<V: QuadValue> LevelState<V> {
    /// Adds nodes `u0, u0 + step, ...` (or the mirrored sequence) until the
    /// terms become negligible.
    fn walk(&mut self, rule: &Interval, f: &mut dyn FnMut(f64) -> IntegrationResult<V>, u0: f64, step: f64) {
        let cap = rule.cap();
        let mut u = u0;
        let mut small = 0;
        while u.abs() <= cap {
            let Some((x, w)) = rule.node(u) else { break };
            let r = f(x);
            self.evals += r.evals;
            let term = r.value * w;
            let mag = term.magnitude();
            if !mag.is_finite() {
                self.finite = false;
                break;
            }
            self.sum = self.sum + term;
            self.err_sum += w.abs() * r.error_estimate;
            self.max_term = self.max_term.max(mag);
            if self.max_term > 0.0 && mag <= TAIL_RATIO * self.max_term {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            u += step;
        }
    }
}

fn de_integrate<V: QuadValue>(
    rule: Interval,
    f: &mut dyn FnMut(f64) -> IntegrationResult<V>,
    cfg: &QuadratureConfig,
) -> IntegrationResult<V> {
    let mut st = LevelState { sum: V::zero(), err_sum: 0.0, max_term: 0.0, evals: 0, finite: true };
    let mut h = H0;
    st.walk(&rule, f, 0.0, h);
    st.walk(&rule, f, -h, -h);
    let mut estimate = st.sum * h;
    let mut best: Option<IntegrationResult<V>> = None;

    for level in 1..=MAX_LEVEL {
        if st.evals >= cfg.max_evals || !st.finite {
            break;
        }
        h *= 0.5;
        st.walk(&rule, f, h, 2.0 * h);
        st.walk(&rule, f, -h, -2.0 * h);
        let next = st.sum * h;
        let err = (next - estimate).magnitude() + h * st.err_sum;
        estimate = next;
        if !st.finite {
            break;
        }
        let candidate = IntegrationResult {
            value: next,
            error_estimate: err,
            evals: st.evals,
            converged: level >= 2 && err <= cfg.tolerance(next.magnitude()),
        };
        if candidate.converged {
            return candidate;
        }
        if best.is_none_or(|b| err < b.error_estimate) {
            best = Some(candidate);
        }
    }

    match best {
        Some(mut b) if st.finite => {
            b.evals = st.evals;
            b
        }
        _ => IntegrationResult { value: estimate, error_estimate: f64::INFINITY, evals: st.evals, converged: false },
    }
}

/// Inner integrals of nested rules run ten times tighter than the outer one,
/// since their error estimates add up across outer nodes.
fn inner_cfg(cfg: &QuadratureConfig) -> QuadratureConfig {
    QuadratureConfig { rel_tol: cfg.rel_tol * 0.1, abs_tol: cfg.abs_tol * 0.1, ..*cfg }
}

fn leaf<V: QuadValue>(f: impl Fn(f64) -> V) -> impl FnMut(f64) -> IntegrationResult<V> {
    move |x| IntegrationResult::exact(f(x))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// `∫_a^b f` by the tanh-sinh rule; endpoint singularities are allowed.
pub fn integrate_finite<V: QuadValue>(f: impl Fn(f64) -> V, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<IntegrationResult<V>> {
    integrate_on(f, Interval::Finite { a, b }, cfg)
}

/// `∫ f` over `interval`.
pub fn integrate_on<V: QuadValue>(f: impl Fn(f64) -> V, interval: Interval, cfg: &QuadratureConfig) -> Result<IntegrationResult<V>> {
    interval.validate()?;
    Ok(de_integrate(interval, &mut leaf(f), cfg))
}

/// `∫_outer ∫_inner(o) f(o, i) di do`; inner errors are propagated into the
/// outer estimate.
pub fn integrate_iterated<V: QuadValue>(
    f: impl Fn(f64, f64) -> V,
    outer: Interval,
    inner: impl Fn(f64) -> Interval,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    outer.validate()?;
    let icfg = inner_cfg(cfg);
    let mut g = |o: f64| {
        let range = inner(o);
        if range.validate().is_err() {
            return IntegrationResult { value: V::zero(), error_estimate: f64::INFINITY, evals: 1, converged: false };
        }
        de_integrate(range, &mut leaf(|i: f64| f(o, i)), &icfg)
    };
    Ok(de_integrate(outer, &mut g, cfg))
}

/// `∫_0^inf f` for `|f(t)| <= M e^{-decay_rate t}`.
pub fn integrate_semi_infinite<V: QuadValue>(
    f: impl Fn(f64) -> V,
    decay_rate: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    integrate_half_line(f, 0.0, 1.0 / decay_rate, cfg)
}

/// `∫_start^inf f` with length scale `scale`.
pub fn integrate_half_line<V: QuadValue>(
    f: impl Fn(f64) -> V,
    start: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    integrate_on(f, Interval::HalfLine { start, scale }, cfg)
}

/// `∫_R f` for integrands concentrated near `center` with width `scale`.
pub fn integrate_line<V: QuadValue>(
    f: impl Fn(f64) -> V,
    center: f64,
    scale: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    integrate_on(f, Interval::Line { center, scale }, cfg)
}

/// Two-dimensional integration regions with the coordinates used to
/// flatten them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region2 {
    /// `{y_2 > y_1^2}`, coordinates `s = y_2 - y_1^2`, `y_1`.
    Paraboloid,
    /// `{y_2 > |y_1|}`, coordinates `a = y_2 - y_1`, `b = y_2 + y_1` (Jacobian 1/2).
    LorentzCone,
    /// `{t_2 > 0}` for integrands carrying `e^{-curvature t_1^2 / t_2}`.
    HalfPlane { curvature: f64 },
}

/// `∫_region f(y_1, y_2) dy` for integrands decaying like `e^{-decay·y}`
/// (times a Gaussian factor for the paraboloid and half-plane regions).
pub fn integrate_cone_2d<V: QuadValue>(
    f: impl Fn(f64, f64) -> V,
    region: Region2,
    decay: [f64; 2],
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    let [d1, d2] = decay;
    let icfg = inner_cfg(cfg);
    if !(d1.is_finite() && d2.is_finite()) {
        return Err(Error::InvalidParameter("decay vector must be finite".into()));
    }
    match region {
        Region2::Paraboloid => {
            check_positive("paraboloid decay d2", d2)?;
            let center = -d1 / (2.0 * d2);
            let width = (0.5 / d2).sqrt();
            let mut outer = |s: f64| {
                de_integrate(Interval::Line { center, scale: width }, &mut leaf(|y1: f64| f(y1, s + y1 * y1)), &icfg)
            };
            Ok(de_integrate(Interval::HalfLine { start: 0.0, scale: 1.0 / d2 }, &mut outer, cfg))
        }
        Region2::LorentzCone => {
            let (da, db) = ((d2 - d1) * 0.5, (d2 + d1) * 0.5);
            check_positive("light-cone decay d2 - |d1|", da.min(db))?;
            let mut outer = |a: f64| {
                de_integrate(
                    Interval::HalfLine { start: 0.0, scale: 1.0 / db },
                    &mut leaf(|b: f64| f(0.5 * (b - a), 0.5 * (a + b)) * 0.5),
                    &icfg,
                )
            };
            Ok(de_integrate(Interval::HalfLine { start: 0.0, scale: 1.0 / da }, &mut outer, cfg))
        }
        Region2::HalfPlane { curvature } => {
            check_positive("half-plane curvature", curvature)?;
            let eff = d2 - d1 * d1 / (4.0 * curvature);
            check_positive("effective half-plane decay", eff)?;
            let mut outer = |t2: f64| {
                let center = -d1 * t2 / (2.0 * curvature);
                let width = (t2 / (2.0 * curvature)).sqrt();
                de_integrate(Interval::Line { center, scale: width }, &mut leaf(|t1: f64| f(t1, t2)), &icfg)
            };
            Ok(de_integrate(Interval::HalfLine { start: 0.0, scale: 1.0 / eff }, &mut outer, cfg))
        }
    }
}

const MC_CHUNK: usize = 1 << 14;

/// Importance-sampled `∫ f` with standard-error estimate. Samples are split
/// into fixed chunks, chunk `k` drawn from stream `k` of `cfg.seed`, and
/// reduced in chunk order, so results do not depend on thread scheduling.
pub fn integrate_mc<V: QuadValue, S: Sampler>(
    f: impl Fn(&[f64]) -> V + Sync,
    sampler: &S,
    cfg: &QuadratureConfig,
) -> Result<IntegrationResult<V>> {
    let n = cfg.mc_samples;
    if n == 0 {
        return Err(Error::DegenerateSampler("zero samples requested".into()));
    }
    let chunks = n.div_ceil(MC_CHUNK);
    let partial: Vec<(V, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(cfg.seed, k as u64);
            let len = MC_CHUNK.min(n - k * MC_CHUNK);
            let mut sum = V::zero();
            let mut sq = 0.0;
            let mut effective = 0;
            for _ in 0..len {
                let y = sampler.sample(&mut rng);
                let p = sampler.density(&y);
                if p > 0.0 && p.is_finite() {
                    let x = f(&y) * (1.0 / p);
                    let m = x.magnitude();
                    sum = sum + x;
                    sq += m * m;
                    effective += 1;
                }
            }
            (sum, sq, effective)
        })
        .collect();

    let (mut sum, mut sq, mut effective) = (V::zero(), 0.0, 0usize);
    for (s, q, e) in partial {
        sum = sum + s;
        sq += q;
        effective += e;
    }
    if effective == 0 {
        return Err(Error::DegenerateSampler("no sample had positive proposal density".into()));
    }
    let nf = n as f64;
    let mean = sum * (1.0 / nf);
    let m = mean.magnitude();
    let var = (sq / nf - m * m).max(0.0);
    let stderr = if n > 1 { (var / (nf - 1.0)).sqrt() } else { f64::INFINITY };
    Ok(IntegrationResult {
        value: mean,
        error_estimate: stderr,
        evals: n,
        converged: stderr <= cfg.tolerance(m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        assert!(QuadratureConfig { rel_tol: 0.0, ..cfg() }.validate().is_err());
        assert!(QuadratureConfig { max_evals: 999, ..cfg() }.validate().is_err());
    }

    #[test]
    fn semi_infinite_examples() {
        let r = integrate_semi_infinite(|t: f64| (-t).exp(), 1.0, &cfg()).unwrap();
        assert!(r.converged && (r.value - 1.0).abs() < 1e-12);
        let r = integrate_semi_infinite(|t: f64| 4.0 * PI * t * (-4.0 * PI * t).exp(), 4.0 * PI, &cfg()).unwrap();
        assert!((r.value - 1.0 / (4.0 * PI)).abs() < 1e-12);
        let r = integrate_semi_infinite(|t: f64| (-t).exp() * (10.0 * t).sin(), 1.0, &cfg()).unwrap();
        assert!((r.value - 10.0 / 101.0).abs() < 1e-10, "{r:?}");
        // dense Riemann-sum cross-check of the Laplace table value
        let h = 1e-4;
        let riemann: f64 = (0..400_000).map(|i| {
            let t = (i as f64 + 0.5) * h;
            (-t).exp() * (10.0 * t).sin() * h
        }).sum();
        assert!((riemann - 10.0 / 101.0).abs() < 1e-7);
        assert!(integrate_semi_infinite(|t: f64| t, 0.0, &cfg()).is_err());
    }

    type Case = (&'static str, Box<dyn Fn(&QuadratureConfig) -> IntegrationResult<Complex<f64>>>, Complex<f64>);

    fn corpus() -> Vec<Case> {
        let re = |v: f64| Complex::new(v, 0.0);
        let c = |r: Result<IntegrationResult<f64>>| {
            let r = r.unwrap();
            IntegrationResult { value: Complex::new(r.value, 0.0), error_estimate: r.error_estimate, evals: r.evals, converged: r.converged }
        };
        vec![
            ("exp", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| (-t).exp(), 1.0, k))), re(1.0)),
            ("exp-sin", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| (-t).exp() * (10.0 * t).sin(), 1.0, k))), re(10.0 / 101.0)),
            ("t2-exp3", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| t * t * (-3.0 * t).exp(), 3.0, k))), re(2.0 / 27.0)),
            ("rsqrt-exp", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| (-t).exp() / t.sqrt(), 1.0, k))), re(PI.sqrt())),
            ("exp-cos", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| (-2.0 * t).exp() * t.cos(), 2.0, k))), re(0.4)),
            ("alg2", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| 1.0 / ((1.0 + t) * (1.0 + t)), 1.0, k))), re(1.0)),
            ("lorentzian-half", Box::new(move |k: &QuadratureConfig| c(integrate_semi_infinite(|t: f64| 1.0 / (1.0 + t * t), 1.0, k))), re(PI / 2.0)),
            ("rsqrt", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, k))), re(2.0)),
            ("log", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| x.ln(), 0.0, 1.0, k))), re(-1.0)),
            ("circle", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, k))), re(PI / 4.0)),
            ("sin", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| x.sin(), 0.0, PI, k))), re(2.0)),
            ("runge", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| 1.0 / (1.0 + 25.0 * x * x), -1.0, 1.0, k))), re(0.4 * 5.0f64.atan())),
            ("cubic", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| x * x * x, 0.0, 1.0, k))), re(0.25)),
            ("expx", Box::new(move |k: &QuadratureConfig| c(integrate_finite(|x: f64| x.exp(), 0.0, 1.0, k))), re(E - 1.0)),
            ("gauss", Box::new(move |k: &QuadratureConfig| c(integrate_line(|x: f64| (-x * x).exp(), 0.0, 1.0, k))), re(PI.sqrt())),
            ("lorentzian", Box::new(move |k: &QuadratureConfig| c(integrate_line(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, k))), re(PI)),
            ("gauss-cos", Box::new(move |k: &QuadratureConfig| c(integrate_line(|x: f64| (-x * x).exp() * (3.0 * x).cos(), 0.0, 1.0, k))), re(PI.sqrt() * (-2.25f64).exp())),
            ("sech", Box::new(move |k: &QuadratureConfig| c(integrate_line(|x: f64| 1.0 / x.cosh(), 0.0, 1.0, k))), re(PI)),
            ("shifted-gauss", Box::new(move |k: &QuadratureConfig| c(integrate_line(|x: f64| (-(x - 1.0) * (x - 1.0) / 2.0).exp(), 1.0, 1.0, k))), re((2.0 * PI).sqrt())),
            ("complex-exp", Box::new(move |k: &QuadratureConfig| integrate_semi_infinite(|t: f64| (Complex::new(-1.0, 2.0) * t).exp(), 1.0, k).unwrap()), Complex::new(1.0, 0.0) / Complex::new(1.0, -2.0)),
        ]
    }

    #[test]
    fn error_honesty_on_corpus() {
        let corpus = corpus();
        assert_eq!(corpus.len(), 20);
        for k in [cfg(), cfg().with_rel_tol(1e-6), QuadratureConfig { max_evals: 1000, ..cfg() }] {
            let mut honest = 0;
            for (name, run, truth) in &corpus {
                let r = run(&k);
                let gap = (r.value - truth).norm();
                if gap <= 5.0 * r.error_estimate.max(f64::EPSILON * truth.norm()) {
                    honest += 1;
                } else {
                    eprintln!("{name}: gap {gap:e} est {:e}", r.error_estimate);
                }
            }
            assert!(honest >= 19, "honest {honest}/20 at {k:?}");
        }
    }

    #[test]
    fn corpus_converges_at_default_tolerance() {
        for (name, run, truth) in corpus() {
            let r = run(&cfg());
            assert!(r.converged, "{name}: {r:?}");
            assert!((r.value - truth).norm() <= 1e-8 * truth.norm(), "{name}: {r:?}");
        }
    }

    #[test]
    fn monotone_refinement() {
        for (name, run, _) in corpus() {
            let mut prev = f64::INFINITY;
            for budget in [1000, 2000, 4000, 8000, 16000] {
                let r = run(&QuadratureConfig { max_evals: budget, rel_tol: 1e-15, abs_tol: 0.0, ..cfg() });
                assert!(r.error_estimate <= prev, "{name} at {budget}");
                prev = r.error_estimate;
            }
        }
    }

    #[test]
    fn cone_examples() {
        let r = integrate_cone_2d(|y1: f64, y2: f64| (-(y1 * y1 + y2)).exp(), Region2::Paraboloid, [0.0, 1.0], &cfg()).unwrap();
        assert!(r.converged);
        // nested 1-D reference: inner ∫_{y1^2}^inf e^{-y2} dy2 = e^{-y1^2}
        let reference = integrate_line(|y1: f64| (-2.0 * y1 * y1).exp(), 0.0, 1.0, &cfg()).unwrap().value;
        assert!((r.value - reference).abs() < 1e-9 * reference);
        assert!((reference - (PI / 2.0).sqrt()).abs() < 1e-12);

        let r = integrate_cone_2d(|_: f64, y2: f64| (-4.0 * PI * y2).exp(), Region2::LorentzCone, [0.0, 4.0 * PI], &cfg()).unwrap();
        assert!((r.value - 1.0 / (8.0 * PI * PI)).abs() < 1e-10 / (8.0 * PI * PI), "{r:?}");

        let r = integrate_cone_2d(|_: f64, _: f64| 0.0, Region2::LorentzCone, [0.0, 1.0], &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);

        // ∫_{t2>0} ∫ e^{-t1^2/t2 - t2} dt1 dt2 = ∫ sqrt(pi t2) e^{-t2} = pi/2
        let r = integrate_cone_2d(|t1: f64, t2: f64| (-t1 * t1 / t2 - t2).exp(), Region2::HalfPlane { curvature: 1.0 }, [0.0, 1.0], &cfg()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{r:?}");
        assert!(integrate_cone_2d(|_: f64, _: f64| 0.0, Region2::LorentzCone, [1.0, 1.0], &cfg()).is_err());
    }

    struct Unit;
    impl Sampler for Unit {
        fn dim(&self) -> usize {
            1
        }
        fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
            vec![rng.random::<f64>()]
        }
        fn density(&self, y: &[f64]) -> f64 {
            if (0.0..1.0).contains(&y[0]) { 1.0 } else { 0.0 }
        }
    }

    struct Nowhere;
    impl Sampler for Nowhere {
        fn dim(&self) -> usize {
            1
        }
        fn sample<R: Rng + ?Sized>(&self, _: &mut R) -> Vec<f64> {
            vec![0.0]
        }
        fn density(&self, _: &[f64]) -> f64 {
            0.0
        }
    }

    #[test]
    fn monte_carlo_contracts() {
        let k = QuadratureConfig { mc_samples: 50_000, ..cfg() };
        let r = integrate_mc(|y: &[f64]| Unit.density(y), &Unit, &k).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.error_estimate, 0.0);
        let a = integrate_mc(|y: &[f64]| y[0] * y[0], &Unit, &k).unwrap();
        let b = integrate_mc(|y: &[f64]| y[0] * y[0], &Unit, &k).unwrap();
        assert_eq!(a, b);
        assert!((a.value - 1.0 / 3.0).abs() < 4.0 * a.error_estimate);
        let c = integrate_mc(|y: &[f64]| y[0] * y[0], &Unit, &k.with_seed(1)).unwrap();
        assert_ne!(a.value, c.value);
        assert!(matches!(integrate_mc(|_: &[f64]| 1.0, &Nowhere, &k), Err(Error::DegenerateSampler(_))));
    }
}

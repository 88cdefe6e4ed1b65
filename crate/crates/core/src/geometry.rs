//! Base sets of tube domains and the two model domains (Siegel domain and
//! unit ball): strict membership, Euclidean boundary distance, and seeded
//! interior samplers with known densities.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::num_core::{ln_gamma, real_norm, unit_ball_volume, Float, Point};
use crate::quadrature::Sampler;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TubeFamily {
    /// `{y > 0}`, `n = 1`.
    HalfLine,
    /// `{y_n > |y'|^2}`, `n >= 2`.
    Paraboloid,
    /// `{y_n > |y'|}`, `n >= 2`.
    LorentzCone,
}

/// The base `B` of a tube domain `T_B = {x + iy : y in B}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TubeBase {
    family: TubeFamily,
    dim: usize,
}

impl TubeBase {
    pub fn new(family: TubeFamily, dim: usize) -> Result<Self> {
        let ok = match family {
            TubeFamily::HalfLine => dim == 1,
            TubeFamily::Paraboloid | TubeFamily::LorentzCone => dim >= 2,
        };
        if !ok {
            return Err(Error::InvalidParameter(format!("{family:?} base cannot have dimension {dim}")));
        }
        Ok(Self { family, dim })
    }

    pub fn half_line() -> Self {
        Self { family: TubeFamily::HalfLine, dim: 1 }
    }

    pub fn family(&self) -> TubeFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: len });
        }
        Ok(())
    }

    /// Strict membership of `y` in `B`.
    pub fn contains<T: Float>(&self, y: &[T]) -> Result<bool> {
        self.check_dim(y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Ok(false);
        }
        let (head, last) = y.split_at(self.dim - 1);
        let yn = last[0];
        Ok(match self.family {
            TubeFamily::HalfLine => yn > T::zero(),
            TubeFamily::Paraboloid => yn > head.iter().fold(T::zero(), |a, &v| a + v * v),
            TubeFamily::LorentzCone => yn > real_norm(head),
        })
    }

    /// Membership of `z` in the tube `T_B`.
    pub fn contains_point<T: Float>(&self, z: &Point<T>) -> Result<bool> {
        self.contains(&z.im())
    }

    /// Euclidean distance from `y in B` to the boundary of `B`.
    pub fn boundary_distance<T: Float>(&self, y: &[T]) -> Result<T> {
        if !self.contains(y)? {
            return Err(Error::Domain(format!("{:?} base does not contain the point", self.family)));
        }
        let (head, last) = y.split_at(self.dim - 1);
        let yn = last[0];
        Ok(match self.family {
            TubeFamily::HalfLine => yn,
            TubeFamily::LorentzCone => (yn - real_norm(head)) / T::lit(2.0).sqrt(),
            TubeFamily::Paraboloid => parabola_projection(real_norm(head), yn).1,
        })
    }

    /// The point of `∂B` realizing [`boundary_distance`](Self::boundary_distance).
    pub fn nearest_boundary_point<T: Float>(&self, y: &[T]) -> Result<Vec<T>> {
        if !self.contains(y)? {
            return Err(Error::Domain(format!("{:?} base does not contain the point", self.family)));
        }
        let (head, last) = y.split_at(self.dim - 1);
        let yn = last[0];
        let rho = real_norm(head);
        let dir: Vec<T> = if rho > T::zero() {
            head.iter().map(|&v| v / rho).collect()
        } else {
            let mut e = vec![T::zero(); head.len()];
            if let Some(first) = e.first_mut() {
                *first = T::one();
            }
            e
        };
        let (r, h) = match self.family {
            TubeFamily::HalfLine => return Ok(vec![T::zero()]),
            TubeFamily::LorentzCone => {
                let s = (rho + yn) * T::lit(0.5);
                (s, s)
            }
            TubeFamily::Paraboloid => {
                let r = parabola_projection(rho, yn).0;
                (r, r * r)
            }
        };
        let mut p: Vec<T> = dir.into_iter().map(|d| d * r).collect();
        p.push(h);
        Ok(p)
    }

    /// Points strictly inside `B` drawn from [`Proposal`] with unit rate;
    /// deterministic in `seed`.
    pub fn sample_interior(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let proposal = Proposal::new(*self, 1.0)?;
        let mut rng = crate::quadrature::seeded_rng(seed, 0);
        Ok((0..count).map(|_| proposal.sample(&mut rng)).collect())
    }
}

/// Projection of `(rho, h)`, `h > rho^2`, onto the parabola `{(r, r^2)}`:
/// returns the foot abscissa `r >= 0` and the distance.
///
/// Critical points solve `2r^3 + (1 - 2h) r - rho = 0`; each monotone piece
/// of the cubic is searched by safeguarded Newton iteration.
pub(crate) fn parabola_projection<T: Float>(rho: T, h: T) -> (T, T) {
    let two = T::lit(2.0);
    let cubic = |r: T| two * r * r * r + (T::one() - two * h) * r - rho;
    let slope = |r: T| T::lit(6.0) * r * r + T::one() - two * h;
    let dist2 = |r: T| (r - rho) * (r - rho) + (r * r - h) * (r * r - h);

    let upper = rho.max(h.max(T::zero()).sqrt()) + T::one();
    let mut breaks = vec![T::zero()];
    if h > T::lit(0.5) {
        let rc = ((two * h - T::one()) / T::lit(6.0)).sqrt();
        if rc < upper {
            breaks.push(rc);
        }
    }
    breaks.push(upper);

    let mut candidates = vec![T::zero()];
    for win in breaks.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        let (flo, fhi) = (cubic(lo), cubic(hi));
        if flo == T::zero() {
            candidates.push(lo);
        }
        if fhi == T::zero() {
            candidates.push(hi);
        }
        if (flo < T::zero()) == (fhi < T::zero()) {
            continue;
        }
        candidates.push(safeguarded_root(&cubic, &slope, lo, hi));
    }

    let mut best = (T::zero(), dist2(T::zero()));
    for r in candidates {
        let d = dist2(r);
        if d < best.1 {
            best = (r, d);
        }
    }
    (best.0, best.1.sqrt())
}

fn safeguarded_root<T: Float>(f: &impl Fn(T) -> T, df: &impl Fn(T) -> T, mut lo: T, mut hi: T) -> T {
    let lo_negative = f(lo) < T::zero();
    let mut x = (lo + hi) * T::lit(0.5);
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..200 {
        let fx = f(x);
        if fx == T::zero() {
            return x;
        }
        if (fx < T::zero()) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let mut next = if d != T::zero() { x - fx / d } else { lo };
        if !(next > lo && next < hi) {
            next = (lo + hi) * T::lit(0.5);
        }
        if (next - x).abs() <= tol * x.abs().max(T::one()) || (hi - lo) <= tol * hi.abs().max(T::one()) {
            return next;
        }
        x = next;
    }
    x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    /// `Omega_n = {Im z_n > |z'|^2}`.
    Siegel,
    /// `B_n = {|z| < 1}`.
    UnitBall,
}

/// A non-tube model domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModelDomain {
    family: ModelFamily,
    dim: usize,
}

impl ModelDomain {
    pub fn new(family: ModelFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("model domain dimension must be at least 1".into()));
        }
        Ok(Self { family, dim })
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains<T: Float>(&self, z: &Point<T>) -> Result<bool> {
        if z.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: z.dim() });
        }
        Ok(match self.family {
            ModelFamily::Siegel => z.last().im > head_norm_sqr(z),
            ModelFamily::UnitBall => z.norm_sqr() < T::one(),
        })
    }

    /// Euclidean distance (in `R^{2n}`) to the boundary.
    ///
    /// For the Siegel domain the nearest boundary point shares `Re z_n` and
    /// the direction of `z'`, which reduces the problem to the parabola
    /// projection of `(|z'|, Im z_n)`.
    pub fn boundary_distance<T: Float>(&self, z: &Point<T>) -> Result<T> {
        if !self.contains(z)? {
            return Err(Error::Domain(format!("{:?} does not contain the point", self.family)));
        }
        Ok(match self.family {
            ModelFamily::Siegel => parabola_projection(head_norm_sqr(z).sqrt(), z.last().im).1,
            ModelFamily::UnitBall => T::one() - z.norm_sqr().sqrt(),
        })
    }
}

fn head_norm_sqr<T: Float>(z: &Point<T>) -> T {
    z.head().iter().fold(T::zero(), |a, c| a + c.norm_sqr())
}

/// The domain a weighted Bergman space lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Tube(TubeBase),
    Model(ModelDomain),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Tube(b) => b.dim(),
            Domain::Model(m) => m.dim(),
        }
    }

    pub fn contains<T: Float>(&self, z: &Point<T>) -> Result<bool> {
        match self {
            Domain::Tube(b) => {
                if z.dim() != b.dim() {
                    return Err(Error::Dimension { expected: b.dim(), got: z.dim() });
                }
                b.contains_point(z)
            }
            Domain::Model(m) => m.contains(z),
        }
    }

    /// Distance from `z` to the boundary of the domain; for tubes this is the
    /// distance from `Im z` to `∂B`.
    pub fn boundary_distance<T: Float>(&self, z: &Point<T>) -> Result<T> {
        match self {
            Domain::Tube(b) => {
                if z.dim() != b.dim() {
                    return Err(Error::Dimension { expected: b.dim(), got: z.dim() });
                }
                b.boundary_distance(&z.im())
            }
            Domain::Model(m) => m.boundary_distance(z),
        }
    }
}

impl Domain {
    /// Seeded interior points: tubes use `x` uniform in `[-2, 2]^n` and
    /// `y` from the unit-rate [`Proposal`]; the Siegel domain draws `z'`
    /// Gaussian and `Im z_n = |z'|^2 + Exp(1)`; the ball draws uniformly from
    /// the ball of radius 0.9.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Point<f64>>> {
        if count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let mut rng = crate::quadrature::seeded_rng(seed, 1);
        let n = self.dim();
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let coords: Vec<num_complex::Complex<f64>> = match self {
                Domain::Tube(base) => {
                    let y = Proposal::new(*base, 1.0)?.sample(&mut rng);
                    y.into_iter().map(|yk| num_complex::Complex::new(rng.random_range(-2.0..2.0), yk)).collect()
                }
                Domain::Model(m) if m.family() == ModelFamily::Siegel => {
                    let mut c: Vec<num_complex::Complex<f64>> = (0..n - 1)
                        .map(|_| num_complex::Complex::new(0.6 * rng.sample::<f64, _>(StandardNormal), 0.6 * rng.sample::<f64, _>(StandardNormal)))
                        .collect();
                    let h: f64 = c.iter().map(|v| v.norm_sqr()).sum();
                    let s: f64 = rng.sample(Exp1);
                    c.push(num_complex::Complex::new(rng.random_range(-2.0..2.0), h + s));
                    c
                }
                Domain::Model(_) => {
                    let g: Vec<f64> = (0..2 * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                    let gn = real_norm(&g);
                    let r = 0.9 * rng.random::<f64>().powf(1.0 / (2 * n) as f64);
                    (0..n).map(|k| num_complex::Complex::new(r * g[2 * k] / gn, r * g[2 * k + 1] / gn)).collect()
                }
            };
            let z = Point::new(coords)?;
            if self.contains(&z)? {
                out.push(z);
            }
        }
        Ok(out)
    }
}

/// Interior proposal density on a tube base.
///
/// * half-line: `y ~ Exp(rate)`;
/// * Lorentz cone: `y_n ~ Gamma(n, rate)`, `y' = y_n u` with `u` uniform in
///   the unit ball of `R^{n-1}`; density `rate^n e^{-rate y_n} / (Gamma(n) V_{n-1})`;
/// * paraboloid: `s = y_n - |y'|^2 ~ Exp(rate)`, `y' ~ N(0, spread^2 I)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Proposal {
    base: TubeBase,
    rate: f64,
    spread: f64,
}

impl Proposal {
    pub fn new(base: TubeBase, rate: f64) -> Result<Self> {
        Self::with_spread(base, rate, 1.0)
    }

    pub fn with_spread(base: TubeBase, rate: f64, spread: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0 && spread.is_finite() && spread > 0.0) {
            return Err(Error::InvalidParameter(format!("proposal needs rate, spread > 0 (got {rate}, {spread})")));
        }
        Ok(Self { base, rate, spread })
    }

    pub fn base(&self) -> TubeBase {
        self.base
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.base.dim();
        let exp = |rng: &mut R| -> f64 { rng.sample::<f64, _>(Exp1) / self.rate };
        match self.base.family() {
            TubeFamily::HalfLine => vec![exp(rng)],
            TubeFamily::LorentzCone => {
                let yn: f64 = (0..n).map(|_| exp(rng)).sum();
                let m = n - 1;
                let g: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let gn = real_norm(&g);
                let radius = rng.random::<f64>().powf(1.0 / m as f64);
                let mut y: Vec<f64> = g.iter().map(|v| yn * radius * v / gn).collect();
                y.push(yn);
                y
            }
            TubeFamily::Paraboloid => {
                let mut y: Vec<f64> =
                    (0..n - 1).map(|_| self.spread * rng.sample::<f64, _>(StandardNormal)).collect();
                let s = exp(rng);
                let h: f64 = y.iter().map(|v| v * v).sum();
                y.push(s + h);
                y
            }
        }
    }
}

impl Sampler for Proposal {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        loop {
            let y = self.draw(rng);
            if self.base.contains(&y).unwrap_or(false) {
                return y;
            }
        }
    }

    fn density(&self, y: &[f64]) -> f64 {
        if !self.base.contains(y).unwrap_or(false) {
            return 0.0;
        }
        let n = self.base.dim();
        let yn = y[n - 1];
        match self.base.family() {
            TubeFamily::HalfLine => self.rate * (-self.rate * yn).exp(),
            TubeFamily::LorentzCone => {
                let log = n as f64 * self.rate.ln() - self.rate * yn - ln_gamma(n as f64).unwrap_or(0.0);
                log.exp() / unit_ball_volume::<f64>(n - 1)
            }
            TubeFamily::Paraboloid => {
                let head = &y[..n - 1];
                let h: f64 = head.iter().map(|v| v * v).sum();
                let s = yn - h;
                let var = self.spread * self.spread;
                let gauss = (-h / (2.0 * var)).exp() / (std::f64::consts::TAU * var).powf((n - 1) as f64 / 2.0);
                self.rate * (-self.rate * s).exp() * gauss
            }
        }
    }
}

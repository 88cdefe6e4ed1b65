//! Scalar plumbing shared by every kernel formula: the [`Float`] bound,
//! complex points in `C^n`, real gamma/beta functions and principal-branch
//! complex powers.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive};

use crate::error::{Error, Result};

/// Real scalar type the analytic layer is generic over (`f32` or `f64`).
pub trait Float:
    num_traits::Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}

/// A point `z = (z', z_n)` of `C^n`, `n >= 1`, with finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    coords: Vec<Complex<T>>,
}

impl<T: Float> Point<T> {
    pub fn new(coords: Vec<Complex<T>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("a point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    /// Builds `x + iy` from real and imaginary parts.
    pub fn from_parts(re: &[T], im: &[T]) -> Result<Self> {
        if re.len() != im.len() {
            return Err(Error::Dimension { expected: re.len(), got: im.len() });
        }
        Self::new(re.iter().zip(im).map(|(&x, &y)| Complex::new(x, y)).collect())
    }

    pub fn scalar(c: Complex<T>) -> Result<Self> {
        Self::new(vec![c])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex<T>] {
        &self.coords
    }

    /// `z'`, the first `n - 1` coordinates (empty when `n = 1`).
    pub fn head(&self) -> &[Complex<T>] {
        &self.coords[..self.coords.len() - 1]
    }

    /// `z_n`, the last coordinate.
    pub fn last(&self) -> Complex<T> {
        self.coords[self.coords.len() - 1]
    }

    pub fn re(&self) -> Vec<T> {
        self.coords.iter().map(|c| c.re).collect()
    }

    pub fn im(&self) -> Vec<T> {
        self.coords.iter().map(|c| c.im).collect()
    }

    pub fn conj(&self) -> Self {
        Self { coords: self.coords.iter().map(|c| c.conj()).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { coords: self.coords.iter().map(|&c| c * s).collect() }
    }

    /// `|z|^2 = sum |z_k|^2`.
    pub fn norm_sqr(&self) -> T {
        self.coords.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// `z - conj(w)`, the argument every tube kernel depends on.
    pub fn minus_conj(&self, w: &Self) -> Result<Self> {
        if self.dim() != w.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: w.dim() });
        }
        Ok(Self { coords: self.coords.iter().zip(&w.coords).map(|(a, b)| a - b.conj()).collect() })
    }

    pub fn to_f64(&self) -> Point<f64> {
        Point {
            coords: self.coords.iter().map(|c| Complex::new(c.re.as_f64(), c.im.as_f64())).collect(),
        }
    }
}

/// Bilinear (non-conjugated) product `sum a_k b_k`.
pub fn bilinear<T: Float>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter().zip(b).fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x * y)
}

/// Euclidean norm of a real vector.
pub fn real_norm<T: Float>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum<T: Float>(x: T) -> T {
    // x is the shifted argument (Gamma(x + 1) form)
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::lit(i as f64));
    }
    acc
}

fn check_positive<T: Float>(name: &str, x: T) -> Result<()> {
    if !x.is_finite() || x <= T::zero() {
        return Err(Error::Domain(format!("{name} requires a finite positive argument, got {x}")));
    }
    Ok(())
}

/// `Gamma(x)` for real `x > 0`.
pub fn gamma<T: Float>(x: T) -> Result<T> {
    check_positive("gamma", x)?;
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked<T: Float>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection
        return T::PI() / ((T::PI() * x).sin() * gamma_unchecked(T::one() - x));
    }
    let xm = x - T::one();
    let t = xm + T::lit(LANCZOS_G) + half;
    // split the power so t^(x - 1/2) does not overflow before e^-t is applied
    let p = t.powf((xm + half) * half);
    (T::TAU()).sqrt() * p * ((-t).exp() * p) * lanczos_sum(xm)
}

/// `ln Gamma(x)` for real `x > 0`.
pub fn ln_gamma<T: Float>(x: T) -> Result<T> {
    check_positive("ln_gamma", x)?;
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked<T: Float>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        return (T::PI() / (T::PI() * x).sin()).ln() - ln_gamma_unchecked(T::one() - x);
    }
    let xm = x - T::one();
    let t = xm + T::lit(LANCZOS_G) + half;
    half * T::TAU().ln() + (xm + half) * t.ln() - t + lanczos_sum(xm).ln()
}

/// `B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)`.
pub fn beta<T: Float>(a: T, b: T) -> Result<T> {
    check_positive("beta", a)?;
    check_positive("beta", b)?;
    let big = T::lit(30.0);
    if a + b < big {
        Ok(gamma_unchecked(a) * gamma_unchecked(b) / gamma_unchecked(a + b))
    } else {
        Ok((ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)).exp())
    }
}

/// Principal power `w^s = exp(s (ln|w| + i Arg w))`, `Arg w in (-pi, pi)`.
///
/// Points on the cut `(-inf, 0]` are rejected rather than evaluated on one
/// side of it.
pub fn principal_pow<T: Float>(w: Complex<T>, s: T) -> Result<Complex<T>> {
    if !w.re.is_finite() || !w.im.is_finite() || !s.is_finite() {
        return Err(Error::Domain(format!("principal_pow needs finite input, got ({w}, {s})")));
    }
    if w.im == T::zero() && w.re <= T::zero() {
        return Err(Error::BranchCut { re: w.re.as_f64(), im: w.im.as_f64() });
    }
    let ln_r = w.norm().ln();
    let arg = w.im.atan2(w.re);
    Ok(Complex::from_polar((s * ln_r).exp(), s * arg))
}

/// Volume of the unit ball in `R^m`.
pub fn unit_ball_volume<T: Float>(m: usize) -> T {
    let half_m = T::lit(m as f64) * T::lit(0.5);
    (half_m * T::PI().ln() - ln_gamma_unchecked(half_m + T::one())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
        assert!(rel(gamma(0.1).unwrap(), 9.513_507_698_668_732) < 1e-13);
        assert!(rel(gamma(170.5).unwrap(), ln_gamma(170.5f64).unwrap().exp()) < 1e-11);
    }

    #[test]
    fn gamma_rejects_non_positive() {
        assert!(matches!(gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(gamma(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(ln_gamma(f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.05, 0.3, 1.0, 2.5, 7.25, 33.0, 120.0] {
            let lg: f64 = ln_gamma(x).unwrap();
            assert!((lg - gamma(x).unwrap().ln()).abs() < 1e-12 * lg.abs().max(1.0), "x = {x}");
        }
    }

    #[test]
    fn beta_values() {
        assert!(rel(beta(1.0, 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(beta(0.5, 0.5).unwrap(), std::f64::consts::PI) < 1e-14);
        // midpoint rule for int_0^1 s (1 - s)^2 ds
        let n = 200_000;
        let h = 1.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let s = (i as f64 + 0.5) * h;
                s * (1.0 - s) * (1.0 - s) * h
            })
            .sum();
        assert!(rel(oracle, 1.0 / 12.0) < 1e-9);
        assert!(rel(beta(2.0, 3.0).unwrap(), oracle) < 1e-9);
        assert!(matches!(beta(0.0, 1.0), Err(Error::Domain(_))));
        assert!(rel(beta(20.0, 15.5).unwrap(), (ln_gamma(20.0f64).unwrap() + ln_gamma(15.5).unwrap() - ln_gamma(35.5).unwrap()).exp()) < 1e-12);
    }

    #[test]
    fn principal_pow_examples() {
        let one = principal_pow(Complex::new(1.0, 0.0), 3.7).unwrap();
        assert!((one - Complex::new(1.0, 0.0)).norm() < 1e-15);
        let sq = principal_pow(Complex::new(0.0, 2.0), 2.0).unwrap();
        assert!((sq - Complex::new(-4.0, 0.0)).norm() < 1e-14);
        assert!(matches!(
            principal_pow(Complex::new(-1.0, 0.0), 0.5),
            Err(Error::BranchCut { .. })
        ));
        assert!(matches!(principal_pow(Complex::new(0.0, 0.0), 2.0), Err(Error::BranchCut { .. })));
        // -0.0 imaginary part is still on the cut
        assert!(principal_pow(Complex::new(-2.0, -0.0), 0.5).is_err());
        // just above and below the cut stay on their own sheet
        let above = principal_pow(Complex::new(-1.0, 1e-300), 0.5).unwrap();
        let below = principal_pow(Complex::new(-1.0, -1e-300), 0.5).unwrap();
        assert!((above - Complex::new(0.0, 1.0)).norm() < 1e-14);
        assert!((below - Complex::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn f32_path() {
        let g: f32 = gamma(4.5f32).unwrap();
        assert!((g - 11.631_728).abs() / 11.631_728 < 1e-5);
        let p = principal_pow(Complex::new(0.0f32, 2.0), 2.0).unwrap();
        assert!((p - Complex::new(-4.0, 0.0)).norm() < 1e-5);
    }

    #[test]
    fn points() {
        let z = Point::from_parts(&[1.0, 2.0], &[0.5, 3.0]).unwrap();
        assert_eq!(z.dim(), 2);
        assert_eq!(z.head(), &[Complex::new(1.0, 0.5)]);
        assert_eq!(z.last(), Complex::new(2.0, 3.0));
        let d = z.minus_conj(&z).unwrap();
        assert_eq!(d.coords(), &[Complex::new(0.0, 1.0), Complex::new(0.0, 6.0)]);
        assert!(Point::<f64>::new(vec![]).is_err());
        assert!(Point::new(vec![Complex::new(f64::NAN, 0.0)]).is_err());
        let w = Point::from_parts(&[1.0], &[1.0]).unwrap();
        assert!(matches!(z.minus_conj(&w), Err(Error::Dimension { .. })));
        assert!((unit_ball_volume::<f64>(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume::<f64>(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn pow_exponent_additivity(re in -10.0f64..10.0, im in -10.0f64..10.0, s1 in -5.0f64..5.0, s2 in -5.0f64..5.0) {
            prop_assume!(!(im == 0.0 && re <= 0.0));
            prop_assume!(re * re + im * im > 1e-6);
            let w = Complex::new(re, im);
            let lhs = principal_pow(w, s1 + s2).unwrap();
            let rhs = principal_pow(w, s1).unwrap() * principal_pow(w, s2).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm());
        }

        #[test]
        fn gamma_recurrence(x in 0.1f64..50.0) {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs());
        }

        #[test]
        fn beta_symmetric(a in 0.01f64..40.0, b in 0.01f64..40.0) {
            prop_assert_eq!(beta(a, b).unwrap(), beta(b, a).unwrap());
        }
    }
}

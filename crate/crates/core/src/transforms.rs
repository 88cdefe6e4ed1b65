//! Biholomorphisms between the model domains and tube domains, their
//! holomorphic Jacobian determinants, and kernel pullback
//! `K_1(z, ζ) = DΦ(z) K_2(Φ(z), Φ(ζ)) conj(DΦ(ζ))`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::{Domain, ModelDomain, ModelFamily, TubeBase, TubeFamily};
use crate::laplace_kernel::{kernel_closed, KernelHandle};
use crate::num_core::{bilinear, Float, Point};
use crate::weights::SpaceSpec;

/// A biholomorphic map with explicit inverse and Jacobian determinant.
#[derive(Clone, Debug, PartialEq)]
pub enum Biholomorphism {
    Identity(Domain),
    /// `Φ(z) = (√2 z', z_n - i z'·z')` from the Siegel domain onto the
    /// paraboloid tube (the upper half plane when `n = 1`).
    SiegelToParaboloid { dim: usize },
    /// `Φ(z) = (2z'/(z_n + 1), 4i(1 - z_n)/(1 + z_n))` from the unit ball onto
    /// the Siegel domain.
    CayleyBallToSiegel { dim: usize },
    /// Applies the maps left to right.
    Composite(Vec<Biholomorphism>),
}

impl Biholomorphism {
    pub fn siegel_to_paraboloid(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self::SiegelToParaboloid { dim: n })
    }

    pub fn cayley_ball_to_siegel(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self::CayleyBallToSiegel { dim: n })
    }

    /// `first` followed by `second`; the target of `first` must be the
    /// source of `second`.
    pub fn then(self, second: Biholomorphism) -> Result<Self> {
        if self.target() != second.source() {
            return Err(Error::InvalidParameter(format!("cannot compose {} with {}", self.name(), second.name())));
        }
        let mut maps = match self {
            Self::Composite(v) => v,
            other => vec![other],
        };
        match second {
            Self::Composite(v) => maps.extend(v),
            other => maps.push(other),
        }
        Ok(Self::Composite(maps))
    }

    pub fn name(&self) -> String {
        match self {
            Self::Identity(_) => "identity".into(),
            Self::SiegelToParaboloid { .. } => "siegel-to-paraboloid".into(),
            Self::CayleyBallToSiegel { .. } => "cayley-ball-to-siegel".into(),
            Self::Composite(v) => v.iter().map(|m| m.name()).collect::<Vec<_>>().join(" then "),
        }
    }

    pub fn dim(&self) -> usize {
        self.source().dim()
    }

    pub fn source(&self) -> Domain {
        match self {
            Self::Identity(d) => *d,
            Self::SiegelToParaboloid { dim } => Domain::Model(ModelDomain::new(ModelFamily::Siegel, *dim).expect("dim >= 1")),
            Self::CayleyBallToSiegel { dim } => Domain::Model(ModelDomain::new(ModelFamily::UnitBall, *dim).expect("dim >= 1")),
            Self::Composite(v) => v.first().map(|m| m.source()).expect("non-empty composite"),
        }
    }

    pub fn target(&self) -> Domain {
        match self {
            Self::Identity(d) => *d,
            Self::SiegelToParaboloid { dim } => Domain::Tube(if *dim == 1 {
                TubeBase::half_line()
            } else {
                TubeBase::new(TubeFamily::Paraboloid, *dim).expect("dim >= 2")
            }),
            Self::CayleyBallToSiegel { dim } => Domain::Model(ModelDomain::new(ModelFamily::Siegel, *dim).expect("dim >= 1")),
            Self::Composite(v) => v.last().map(|m| m.target()).expect("non-empty composite"),
        }
    }

    fn check_dim<T: Float>(&self, z: &Point<T>) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: z.dim() });
        }
        Ok(())
    }

    pub fn forward<T: Float>(&self, z: &Point<T>) -> Result<Point<T>> {
        self.check_dim(z)?;
        let i = Complex::new(T::zero(), T::one());
        match self {
            Self::Identity(_) => Ok(z.clone()),
            Self::SiegelToParaboloid { .. } => {
                let s2 = T::lit(2.0).sqrt();
                let head = z.head();
                let mut out: Vec<Complex<T>> = head.iter().map(|c| c * s2).collect();
                out.push(z.last() - i * bilinear(head, head));
                Point::new(out)
            }
            Self::CayleyBallToSiegel { .. } => {
                let d = z.last() + T::one();
                if d == Complex::new(T::zero(), T::zero()) {
                    return Err(Error::Pole("Cayley transform at z_n = -1".into()));
                }
                let mut out: Vec<Complex<T>> = z.head().iter().map(|c| c * T::lit(2.0) / d).collect();
                out.push(i * T::lit(4.0) * (Complex::new(T::one(), T::zero()) - z.last()) / d);
                Point::new(out)
            }
            Self::Composite(v) => v.iter().try_fold(z.clone(), |p, m| m.forward(&p)),
        }
    }

    pub fn inverse<T: Float>(&self, w: &Point<T>) -> Result<Point<T>> {
        self.check_dim(w)?;
        let i = Complex::new(T::zero(), T::one());
        match self {
            Self::Identity(_) => Ok(w.clone()),
            Self::SiegelToParaboloid { .. } => {
                let s2 = T::lit(2.0).sqrt();
                let head = w.head();
                let mut out: Vec<Complex<T>> = head.iter().map(|c| c / s2).collect();
                out.push(w.last() + i * T::lit(0.5) * bilinear(head, head));
                Point::new(out)
            }
            Self::CayleyBallToSiegel { .. } => {
                let q = i * T::lit(0.25) * w.last();
                let one = Complex::new(T::one(), T::zero());
                let d = one - q;
                if d == Complex::new(T::zero(), T::zero()) {
                    return Err(Error::Pole("inverse Cayley transform at w_n = -4i".into()));
                }
                let mut out: Vec<Complex<T>> = w.head().iter().map(|c| c / d).collect();
                out.push((one + q) / d);
                Point::new(out)
            }
            Self::Composite(v) => v.iter().rev().try_fold(w.clone(), |p, m| m.inverse(&p)),
        }
    }

    /// Holomorphic Jacobian determinant `DΦ(z)`.
    pub fn jac_det<T: Float>(&self, z: &Point<T>) -> Result<Complex<T>> {
        self.check_dim(z)?;
        let n = self.dim();
        match self {
            Self::Identity(_) => Ok(Complex::new(T::one(), T::zero())),
            Self::SiegelToParaboloid { .. } => Ok(Complex::new(T::lit(2.0).powf(T::lit((n as f64 - 1.0) * 0.5)), T::zero())),
            Self::CayleyBallToSiegel { .. } => {
                let d = z.last() + T::one();
                if d == Complex::new(T::zero(), T::zero()) {
                    return Err(Error::Pole("Cayley Jacobian at z_n = -1".into()));
                }
                let c = Complex::new(T::zero(), -T::lit(2.0).powi(n as i32 + 2));
                Ok(c / d.powi(n as i32 + 1))
            }
            Self::Composite(v) => {
                let mut p = z.clone();
                let mut det = Complex::new(T::one(), T::zero());
                for m in v {
                    det = det * m.jac_det(&p)?;
                    p = m.forward(&p)?;
                }
                Ok(det)
            }
        }
    }

    /// `D(Φ^{-1})(w) = 1 / DΦ(Φ^{-1}(w))`.
    pub fn inverse_jac_det<T: Float>(&self, w: &Point<T>) -> Result<Complex<T>> {
        let z = self.inverse(w)?;
        Ok(self.jac_det(&z)?.inv())
    }
}

fn check_source<T: Float>(phi: &Biholomorphism, z: &Point<T>, zeta: &Point<T>) -> Result<()> {
    let src = phi.source();
    if !src.contains(z)? || !src.contains(zeta)? {
        return Err(Error::Domain(format!("pullback points must lie in the source of {}", phi.name())));
    }
    Ok(())
}

/// Pullback of `target` through `phi`. Weight compatibility
/// `rho_1 = rho_2 ∘ Φ` is the caller's responsibility.
pub fn pullback_kernel(phi: &Biholomorphism, target: &KernelHandle, z: &Point<f64>, zeta: &Point<f64>) -> Result<Complex<f64>> {
    check_source(phi, z, zeta)?;
    let k = target.eval(&phi.forward(z)?, &phi.forward(zeta)?)?.value;
    Ok(phi.jac_det(z)? * k * phi.jac_det(zeta)?.conj())
}

/// Pullback of a closed-form kernel, generic over the scalar.
pub fn pullback_closed<T: Float>(phi: &Biholomorphism, target: &SpaceSpec<T>, z: &Point<T>, zeta: &Point<T>) -> Result<Complex<T>> {
    check_source(phi, z, zeta)?;
    let k = kernel_closed(target, &phi.forward(z)?, &phi.forward(zeta)?)?;
    Ok(phi.jac_det(z)? * k * phi.jac_det(zeta)?.conj())
}

/// The target space whose pullback through `phi` is `source`, for the
/// built-in pairs: Siegel `alpha` from the paraboloid tube `alpha` (the
/// half-plane weight `y^alpha` when `n = 1`) and the ball from the Siegel
/// domain.
pub fn pullback_target(phi: &Biholomorphism, source: &SpaceSpec<f64>) -> Result<SpaceSpec<f64>> {
    use crate::weights::Family;
    let n = source.dim();
    match (phi, source.family()) {
        (Biholomorphism::Identity(_), _) => Ok(*source),
        (Biholomorphism::SiegelToParaboloid { dim }, Family::Siegel { alpha }) if *dim == n => {
            if n == 1 {
                SpaceSpec::half_plane_power(alpha + 1.0)
            } else {
                SpaceSpec::paraboloid(n, alpha)
            }
        }
        (Biholomorphism::CayleyBallToSiegel { dim }, Family::Ball { alpha }) if *dim == n => SpaceSpec::siegel(n, alpha),
        (Biholomorphism::Composite(v), _) => v.iter().try_fold(*source, |s, m| pullback_target(m, &s)),
        _ => Err(Error::Unsupported(format!("no built-in pullback of {} through {}", source.label(), phi.name()))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn rel(a: Complex<f64>, b: Complex<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    /// Determinant of the complex Jacobian by central differences.
    fn fd_jac_det(phi: &Biholomorphism, z: &Point<f64>) -> Complex<f64> {
        let n = z.dim();
        let h = 1e-6;
        let mut m = vec![vec![c(0.0, 0.0); n]; n];
        for j in 0..n {
            let shift = |s: f64| {
                let mut v = z.coords().to_vec();
                v[j] += s;
                phi.forward(&Point::new(v).unwrap()).unwrap()
            };
            let (p, q) = (shift(h), shift(-h));
            for (row, (a, b)) in m.iter_mut().zip(p.coords().iter().zip(q.coords())) {
                row[j] = (a - b) / (2.0 * h);
            }
        }
        // Gaussian elimination
        let mut det = c(1.0, 0.0);
        for k in 0..n {
            let piv = (k..n).max_by(|&a, &b| m[a][k].norm().total_cmp(&m[b][k].norm())).unwrap();
            if piv != k {
                m.swap(piv, k);
                det = -det;
            }
            det *= m[k][k];
            let (top, bottom) = m.split_at_mut(k + 1);
            for row in bottom {
                let f = row[k] / top[k][k];
                for (x, t) in row[k..].iter_mut().zip(&top[k][k..]) {
                    *x -= f * t;
                }
            }
        }
        det
    }

    #[test]
    fn siegel_map_examples() {
        let phi = Biholomorphism::siegel_to_paraboloid(1).unwrap();
        let z = Point::scalar(c(0.0, 4.0)).unwrap();
        assert_eq!(phi.forward(&z).unwrap(), z);
        let phi = Biholomorphism::siegel_to_paraboloid(2).unwrap();
        let z = Point::new(vec![c(0.5, 0.0), c(0.0, 1.0)]).unwrap();
        let w = phi.forward(&z).unwrap();
        assert!((w.coords()[0] - c(0.5 * 2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((w.coords()[1] - c(0.0, 0.75)).norm() < 1e-15);
        assert!((phi.jac_det(&z).unwrap() - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cayley_examples() {
        let phi = Biholomorphism::cayley_ball_to_siegel(1).unwrap();
        let o = Point::scalar(c(0.0, 0.0)).unwrap();
        assert!((phi.forward(&o).unwrap().last() - c(0.0, 4.0)).norm() < 1e-15);
        assert!((phi.jac_det(&o).unwrap() - c(0.0, -8.0)).norm() < 1e-15);
        let z = Point::scalar(c(0.3, 0.2)).unwrap();
        let back = phi.inverse(&phi.forward(&z).unwrap()).unwrap();
        assert!((back.last() - z.last()).norm() < 1e-14);
        assert!(matches!(phi.forward(&Point::scalar(c(-1.0, 0.0)).unwrap()), Err(Error::Pole(_))));
    }

    #[test]
    fn jacobians_match_finite_differences() {
        for n in 1..=3 {
            for phi in [
                Biholomorphism::siegel_to_paraboloid(n).unwrap(),
                Biholomorphism::cayley_ball_to_siegel(n).unwrap(),
                Biholomorphism::cayley_ball_to_siegel(n).unwrap().then(Biholomorphism::siegel_to_paraboloid(n).unwrap()).unwrap(),
            ] {
                for z in phi.source().sample_points(10, 3).unwrap() {
                    let exact = phi.jac_det(&z).unwrap();
                    assert!(rel(fd_jac_det(&phi, &z), exact) < 1e-7, "{} n={n}", phi.name());
                    let w = phi.forward(&z).unwrap();
                    assert!(rel(phi.inverse_jac_det(&w).unwrap() * exact, c(1.0, 0.0)) < 1e-13);
                }
            }
        }
    }

    #[test]
    fn maps_land_in_target() {
        for n in 1..=3 {
            for phi in [Biholomorphism::siegel_to_paraboloid(n).unwrap(), Biholomorphism::cayley_ball_to_siegel(n).unwrap()] {
                for z in phi.source().sample_points(200, 9).unwrap() {
                    assert!(phi.target().contains(&phi.forward(&z).unwrap()).unwrap(), "{}", phi.name());
                }
                for w in phi.target().sample_points(200, 9).unwrap() {
                    assert!(phi.source().contains(&phi.inverse(&w).unwrap()).unwrap(), "{}", phi.name());
                }
            }
        }
    }

    #[test]
    fn round_trips() {
        for n in 1..=3 {
            for phi in [Biholomorphism::siegel_to_paraboloid(n).unwrap(), Biholomorphism::cayley_ball_to_siegel(n).unwrap()] {
                for z in phi.source().sample_points(1000, 1).unwrap() {
                    let back = phi.inverse(&phi.forward(&z).unwrap()).unwrap();
                    let err: f64 = back.coords().iter().zip(z.coords()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    assert!(err < 1e-12 * (1.0 + z.norm_sqr().sqrt()));
                }
                for w in phi.target().sample_points(1000, 2).unwrap() {
                    let back = phi.forward(&phi.inverse(&w).unwrap()).unwrap();
                    let err: f64 = back.coords().iter().zip(w.coords()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    assert!(err < 1e-12 * (1.0 + w.norm_sqr().sqrt()));
                }
            }
        }
    }

    #[test]
    fn weight_compatibility_under_inverse() {
        let phi = Biholomorphism::siegel_to_paraboloid(3).unwrap();
        for w in phi.target().sample_points(100, 4).unwrap() {
            let z = phi.inverse(&w).unwrap();
            let lhs = z.last().im - z.head().iter().map(|c| c.norm_sqr()).sum::<f64>();
            let v = w.im();
            let rhs = v[2] - v[0] * v[0] - v[1] * v[1];
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + v[2].abs()));
        }
    }

    #[test]
    fn pullback_examples() {
        for n in [1usize, 2] {
            for alpha in [0.0, 1.5] {
                let phi = Biholomorphism::siegel_to_paraboloid(n).unwrap();
                let siegel = SpaceSpec::siegel(n, alpha).unwrap();
                let target = KernelHandle::closed(pullback_target(&phi, &siegel).unwrap());
                let pts = phi.source().sample_points(400, 17).unwrap();
                for pair in pts.chunks(2) {
                    let a = pullback_kernel(&phi, &target, &pair[0], &pair[1]).unwrap();
                    let b = kernel_closed(&siegel, &pair[0], &pair[1]).unwrap();
                    assert!(rel(a, b) < 1e-12, "siegel n={n} alpha={alpha}");
                }
                let cay = Biholomorphism::cayley_ball_to_siegel(n).unwrap();
                let ball = SpaceSpec::ball(n, alpha).unwrap();
                let target = KernelHandle::closed(pullback_target(&cay, &ball).unwrap());
                for pair in cay.source().sample_points(400, 18).unwrap().chunks(2) {
                    let a = pullback_kernel(&cay, &target, &pair[0], &pair[1]).unwrap();
                    let b = kernel_closed(&ball, &pair[0], &pair[1]).unwrap();
                    assert!(rel(a, b) < 1e-12, "ball n={n} alpha={alpha}");
                }
            }
        }
        let id = Biholomorphism::Identity(SpaceSpec::<f64>::unweighted_half_plane().domain());
        let s = SpaceSpec::unweighted_half_plane();
        let (z, w) = (Point::scalar(c(0.3, 1.2)).unwrap(), Point::scalar(c(-1.0, 0.4)).unwrap());
        assert_eq!(pullback_kernel(&id, &KernelHandle::closed(s), &z, &w).unwrap(), kernel_closed(&s, &z, &w).unwrap());
    }

    #[test]
    fn generic_f32_pullback() {
        let phi = Biholomorphism::cayley_ball_to_siegel(1).unwrap();
        let o = Point::<f32>::scalar(Complex::new(0.0, 0.0)).unwrap();
        let k = pullback_closed(&phi, &SpaceSpec::<f32>::siegel(1, 0.0).unwrap(), &o, &o).unwrap();
        assert!((k.re - std::f32::consts::FRAC_1_PI).abs() < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn chain_consistency(seed in 0u64..1_000_000, alpha in 0.0f64..2.0, n in 1usize..=3) {
            let cay = Biholomorphism::cayley_ball_to_siegel(n).unwrap();
            let sie = Biholomorphism::siegel_to_paraboloid(n).unwrap();
            let chain = cay.clone().then(sie.clone()).unwrap();
            let ball = SpaceSpec::ball(n, alpha).unwrap();
            let far = KernelHandle::closed(pullback_target(&chain, &ball).unwrap());
            let pts = cay.source().sample_points(2, seed).unwrap();
            let (z, w) = (&pts[0], &pts[1]);
            let direct = pullback_kernel(&chain, &far, z, w).unwrap();
            // two-step: pull the paraboloid kernel back to Siegel, then to the ball
            let (fz, fw) = (cay.forward(z).unwrap(), cay.forward(w).unwrap());
            let inner = pullback_kernel(&sie, &far, &fz, &fw).unwrap();
            let stepped = cay.jac_det(z).unwrap() * inner * cay.jac_det(w).unwrap().conj();
            prop_assert!(rel(direct, stepped) < 1e-12);
            prop_assert!(rel(direct, kernel_closed(&ball, z, w).unwrap()) < 1e-11);
        }
    }
}

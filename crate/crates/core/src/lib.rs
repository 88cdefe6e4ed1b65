//! Weighted Bergman kernels on tube domains.
//!
//! The crate evaluates reproducing kernels of weighted Bergman spaces over
//! tube domains `T_B = R^n + iB` through the Fourier-Laplace representation
//! `K(z, w) = int e^{2 pi i t.(z - conj w)} / I(t) dt`, where
//! `I(t) = int_B rho(iy) e^{-4 pi y.t} dy`, and provides closed forms for the
//! half-plane, paraboloid-tube, Siegel-domain, unit-ball and Lorentz-tube
//! families. The [`verify`] module turns every structural identity of these
//! kernels into an executable check.
//!
//! The analytic layer (special functions, closed-form kernels, symbols and
//! biholomorphisms) is generic over [`Float`]; quadrature and verification
//! run in `f64`.

pub mod cli;
pub mod error;
pub mod geometry;
pub mod laplace_kernel;
pub mod num_core;
pub mod quadrature;
pub mod transforms;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
pub use geometry::{Domain, ModelDomain, ModelFamily, Proposal, TubeBase, TubeFamily};
pub use laplace_kernel::{
    constant, kernel_closed, kernel_numeric, laplace_transform, KernelHandle, KernelMode, KernelValue,
    TestProfile,
};
pub use num_core::{beta, gamma, ln_gamma, principal_pow, Float, Point};
pub use quadrature::{IntegrationResult, QuadratureConfig};
pub use transforms::Biholomorphism;
pub use verify::CheckReport;
pub use weights::{Family, SpaceSpec, SymbolValue};

/// A complex number in double precision.
pub type Scalar = num_complex::Complex<f64>;
/// A complex number in single precision.
pub type Scalar32 = num_complex::Complex<f32>;
/// A point of `C^n` in double precision.
pub type CPoint = Point<f64>;
/// A point of `C^n` in single precision.
pub type CPoint32 = Point<f32>;
/// A weighted Bergman space with double-precision parameters.
pub type Space = SpaceSpec<f64>;
/// A weighted Bergman space with single-precision parameters.
pub type Space32 = SpaceSpec<f32>;

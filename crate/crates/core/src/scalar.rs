//! Scalar plumbing: the real type behind the complex field, and tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Real type underlying the complex scalars (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Zero threshold used when the caller does not supply one.
    fn default_eps() -> Self;

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f64 {
    fn default_eps() -> f64 {
        1e-9
    }
}

impl Real for f32 {
    fn default_eps() -> f32 {
        1e-4
    }
}

/// Complex scalar over `R`.
pub type Scalar<R> = Complex<R>;

pub fn cplx<R: Real>(re: f64, im: f64) -> Complex<R> {
    Complex::new(R::lit(re), R::lit(im))
}

pub fn is_finite<R: Real>(z: Complex<R>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Magnitude threshold for "is zero" decisions.
///
/// A value is zero when its modulus is at most `eps * max(1, scale)`, where
/// `scale` is the largest magnitude in the object under test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<R> {
    eps: R,
}

impl<R: Real> Tolerance<R> {
    pub fn new(eps: R) -> Result<Self> {
        if eps <= R::zero() || !eps.is_finite() {
            return Err(Error::BadTolerance);
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> R {
        self.eps
    }

    pub fn threshold(&self, scale: R) -> R {
        self.eps * scale.max(R::one())
    }

    pub fn is_zero(&self, z: Complex<R>, scale: R) -> bool {
        z.norm() <= self.threshold(scale)
    }

    /// Looser tolerance for spectral clustering, `sqrt(eps)` relative.
    pub fn spectral(&self) -> Self {
        Self { eps: self.eps.sqrt() }
    }
}

impl<R: Real> Default for Tolerance<R> {
    fn default() -> Self {
        Self { eps: R::default_eps() }
    }
}

/// Lexicographic order on complex numbers (real part, then imaginary part),
/// with ties on the real part decided within `tol`.
pub fn lex_less<R: Real>(a: Complex<R>, b: Complex<R>, tol: R) -> bool {
    if (a.re - b.re).abs() > tol {
        a.re < b.re
    } else {
        a.im < b.im - tol
    }
}

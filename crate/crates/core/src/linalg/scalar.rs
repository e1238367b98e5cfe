use std::fmt::Debug;
use std::iter::Sum;

use num_complex::Complex64;
use num_traits::NumAssign;

/// Field over which matrices and vectors are defined: `f64` or `Complex64`.
///
/// One solve uses exactly one field; Poisson problems run real and the
/// Helmholtz problems run complex.
pub trait Scalar:
    NumAssign + Copy + Debug + Default + Send + Sync + Sum + std::ops::Neg<Output = Self> + 'static
{
    const IS_COMPLEX: bool;

    fn from_real(re: f64) -> Self;

    /// `None` when `z` has a nonzero imaginary part and the field is real.
    fn from_complex(z: Complex64) -> Option<Self>;

    fn to_complex(self) -> Complex64;

    fn conj(self) -> Self;

    /// Modulus `|x|`.
    fn modulus(self) -> f64;

    fn modulus_sqr(self) -> f64;

    fn real(self) -> f64;

    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    #[inline]
    fn from_real(re: f64) -> Self {
        re
    }

    #[inline]
    fn from_complex(z: Complex64) -> Option<Self> {
        (z.im == 0.0).then_some(z.re)
    }

    #[inline]
    fn to_complex(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    #[inline]
    fn conj(self) -> Self {
        self
    }

    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }

    #[inline]
    fn modulus_sqr(self) -> f64 {
        self * self
    }

    #[inline]
    fn real(self) -> f64 {
        self
    }

    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    #[inline]
    fn from_real(re: f64) -> Self {
        Complex64::new(re, 0.0)
    }

    #[inline]
    fn from_complex(z: Complex64) -> Option<Self> {
        Some(z)
    }

    #[inline]
    fn to_complex(self) -> Complex64 {
        self
    }

    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }

    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }

    #[inline]
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }

    #[inline]
    fn real(self) -> f64 {
        self.re
    }

    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Hermitian inner product `sum conj(x_i) y_i`.
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * *b).sum()
}

pub fn norm2<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt()
}

pub fn norm_inf<S: Scalar>(x: &[S]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.modulus()))
}

/// `y += a * x`
pub fn axpy<S: Scalar>(a: S, x: &[S], y: &mut [S]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * *xi;
    }
}

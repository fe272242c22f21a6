use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Field over which matrices and measurements of one problem are defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarField {
    Real,
    Complex,
}

/// Matrix entry type: `f64` or [`Complex64`].
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Default
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + 'static
{
    const FIELD: ScalarField;

    fn zero() -> Self {
        Self::default()
    }
    fn from_real(x: f64) -> Self;
    fn re(self) -> f64;
    fn conj(self) -> Self;
    /// |x|².
    fn norm_sqr(self) -> f64;
    fn scale(self, r: f64) -> Self;
    fn is_finite(self) -> bool;
    /// Adds independent draws to every real component of `self`.
    fn add_noise(self, draw: &mut dyn FnMut() -> f64) -> Self;
}

impl Scalar for f64 {
    const FIELD: ScalarField = ScalarField::Real;

    #[inline]
    fn from_real(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn conj(self) -> Self {
        self
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn add_noise(self, draw: &mut dyn FnMut() -> f64) -> Self {
        self + draw()
    }
}

impl Scalar for Complex64 {
    const FIELD: ScalarField = ScalarField::Complex;

    #[inline]
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    #[inline]
    fn norm_sqr(self) -> f64 {
        Complex64::norm_sqr(&self)
    }
    #[inline]
    fn scale(self, r: f64) -> Self {
        self * r
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
    fn add_noise(self, draw: &mut dyn FnMut() -> f64) -> Self {
        let re = self.re + draw();
        let im = self.im + draw();
        Complex64::new(re, im)
    }
}

/// Σ a_m b_m without conjugation.
#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Σ a_m c_m for a real right operand.
#[inline]
pub fn dot_real<T: Scalar>(a: &[T], c: &[f64]) -> T {
    a.iter()
        .zip(c)
        .fold(T::zero(), |acc, (&x, &y)| acc + x.scale(y))
}

#[inline]
pub fn norm_sqr<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    norm_sqr(a).sqrt()
}

/// ‖a − b‖².
pub fn dist_sqr<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x - y).norm_sqr()).sum()
}

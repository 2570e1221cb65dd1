//! Operator pairs that parameterize [`spmm`](super::spmm).
//!
//! A stored sparse value is a *marker*: under plus-times it is an ordinary
//! coefficient; under the product semirings `+1` selects the dense value and,
//! for complex scalars, a negative marker selects its conjugate.

use std::ops::Add;

use num_complex::Complex;
use num_traits::Zero;

use crate::scalar::Real;

/// `Z[i][j] = ⊕_k (A[i][k] ⊗ X[k][j])` over the stored entries of row `i`.
///
/// Rows with no stored entries produce `add_identity()` in every column.
/// For product semirings that identity is one, so callers must not read such
/// rows as meaningful results.
pub trait Semiring<T: Real>: Sync {
    type Elem: Copy + Send + Sync;

    fn add_identity(&self) -> Self::Elem;
    fn add(&self, a: Self::Elem, b: Self::Elem) -> Self::Elem;
    fn mul(&self, marker: T, x: Self::Elem) -> Self::Elem;
}

/// A semiring whose `⊕` is multiplication, with the adjoint needed to
/// backpropagate a real loss through `marker ⊗ x`.
pub trait ProductSemiring<T: Real>: Semiring<T>
where
    Self::Elem: Zero + Add<Output = Self::Elem>,
{
    /// Gradient with respect to `x` of a real loss whose gradient with respect
    /// to the row product `(marker ⊗ x) · rest` is `upstream`.
    ///
    /// Complex gradients use the `∂L/∂re + i·∂L/∂im` convention.
    fn mul_adjoint(&self, marker: T, upstream: Self::Elem, rest: Self::Elem) -> Self::Elem;
}

/// Ordinary arithmetic: `⊕ = +`, `⊗ = ×`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlusTimes;

impl<T: Real> Semiring<T> for PlusTimes {
    type Elem = T;

    #[inline(always)]
    fn add_identity(&self) -> T {
        T::zero()
    }

    #[inline(always)]
    fn add(&self, a: T, b: T) -> T {
        a + b
    }

    #[inline(always)]
    fn mul(&self, marker: T, x: T) -> T {
        marker * x
    }
}

/// `⊕ = ⊗ = ×` over reals; a row with markers on `h`, `r`, `t` yields
/// `h ⊙ r ⊙ t`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TimesTimes;

impl<T: Real> Semiring<T> for TimesTimes {
    type Elem = T;

    #[inline(always)]
    fn add_identity(&self) -> T {
        T::one()
    }

    #[inline(always)]
    fn add(&self, a: T, b: T) -> T {
        a * b
    }

    #[inline(always)]
    fn mul(&self, marker: T, x: T) -> T {
        marker * x
    }
}

impl<T: Real> ProductSemiring<T> for TimesTimes {
    #[inline(always)]
    fn mul_adjoint(&self, marker: T, upstream: T, rest: T) -> T {
        upstream * marker * rest
    }
}

/// Complex product semiring. A negative marker conjugates the selected
/// value, so one row can encode `h ⊙ r ⊙ conj(t)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexTimes;

impl<T: Real> Semiring<T> for ComplexTimes {
    type Elem = Complex<T>;

    #[inline(always)]
    fn add_identity(&self) -> Complex<T> {
        Complex::new(T::one(), T::zero())
    }

    #[inline(always)]
    fn add(&self, a: Complex<T>, b: Complex<T>) -> Complex<T> {
        a * b
    }

    #[inline(always)]
    fn mul(&self, marker: T, x: Complex<T>) -> Complex<T> {
        if marker < T::zero() {
            x.conj() * marker.abs()
        } else {
            x * marker
        }
    }
}

impl<T: Real> ProductSemiring<T> for ComplexTimes {
    #[inline(always)]
    fn mul_adjoint(&self, marker: T, upstream: Complex<T>, rest: Complex<T>) -> Complex<T> {
        // p = x·c       => ∂L/∂x = G·conj(c)
        // p = conj(x)·c => ∂L/∂x = conj(G)·c
        if marker < T::zero() {
            upstream.conj() * rest * marker.abs()
        } else {
            upstream * rest.conj() * marker
        }
    }
}

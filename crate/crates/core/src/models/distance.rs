//! Row distances and their derivatives.

use num_complex::Complex;

use crate::scalar::Real;

use super::config::Norm;

/// Added under the square root of every L2 norm and complex modulus so the
/// derivative stays finite at zero.
pub const NORM_EPS: f64 = 1e-12;

/// `0` at zero, otherwise `±1`.
#[inline]
pub fn sign<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// L1 norm, or Euclidean norm with `NORM_EPS` inside the root.
pub fn norm<T: Real>(v: &[T], norm: Norm) -> T {
    match norm {
        Norm::L1 => v.iter().map(|x| x.abs()).sum(),
        Norm::L2 => (v.iter().map(|&x| x * x).sum::<T>() + T::lit(NORM_EPS)).sqrt(),
    }
}

/// Writes `upstream · ∂norm(v)/∂v` into `out`.
pub fn norm_grad<T: Real>(v: &[T], norm_kind: Norm, upstream: T, out: &mut [T]) {
    match norm_kind {
        Norm::L1 => {
            for (o, &x) in out.iter_mut().zip(v) {
                *o = upstream * sign(x);
            }
        }
        Norm::L2 => {
            let n = norm(v, Norm::L2);
            let s = upstream / n;
            for (o, &x) in out.iter_mut().zip(v) {
                *o = s * x;
            }
        }
    }
}

/// Signed distance from `x` to the nearest integer, in `[-0.5, 0.5)`.
#[inline]
pub fn torus_wrap<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    let mut d = x - (x + half).floor();
    if d >= half {
        d -= T::one();
    } else if d < -half {
        d += T::one();
    }
    d
}

/// Wraparound distance: `Σ|δ|` (L1) or `Σδ²` (L2).
pub fn torus_distance<T: Real>(v: &[T], norm: Norm) -> T {
    match norm {
        Norm::L1 => v.iter().map(|&x| torus_wrap(x).abs()).sum(),
        Norm::L2 => v
            .iter()
            .map(|&x| {
                let d = torus_wrap(x);
                d * d
            })
            .sum(),
    }
}

/// `upstream · ∂torus_distance/∂v`, treating the rounding as locally constant.
pub fn torus_grad<T: Real>(v: &[T], norm: Norm, upstream: T, out: &mut [T]) {
    let two = T::lit(2.0);
    for (o, &x) in out.iter_mut().zip(v) {
        let d = torus_wrap(x);
        *o = match norm {
            Norm::L1 => upstream * sign(d),
            Norm::L2 => upstream * two * d,
        };
    }
}

/// Modulus with `NORM_EPS` inside the root.
#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im + T::lit(NORM_EPS)).sqrt()
}

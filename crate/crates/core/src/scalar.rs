//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum
        + Default
        + Debug
        + Display
        + LowerExp
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("literal representable in scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub fn from_usize<T: Real>(v: usize) -> T {
    T::from_usize(v).expect("count representable in scalar type")
}

/// Lossy view as `f64`, used for diagnostics and serialization.
#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Numerically stable hyperbolic secant; never overflows for large |t|.
#[inline]
pub fn sech<T: Real>(t: T) -> T {
    let e = (-t.abs()).exp();
    let two = lit::<T>(2.0);
    two * e / (T::one() + e * e)
}

/// Discrete L2 norm with unit weights.
pub fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Euclidean inner product.
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Largest absolute entry, zero for an empty slice.
pub fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sech_matches_cosh_and_survives_large_arguments() {
        for &t in &[-3.0_f64, -0.5, 0.0, 0.7, 12.0] {
            assert!((sech(t) - 1.0 / t.cosh()).abs() < 1e-15);
        }
        assert!(sech(1.0e4_f64) == 0.0);
        assert!(sech(800.0_f64).is_finite());
        assert!((sech(0.25_f32) - 1.0 / 0.25_f32.cosh()).abs() < 1e-6);
    }
}

//! Scalar abstraction: the crate's numerics are generic over `f32`/`f64`.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the numerical kernels are written against.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Convert an `f64` literal into the working scalar.
#[inline]
pub fn rf<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert to the working scalar")
}

/// Complex value with both parts from `f64` literals.
#[inline]
pub fn cf<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(rf(re), rf(im))
}

/// `i` in the working scalar.
#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// `i^p` for any integer `p`.
#[inline]
pub fn i_pow<T: Real>(p: i64) -> Complex<T> {
    match p.rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_pow_cycles() {
        let i = imag_unit::<f64>();
        assert_eq!(i_pow::<f64>(0), Complex::new(1.0, 0.0));
        assert_eq!(i_pow::<f64>(1), i);
        assert_eq!(i_pow::<f64>(2), Complex::new(-1.0, 0.0));
        assert_eq!(i_pow::<f64>(3), -i);
        assert_eq!(i_pow::<f64>(-1), -i);
        assert_eq!(i_pow::<f64>(7), -i);
    }

    #[test]
    fn rf_works_for_f32() {
        let x: f32 = rf(0.5);
        assert_eq!(x, 0.5f32);
    }
}

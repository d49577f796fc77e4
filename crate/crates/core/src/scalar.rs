//! Scalar abstraction shared by every numerical module.
//!
//! All matrix code is written against [`Real`], implemented for `f32` and
//! `f64`. Entries are `Complex<T>`; conversions from literal constants go
//! through [`Real::lit`].

use std::fmt::{Debug, Display, LowerExp};
use std::str::FromStr;

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub use nalgebra::Complex;

/// Real floating point type usable as the base field of the complex matrices.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Display
    + LowerExp
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        <Self as ToPrimitive>::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn machine_eps() -> Self {
        Self::default_epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn creal<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

//! Scalar abstraction shared by every numerical module.
//!
//! All lattice arithmetic, transforms and solvers are written against [`Real`], so the
//! same code runs in `f32` or `f64`. High-precision kernel evaluation lives in
//! [`crate::special::mp`] and only meets this trait at the rounding boundary.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + rustfft::FftNum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn of_int(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("integer representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn all_finite<T: Real>(values: &[Complex<T>]) -> bool {
    values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

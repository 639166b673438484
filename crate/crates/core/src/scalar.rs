//! Scalar plumbing shared by every module.

use nalgebra::{Complex, DMatrix, DVector, RealField};
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display, LowerExp};

/// Real field the toolkit runs over. Implemented for `f32` and `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Default absolute tolerance used when the caller passes none.
    fn default_tol() -> Self;
}

impl Real for f64 {
    fn default_tol() -> Self {
        1e-10
    }
}

impl Real for f32 {
    fn default_tol() -> Self {
        1e-4
    }
}

pub type Cx<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;

#[inline]
pub fn re<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant representable")
}

#[inline]
pub fn cx<T: Real>(re_: f64, im: f64) -> Cx<T> {
    Complex::new(re::<T>(re_), re::<T>(im))
}

#[inline]
pub fn c0<T: Real>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn c1<T: Real>() -> Cx<T> {
    Complex::new(T::one(), T::zero())
}

#[inline]
pub fn creal<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn eps<T: Real>() -> T {
    T::default_epsilon()
}

//! Scalar abstraction shared by every module.
//!
//! All numerical code is generic over a real field `T` (`f32` or `f64`);
//! matrices carry `Complex<T>` entries. Tolerances in this crate are stated
//! for double precision and are converted with [`lit`].

use std::fmt::{Debug, Display};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable as the base field of every matrix in the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Display + Debug + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix.
pub type CMat<T> = DMatrix<Complex<T>>;
/// Dense real matrix.
pub type RMat<T> = DMatrix<T>;
/// Dense complex column vector.
pub type CVec<T> = DVector<Complex<T>>;
/// Dense real column vector.
pub type RVec<T> = DVector<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a scalar to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `tol` (stated for `f64`), raised to `ulps·ε` for coarser scalar types.
pub fn tol_floor<T: Real>(tol: f64, ulps: f64) -> T {
    lit::<T>(tol).max(T::default_epsilon() * lit::<T>(ulps))
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// The imaginary unit.
#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Embeds a real matrix into the complex matrices.
pub fn complexify<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(real)
}

/// Entrywise real part.
pub fn re_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.re)
}

/// Entrywise imaginary part.
pub fn im_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.im)
}

/// Entrywise complex conjugate.
pub fn conj<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.map(|z| z.conj())
}

/// `(M + Mᵀ)/2` of the real part: the real symmetric matrix closest to `M`.
pub fn real_symmetric_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    let r = re_part(m);
    (&r + r.transpose()) * lit::<T>(0.5)
}

/// Checks that every entry is finite.
pub fn all_finite<T: Real>(m: &CMat<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

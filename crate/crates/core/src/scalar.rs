//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra as na;
use num_complex::Complex;
use num_traits as nt;

/// Real floating-point type the models are generic over (`f32` or `f64`).
pub trait Real:
    Copy + Debug + Display + Send + Sync + nt::FloatConst + nt::FromPrimitive + nt::ToPrimitive + na::RealField
{
    /// Converts an `f64` literal into this type.
    fn of(x: f64) -> Self;

    /// Lossy conversion to `f64` for reporting.
    fn to_f64_lossy(self) -> f64;

    /// Machine epsilon.
    fn eps() -> Self;

    /// `base`, floored at a small multiple of machine epsilon so that checks
    /// written for `f64` stay meaningful in single precision.
    fn tol(base: f64) -> Self {
        Self::of(base).max(Self::eps() * Self::of(64.0))
    }
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            #[inline]
            fn of(x: f64) -> Self {
                x as $f
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }

            #[inline]
            fn eps() -> Self {
                <$f>::EPSILON
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// `|z|`.
#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// `arg z` in `(-π, π]`.
#[inline]
pub fn argument<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// `(-i)^k`.
pub fn neg_i_pow<T: Real>(k: usize) -> Complex<T> {
    let (o, z) = (T::one(), T::zero());
    match k % 4 {
        0 => Complex::new(o, z),
        1 => Complex::new(z, -o),
        2 => Complex::new(-o, z),
        _ => Complex::new(z, o),
    }
}

//! Scalar abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

/// Floating point type the library is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self;

    fn to_f64x(self) -> f64;

    fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn std_exp<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform on the open interval (0, 1).
    fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64x(self) -> f64 {
                self as f64
            }

            #[inline]
            fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            #[inline]
            fn std_exp<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <Exp1 as Distribution<$t>>::sample(&Exp1, rng)
            }

            #[inline]
            fn open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <Open01 as Distribution<$t>>::sample(&Open01, rng)
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

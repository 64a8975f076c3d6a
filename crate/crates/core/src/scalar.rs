//! Scalar abstraction for the numeric code.
//!
//! Everything downstream (grids, kernels, simulation) is written against
//! [`Real`] instead of a concrete float, so the same code instantiates at
//! `f32` and `f64`. The trait also owns the primitive random draws; keeping
//! them here means samplers do not have to thread `rand_distr` bounds through
//! every generic signature.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rand::distr::uniform::SampleUniform;
use rand::Rng;

/// Floating-point scalar the crate can compute with: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + SampleUniform
    + Sum
    + rustfft::FftNum
    + Display
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Uniform draw from the half-open interval `[0, 1)`.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform draw from the open interval `(0, 1)`; safe to feed to `ln`.
    fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from the standard exponential distribution (rate 1).
    fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw from the standard normal distribution.
    fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion to `f64`, for error messages and reports.
    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.random()
            }

            #[inline]
            fn sample_open01<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(rand::distr::Open01)
            }

            #[inline]
            fn sample_exp1<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(rand_distr::Exp1)
            }

            #[inline]
            fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                rng.sample(rand_distr::StandardNormal)
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Convert an `f64` constant into the working scalar type.
///
/// Panics only if the conversion is not representable, which cannot happen
/// for the finite literals this crate feeds it.
#[inline]
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("finite f64 must convert into the scalar type")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn draws_land_in_their_supports() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let u: f64 = Real::sample_unit(&mut rng);
            assert!((0.0..1.0).contains(&u), "unit draw out of range: {u}");
            let o: f64 = Real::sample_open01(&mut rng);
            assert!(o > 0.0 && o < 1.0, "open01 draw out of range: {o}");
            let e: f64 = Real::sample_exp1(&mut rng);
            assert!(e >= 0.0, "exponential draw negative: {e}");
        }
    }

    #[test]
    fn real_converts_round_trip() {
        let x: f32 = real(0.25);
        assert_eq!(x, 0.25f32);
        let y: f64 = real(1e-12);
        assert_eq!(y, 1e-12);
    }
}

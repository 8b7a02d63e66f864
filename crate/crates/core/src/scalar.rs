//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All physics is written against [`Real`], so the same code runs in `f64`
//! (the default used by the CLI and the acceptance suite) and `f32`.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FloatConst, ToPrimitive};

/// Real floating point scalar usable by the simulator.
pub trait Real:
    RealField + Copy + FloatConst + ToPrimitive + Default + std::fmt::Display + Send + Sync + 'static
{
    /// Machine epsilon.
    const EPS: Self;

    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn count(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            const EPS: Self = <$t>::EPSILON;

            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// `e^z`.
#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    cis(z.im) * z.re.exp()
}

/// `e^{iφ}`.
#[inline]
pub fn cis<T: Real>(phase: T) -> Complex<T> {
    Complex::new(phase.cos(), phase.sin())
}

#[inline]
pub fn norm_sqr<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

/// Principal square root of a complex number.
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let r = modulus(z);
    if r == T::zero() {
        return Complex::new(T::zero(), T::zero());
    }
    let two = T::lit(2.0);
    let re = ((r + z.re) / two).sqrt();
    let im = ((r - z.re) / two).sqrt();
    if z.im < T::zero() {
        Complex::new(re, -im)
    } else {
        Complex::new(re, im)
    }
}

#[inline]
pub fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn imag<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

//! Conversions between ordinary frequency ν = ω/2π in MHz (the external unit)
//! and angular frequency in rad/s (the internal unit).

use crate::scalar::Real;

const MEGA: f64 = 1.0e6;

/// ν in MHz to ω in rad/s.
pub fn mhz_to_angular<T: Real>(nu_mhz: T) -> T {
    nu_mhz * T::lit(2.0 * std::f64::consts::PI * MEGA)
}

/// ω in rad/s to ν in MHz.
pub fn angular_to_mhz<T: Real>(omega: T) -> T {
    omega / T::lit(2.0 * std::f64::consts::PI * MEGA)
}

pub fn seconds_to_us<T: Real>(t: T) -> T {
    t * T::lit(MEGA)
}

pub fn us_to_seconds<T: Real>(t_us: T) -> T {
    t_us / T::lit(MEGA)
}

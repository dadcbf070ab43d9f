//! MHz <-> rad/μs conversion. User-facing files carry MHz; everything inside
//! the crate is angular frequency.

use std::f64::consts::TAU;

/// rad/μs per MHz.
pub const RAD_PER_US_PER_MHZ: f64 = TAU;

#[inline]
pub fn mhz_to_rad_per_us(mhz: f64) -> f64 {
    mhz * RAD_PER_US_PER_MHZ
}

#[inline]
pub fn rad_per_us_to_mhz(rad: f64) -> f64 {
    rad / RAD_PER_US_PER_MHZ
}

//! Conversions between SI values used internally and the navigation units
//! (deg/hr, deg/√hr) used at I/O boundaries.

use std::f64::consts::PI;

const SECONDS_PER_HOUR: f64 = 3600.0;

/// Earth rotation rate in deg/hr as quoted for the instrument.
pub const EARTH_RATE_DEG_PER_HR: f64 = 15.0;

pub fn deg_per_hr_to_rad_per_s(rate: f64) -> f64 {
    rate * PI / 180.0 / SECONDS_PER_HOUR
}

pub fn rad_per_s_to_deg_per_hr(rate: f64) -> f64 {
    rate * 180.0 / PI * SECONDS_PER_HOUR
}

/// rad/√s → deg/√hr (one √hr is 60 √s).
pub fn rad_per_sqrt_s_to_deg_per_sqrt_hr(arw: f64) -> f64 {
    arw * 180.0 / PI * SECONDS_PER_HOUR.sqrt()
}

pub fn deg_per_sqrt_hr_to_rad_per_sqrt_s(arw: f64) -> f64 {
    arw * PI / 180.0 / SECONDS_PER_HOUR.sqrt()
}

/// (deg/hr)/√hr → (rad/s)/√s.
pub fn rate_random_walk_to_si(rrw: f64) -> f64 {
    deg_per_hr_to_rad_per_s(rrw) / SECONDS_PER_HOUR.sqrt()
}

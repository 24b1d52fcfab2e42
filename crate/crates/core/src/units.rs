//! Hz/rad-per-second conversions. Everything inside the crate is angular frequency;
//! Hz only appears in file formats and on the command line.

use std::f64::consts::TAU;

#[inline]
pub fn hz_to_rad(f_hz: f64) -> f64 {
    TAU * f_hz
}

#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / TAU
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// `20·log10|x|`, floored at -300 dB so that exact zeros stay finite.
pub fn amplitude_db(mag: f64) -> f64 {
    if !(mag > 0.0) {
        return DB_FLOOR;
    }
    (20.0 * mag.log10()).max(DB_FLOOR)
}

pub const DB_FLOOR: f64 = -300.0;

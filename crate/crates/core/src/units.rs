//! Unit conversions at the configuration boundary.
//!
//! Everything inside the crate is SI with angular frequencies in rad/s.
//! Configuration files and the CLI speak the lab dialect: ordinary
//! frequencies in MHz or GHz (the "/2π" numbers) and times in ns or µs.

use std::f64::consts::TAU;

pub fn mhz(f: f64) -> f64 {
    TAU * f * 1e6
}

pub fn ghz(f: f64) -> f64 {
    TAU * f * 1e9
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / (TAU * 1e6)
}

pub fn ns(t: f64) -> f64 {
    t * 1e-9
}

pub fn us(t: f64) -> f64 {
    t * 1e-6
}

pub fn to_ns(t: f64) -> f64 {
    t * 1e9
}

pub fn to_us(t: f64) -> f64 {
    t * 1e6
}

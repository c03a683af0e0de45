//! Frequency unit conversion at the user-facing boundary.
//!
//! Internally every frequency is angular, in rad/ns. Users and data files
//! speak MHz. Two readings of "MHz" are in circulation for this kind of data:
//! the ordinary frequency `ν = Ω / 2π` in MHz, and the angular value itself
//! in units of 10⁶ rad/s, which is how line widths and detuning axes of
//! pulsed-spectroscopy plots are frequently labelled.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Unit of a frequency given in "MHz".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyUnit {
    /// Ordinary frequency in MHz: `Ω [rad/ns] = 2π × 10⁻³ × ν [MHz]`.
    #[default]
    Mhz,
    /// Angular frequency in 10⁶ rad/s: `Ω [rad/ns] = 10⁻³ × value`.
    AngularMhz,
}

impl FrequencyUnit {
    pub fn to_rad_per_ns(self, value: f64) -> f64 {
        match self {
            FrequencyUnit::Mhz => value * TAU * 1e-3,
            FrequencyUnit::AngularMhz => value * 1e-3,
        }
    }

    pub fn from_rad_per_ns(self, omega: f64) -> f64 {
        match self {
            FrequencyUnit::Mhz => omega * 1e3 / TAU,
            FrequencyUnit::AngularMhz => omega * 1e3,
        }
    }
}

/// Ordinary MHz to rad/ns.
pub fn mhz_to_rad_per_ns(mhz: f64) -> f64 {
    FrequencyUnit::Mhz.to_rad_per_ns(mhz)
}

/// rad/ns to ordinary MHz.
pub fn rad_per_ns_to_mhz(omega: f64) -> f64 {
    FrequencyUnit::Mhz.from_rad_per_ns(omega)
}

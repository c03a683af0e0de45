//! Two-level pulsed spectroscopy with smooth and truncated pulses.
//!
//! The crate propagates a driven two-level system through a pulse at fixed
//! detuning, and builds the measurements on top of that: post-pulse line
//! profiles, excitation landscapes over detuning and peak Rabi frequency,
//! full widths at half maximum, power-law fits of the width against the
//! drive strength, and the excess excitation caused by cutting off the
//! pulse wings. Closed-form results for rectangular and hyperbolic-secant
//! pulses are exposed as oracles.
//!
//! Internally all frequencies are angular, in rad/ns, and all times are in
//! ns. [`units`] converts to and from MHz.

pub mod adiabatic;
pub mod dynamics;
pub mod error;
pub mod pulse;
mod quad;
pub mod spectro;
pub mod units;

pub use error::{Error, Result};
pub use pulse::{amplitude_for_area, PulseSpec, SampleMode, SampleOptions, SampledPulse, ShapeFamily};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/pulses.md")]
    mod pulses {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/adiabatic.md")]
    mod adiabatic {}
    #[doc = include_str!("../../../book/src/spectroscopy.md")]
    mod spectroscopy {}
    #[doc = include_str!("../../../book/src/truncation.md")]
    mod truncation {}
}

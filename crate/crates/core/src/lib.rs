//! Fluorescence photon-counting models for weak two-photon-style signals.
//!
//! The crate models how a fluorophore in a cuvette turns excitation light
//! into detected counts through two competing channels: classical two-photon
//! absorption (quadratic in photon flux) and one-photon absorption out of
//! thermally populated vibrational hot states (linear in flux, exponentially
//! suppressed with red detuning). On top of the forward models sit a Poisson
//! counting simulator and the estimation routines that recover cross
//! sections, slopes, and mechanism verdicts from measured count-rate series.
//!
//! Layout:
//! - [`constants`]: physical constants and unit conversions.
//! - [`spectra`]: wavelength grids, spectra, resampling, integration,
//!   Gaussian fits, CSV I/O.
//! - [`photophysics`]: fluorophore records, band-crossing search, hot-band
//!   cross sections.
//! - [`signal`]: beam/collection geometry, excitation sources, forward
//!   models, and the counting simulator.
//! - [`series`]: count-rate series containers and axis conversions.
//! - [`inference`]: slope fits, non-negative amplitude fits, cross-section
//!   derivations, temperature fits, and mechanism discrimination.

// Validation sites use `!(x > 0.0)`-style comparisons on purpose: unlike
// `x <= 0.0`, the negated form also routes NaN into the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
mod error;
pub mod inference;
mod linalg;
pub mod photophysics;
pub mod series;
pub mod signal;
pub mod spectra;

pub use error::{ModelError, Result};

#[cfg(test)]
pub(crate) mod testfix;

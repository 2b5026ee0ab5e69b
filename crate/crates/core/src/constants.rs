//! Physical constants (CODATA 2018 exact defining values) and unit scales.
//!
//! These are compile-time constants and are never configurable: every model
//! in this crate evaluates against the same values.

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Planck constant, J s.
pub const PLANCK_J_S: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN_J_K: f64 = 1.380_649e-23;

/// Avogadro constant, 1/mol.
pub const AVOGADRO_PER_MOL: f64 = 6.022_140_76e23;

/// One Goeppert-Mayer unit of two-photon cross section, cm^4 s / photon.
pub const GM_CM4_S: f64 = 1e-50;

/// Decadic molar extinction (M^-1 cm^-1) to peak molecular cross section
/// (cm^2): sigma_max = epsilon_max * EPSILON_TO_SIGMA_CM2.
///
/// Numerically consistent with ln(10) * 1e3 / N_A to better than 0.1%.
pub const EPSILON_TO_SIGMA_CM2: f64 = 3.82e-21;

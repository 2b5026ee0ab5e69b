//! Error type shared by every module in this crate.

use thiserror::Error;

/// Errors produced by spectra handling, the photophysics and signal models,
/// and the fitting routines.
///
/// `InvalidInput` covers precondition violations that a caller can fix by
/// changing arguments or data; the remaining variants describe failures that
/// arise during a computation.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A precondition on an argument or on input data was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A spectral query fell outside the stored wavelength grid.
    /// Out-of-range queries are hard errors, never silently zero.
    #[error("wavelength {lambda_nm} nm outside spectral grid [{min_nm}, {max_nm}] nm ({context})")]
    OutOfDomain {
        lambda_nm: f64,
        min_nm: f64,
        max_nm: f64,
        context: &'static str,
    },

    /// Excitation frequency at or above the band origin: the hot-band model
    /// is defined only for red-detuned excitation.
    #[error(
        "excitation at {nu_hz:.6e} Hz is not red-detuned from the band origin at {nu_max_hz:.6e} Hz"
    )]
    NotRedDetuned { nu_hz: f64, nu_max_hz: f64 },

    /// An iterative fit exhausted its iteration budget or met a singular
    /// system it could not recover from.
    #[error("fit did not converge: {0}")]
    NonConvergence(String),

    /// The data cannot constrain the requested fit (too few usable points,
    /// degenerate design, all-zero spectrum, no crossing, ...).
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// A power series failed the quadratic-regime check and the caller asked
    /// for escalation.
    #[error("power-law slope {slope:.4} outside the two-photon regime window [{lo}, {hi}]")]
    RegimeCheck { slope: f64, lo: f64, hi: f64 },

    /// Reading or writing a wire format failed.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure while reading or writing a file.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ModelError>;

impl ModelError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ModelError::InvalidInput(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        ModelError::DegenerateData(msg.into())
    }
}

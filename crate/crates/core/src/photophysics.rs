//! Thermally assisted ("hot-band") one-photon absorption.
//!
//! Excitation far to the red of the main absorption band is modeled as
//! one-photon absorption out of thermally populated vibrational levels of the
//! ground state. The cross section at excitation frequency `nu` is the peak
//! cross section attenuated by a Boltzmann factor for the vibrational energy
//! deficit `h (nu_max - nu)` and weighted by a Franck-Condon ratio read off
//! the mirror image of the absorption band about the crossing frequency
//! `nu_max` (where the normalized absorption and emission bands intersect).

use crate::constants::{BOLTZMANN_J_K, EPSILON_TO_SIGMA_CM2, PLANCK_J_S};
use crate::error::{ModelError, Result};
use crate::spectra::{frequency_to_wavelength, wavelength_to_frequency, Spectrum, SpectrumKind};

/// Peak one-photon absorption cross section (cm^2) corresponding to a peak
/// molar extinction coefficient (M^-1 cm^-1).
pub fn sigma_max_from_epsilon(epsilon_max_m_cm: f64) -> f64 {
    epsilon_max_m_cm * EPSILON_TO_SIGMA_CM2
}

/// A fluorophore record: photophysical scalars plus absorption and emission
/// spectra.
#[derive(Debug, Clone)]
pub struct Fluorophore {
    name: String,
    quantum_efficiency: f64,
    epsilon_max_m_cm: f64,
    nu_max_hz: f64,
    sigma_c2pa_cm4s: f64,
    absorption: Spectrum,
    emission: Spectrum,
}

impl Fluorophore {
    /// Validates and assembles a fluorophore record.
    ///
    /// `nu_max_hz` is the band-crossing frequency used as the hot-band
    /// reference point; its wavelength must lie inside the absorption
    /// spectrum's span so the Franck-Condon denominator is defined.
    pub fn new(
        name: &str,
        quantum_efficiency: f64,
        epsilon_max_m_cm: f64,
        nu_max_hz: f64,
        sigma_c2pa_cm4s: f64,
        absorption: Spectrum,
        emission: Spectrum,
    ) -> Result<Self> {
        if name.trim().is_empty() {
            return Err(ModelError::invalid("fluorophore name must not be empty"));
        }
        if !quantum_efficiency.is_finite() || quantum_efficiency <= 0.0 || quantum_efficiency > 1.0
        {
            return Err(ModelError::invalid(format!(
                "fluorescence quantum efficiency must be in (0, 1], got {quantum_efficiency}"
            )));
        }
        if !epsilon_max_m_cm.is_finite() || epsilon_max_m_cm <= 0.0 {
            return Err(ModelError::invalid(format!(
                "peak molar extinction must be positive and finite, got {epsilon_max_m_cm}"
            )));
        }
        if !sigma_c2pa_cm4s.is_finite() || sigma_c2pa_cm4s < 0.0 {
            return Err(ModelError::invalid(format!(
                "two-photon cross section must be non-negative and finite, got {sigma_c2pa_cm4s}"
            )));
        }
        if absorption.kind() != SpectrumKind::Absorption {
            return Err(ModelError::invalid(format!(
                "absorption spectrum has kind {}, expected {}",
                absorption.kind(),
                SpectrumKind::Absorption
            )));
        }
        if emission.kind() != SpectrumKind::Emission {
            return Err(ModelError::invalid(format!(
                "emission spectrum has kind {}, expected {}",
                emission.kind(),
                SpectrumKind::Emission
            )));
        }
        if !nu_max_hz.is_finite() || nu_max_hz <= 0.0 {
            return Err(ModelError::invalid(format!(
                "band-crossing frequency must be positive and finite, got {nu_max_hz}"
            )));
        }
        let lam_max = frequency_to_wavelength(nu_max_hz)?;
        if lam_max < absorption.min_nm() || lam_max > absorption.max_nm() {
            return Err(ModelError::invalid(format!(
                "band-crossing wavelength {lam_max:.3} nm lies outside the absorption span \
                 {:.3}..{:.3} nm",
                absorption.min_nm(),
                absorption.max_nm()
            )));
        }
        Ok(Self {
            name: name.to_owned(),
            quantum_efficiency,
            epsilon_max_m_cm,
            nu_max_hz,
            sigma_c2pa_cm4s,
            absorption,
            emission,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Fluorescence quantum efficiency (collected photons per excitation).
    pub fn quantum_efficiency(&self) -> f64 {
        self.quantum_efficiency
    }

    /// Peak molar extinction coefficient (M^-1 cm^-1).
    pub fn epsilon_max_m_cm(&self) -> f64 {
        self.epsilon_max_m_cm
    }

    /// Band-crossing frequency (Hz).
    pub fn nu_max_hz(&self) -> f64 {
        self.nu_max_hz
    }

    /// Classical two-photon absorption cross section (cm^4 s).
    pub fn sigma_c2pa_cm4s(&self) -> f64 {
        self.sigma_c2pa_cm4s
    }

    pub fn absorption(&self) -> &Spectrum {
        &self.absorption
    }

    pub fn emission(&self) -> &Spectrum {
        &self.emission
    }

    /// Peak one-photon absorption cross section (cm^2).
    pub fn sigma_max_cm2(&self) -> f64 {
        sigma_max_from_epsilon(self.epsilon_max_m_cm)
    }
}

/// Finds the band-crossing frequency (Hz): the reddest intersection of the
/// peak-normalized absorption and emission spectra between their peaks.
///
/// Both spectra are normalized to unit peak, sampled on a common 0.5 nm grid
/// over their overlap, and scanned for sign changes of the difference.
/// Returns an error if the spectra overlap by less than 1 nm or do not cross
/// between the absorption and emission peak wavelengths.
pub fn find_nu_max(absorption: &Spectrum, emission: &Spectrum) -> Result<f64> {
    if absorption.kind() != SpectrumKind::Absorption {
        return Err(ModelError::invalid(format!(
            "band-crossing search got kind {} where an absorption spectrum was expected",
            absorption.kind()
        )));
    }
    if emission.kind() != SpectrumKind::Emission {
        return Err(ModelError::invalid(format!(
            "band-crossing search got kind {} where an emission spectrum was expected",
            emission.kind()
        )));
    }
    let a_n = absorption.normalize_peak()?;
    let e_n = emission.normalize_peak()?;

    let lo = a_n.min_nm().max(e_n.min_nm());
    let hi = a_n.max_nm().min(e_n.max_nm());
    if !(hi - lo >= 1.0) {
        return Err(ModelError::degenerate(format!(
            "absorption and emission spectra overlap by less than 1 nm \
             ({:.3}..{:.3} vs {:.3}..{:.3} nm)",
            absorption.min_nm(),
            absorption.max_nm(),
            emission.min_nm(),
            emission.max_nm()
        )));
    }
    let n = ((hi - lo) / 0.5).floor() as usize + 1;
    let mut grid: Vec<f64> = (0..n).map(|i| lo + 0.5 * i as f64).collect();
    if let Some(last) = grid.last_mut() {
        if *last > hi {
            *last = hi;
        }
    }
    if hi - *grid.last().unwrap() > 1e-9 {
        grid.push(hi);
    }

    let mut diff = Vec::with_capacity(grid.len());
    for &lam in &grid {
        diff.push(a_n.value_at(lam)? - e_n.value_at(lam)?);
    }

    let mut candidates: Vec<f64> = Vec::new();
    for (i, &d) in diff.iter().enumerate() {
        if d == 0.0 {
            candidates.push(grid[i]);
        }
    }
    for i in 0..diff.len() - 1 {
        let (y0, y1) = (diff[i], diff[i + 1]);
        if y0 != 0.0 && y1 != 0.0 && (y0 > 0.0) != (y1 > 0.0) {
            let (x0, x1) = (grid[i], grid[i + 1]);
            candidates.push(x0 - y0 * (x1 - x0) / (y1 - y0));
        }
    }

    let peak_a = a_n.peak().0;
    let peak_e = e_n.peak().0;
    let crossing = candidates
        .into_iter()
        .filter(|&lam| lam >= peak_a && lam <= peak_e)
        .fold(f64::NEG_INFINITY, f64::max);
    if !crossing.is_finite() {
        return Err(ModelError::degenerate(format!(
            "normalized absorption and emission spectra do not cross between their peaks \
             ({peak_a:.1} and {peak_e:.1} nm; overlap {lo:.1}..{hi:.1} nm)"
        )));
    }
    wavelength_to_frequency(crossing)
}

/// Franck-Condon weight at excitation frequency `nu_hz`: the absorbance at
/// the mirror frequency `2 nu_max - nu`, relative to the absorbance at
/// `nu_max` itself.
///
/// Errors if the mirror wavelength falls outside the absorption spectrum's
/// span, or if the absorbance at the crossing wavelength vanishes.
pub fn fc_ratio(nu_hz: f64, absorption: &Spectrum, nu_max_hz: f64) -> Result<f64> {
    if absorption.kind() != SpectrumKind::Absorption {
        return Err(ModelError::invalid(format!(
            "Franck-Condon ratio got kind {} where an absorption spectrum was expected",
            absorption.kind()
        )));
    }
    if !nu_hz.is_finite() || nu_hz <= 0.0 {
        return Err(ModelError::invalid(format!(
            "excitation frequency must be positive and finite, got {nu_hz}"
        )));
    }
    if !nu_max_hz.is_finite() || nu_max_hz <= 0.0 {
        return Err(ModelError::invalid(format!(
            "band-crossing frequency must be positive and finite, got {nu_max_hz}"
        )));
    }
    let mirrored = 2.0 * nu_max_hz - nu_hz;
    if mirrored <= 0.0 {
        return Err(ModelError::invalid(format!(
            "mirror frequency 2 nu_max - nu is not positive (nu = {nu_hz:e} Hz, \
             nu_max = {nu_max_hz:e} Hz)"
        )));
    }
    let lam_mirror = frequency_to_wavelength(mirrored)?;
    let lam_peak = frequency_to_wavelength(nu_max_hz)?;
    let a_mirror = absorption.value_at_ctx(lam_mirror, "mirror-image absorbance lookup")?;
    let a_peak = absorption.value_at_ctx(lam_peak, "band-crossing absorbance lookup")?;
    if a_peak <= 0.0 {
        return Err(ModelError::degenerate(
            "absorbance vanishes at the band-crossing wavelength; the Franck-Condon ratio \
             is undefined",
        ));
    }
    Ok(a_mirror / a_peak)
}

/// Hot-band absorption cross section (cm^2) at excitation frequency `nu_hz`
/// and temperature `temperature_k`:
/// `sigma_max * exp(-h (nu_max - nu) / kT) * fc_ratio(nu)`.
///
/// Requires red-detuned excitation (`nu <= nu_max`).
pub fn hba_cross_section(nu_hz: f64, temperature_k: f64, fluorophore: &Fluorophore) -> Result<f64> {
    if !temperature_k.is_finite() || temperature_k <= 0.0 {
        return Err(ModelError::invalid(format!(
            "temperature must be positive and finite, got {temperature_k}"
        )));
    }
    if !nu_hz.is_finite() || nu_hz <= 0.0 {
        return Err(ModelError::invalid(format!(
            "excitation frequency must be positive and finite, got {nu_hz}"
        )));
    }
    if nu_hz > fluorophore.nu_max_hz {
        return Err(ModelError::NotRedDetuned {
            nu_hz,
            nu_max_hz: fluorophore.nu_max_hz,
        });
    }
    let boltzmann =
        (-PLANCK_J_S * (fluorophore.nu_max_hz - nu_hz) / (BOLTZMANN_J_K * temperature_k)).exp();
    let fc = fc_ratio(nu_hz, &fluorophore.absorption, fluorophore.nu_max_hz)?;
    Ok(fluorophore.sigma_max_cm2() * boltzmann * fc)
}

//! Shared synthetic fixtures for unit tests.
//!
//! The main fixture is a dye-like chromophore with a bi-Gaussian absorption
//! band (different widths on the red and blue flanks) and an emission band
//! that is the exact mirror image of the absorption band about the crossing
//! frequency. The shapes are chosen so that closed-form values exist for
//! everything the tests pin.

use crate::photophysics::Fluorophore;
use crate::signal::{BeamGeometry, CollectionChain, ExperimentConfig};
use crate::spectra::{wavelength_to_frequency, Spectrum, SpectrumKind};

/// Band-crossing frequency of the synthetic dye (672.0 nm).
pub(crate) fn nu_max_hz() -> f64 {
    wavelength_to_frequency(672.0).unwrap()
}

fn nu_peak_hz() -> f64 {
    wavelength_to_frequency(555.0).unwrap()
}

/// Red- and blue-flank Gaussian widths (Hz) of the absorption band, fixed so
/// that the mirror-image ratio spans [0.41, 2.65] over 200..361.4 THz.
fn flank_widths_hz() -> (f64, f64) {
    let nu_max = nu_max_hz();
    let nu_a = nu_peak_hz();
    let s_red = ((nu_a - nu_max) * (nu_a - nu_max) / (2.0 * 2.65f64.ln())).sqrt();
    let d_blue = 2.0 * nu_max - 200e12 - nu_a;
    let s_blue = (d_blue * d_blue / (2.0 * (2.65f64 / 0.41).ln())).sqrt();
    (s_red, s_blue)
}

/// Relative absorbance of the synthetic dye at frequency `nu_hz`.
pub(crate) fn absorb_rel(nu_hz: f64) -> f64 {
    let (s_red, s_blue) = flank_widths_hz();
    let nu_a = nu_peak_hz();
    let s = if nu_hz >= nu_a { s_blue } else { s_red };
    let d = nu_hz - nu_a;
    (-(d * d) / (2.0 * s * s)).exp()
}

/// Canonical absorption fixture: 400.0..780.0 nm sampled every 0.1 nm.
pub(crate) fn absorption_fixture() -> Spectrum {
    let lambda: Vec<f64> = (0..3801).map(|i| (4000 + i) as f64 / 10.0).collect();
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| absorb_rel(wavelength_to_frequency(l).unwrap()))
        .collect();
    Spectrum::new(SpectrumKind::Absorption, lambda, values).unwrap()
}

/// Coarser, wider absorption fixture (380..900 nm, 1 nm steps) for the
/// band-crossing search, which needs both bands on a common footing.
pub(crate) fn absorption_fixture_coarse() -> Spectrum {
    let lambda: Vec<f64> = (0..521).map(|i| 380.0 + i as f64).collect();
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| absorb_rel(wavelength_to_frequency(l).unwrap()))
        .collect();
    Spectrum::new(SpectrumKind::Absorption, lambda, values).unwrap()
}

/// Emission fixture: exact mirror image of the absorption band about the
/// crossing frequency, sampled on 540..1400 nm at 1 nm steps.
pub(crate) fn emission_fixture() -> Spectrum {
    let nu_max = nu_max_hz();
    let lambda: Vec<f64> = (0..861).map(|i| 540.0 + i as f64).collect();
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| absorb_rel(2.0 * nu_max - wavelength_to_frequency(l).unwrap()))
        .collect();
    Spectrum::new(SpectrumKind::Emission, lambda, values).unwrap()
}

/// Gaussian band on an integer-nanometer grid.
pub(crate) fn gaussian_spectrum(
    kind: SpectrumKind,
    lo_nm: f64,
    hi_nm: f64,
    amplitude: f64,
    center_nm: f64,
    fwhm_nm: f64,
) -> Spectrum {
    let n = (hi_nm - lo_nm).round() as usize + 1;
    let lambda: Vec<f64> = (0..n).map(|i| lo_nm + i as f64).collect();
    let sg = fwhm_nm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| {
            let d = l - center_nm;
            amplitude * (-(d * d) / (2.0 * sg * sg)).exp()
        })
        .collect();
    Spectrum::new(kind, lambda, values).unwrap()
}

/// Two-node constant spectrum (handy for flat filters and unit efficiencies).
pub(crate) fn flat_spectrum(kind: SpectrumKind, lo_nm: f64, hi_nm: f64, value: f64) -> Spectrum {
    Spectrum::new(kind, vec![lo_nm, hi_nm], vec![value, value]).unwrap()
}

/// Gaussian broadband power density (relative units) centered at 1077.4 nm
/// with 128.9 nm FWHM, on the grid `cutoff + 0.5 i` nm with `n` nodes.
pub(crate) fn broadband_density(cutoff_nm: f64, n: usize) -> Spectrum {
    let lambda: Vec<f64> = (0..n).map(|i| cutoff_nm + 0.5 * i as f64).collect();
    let sg = 128.9 / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| {
            let d = l - 1077.4;
            (-(d * d) / (2.0 * sg * sg)).exp()
        })
        .collect();
    Spectrum::new(SpectrumKind::SpectralPowerDensity, lambda, values).unwrap()
}

/// Styryl-dye record built from the synthetic fixtures.
pub(crate) fn lds798(sigma_c2pa_gm: f64) -> Fluorophore {
    Fluorophore::new(
        "LDS798",
        0.054,
        1.54e4,
        nu_max_hz(),
        sigma_c2pa_gm * 1e-50,
        absorption_fixture(),
        emission_fixture(),
    )
    .unwrap()
}

/// Rhodamine-6G-like record with simple Gaussian bands, for classical
/// two-photon tests that never touch the hot-band machinery.
pub(crate) fn rh6g() -> Fluorophore {
    let absorption = gaussian_spectrum(SpectrumKind::Absorption, 400.0, 650.0, 1.0, 530.0, 40.0);
    let emission = gaussian_spectrum(SpectrumKind::Emission, 480.0, 700.0, 1.0, 560.0, 40.0);
    Fluorophore::new(
        "Rh6G",
        0.9,
        1.16e5,
        wavelength_to_frequency(540.0).unwrap(),
        9.9e-50,
        absorption,
        emission,
    )
    .unwrap()
}

/// Standard bench layout shared by the config fixtures: 55 x 57 um beam,
/// 4.2% geometric collection, 1 cm path, room temperature, and a flat
/// spectral filter whose transmission sets the chain efficiency directly.
fn dye_config(fluorophore: Fluorophore, concentration_mol_l: f64, gamma: f64) -> ExperimentConfig {
    let lo = fluorophore.emission().min_nm() - 10.0;
    let hi = fluorophore.emission().max_nm() + 10.0;
    let filter = flat_spectrum(SpectrumKind::Transmission, lo, hi, gamma);
    let beam = BeamGeometry::new(55.0, 57.0).unwrap();
    let chain = CollectionChain::new(0.042, vec![filter], None).unwrap();
    ExperimentConfig::new(fluorophore, concentration_mol_l, 1.0, beam, chain, 298.15).unwrap()
}

/// Styryl dye in the pair-source arrangement: 0.3 mM, 2.5% chain efficiency.
pub(crate) fn lds798_spdc_config() -> ExperimentConfig {
    lds798_spdc_config_with_sigma(220.0)
}

/// Same arrangement with an explicit two-photon cross section (GM units).
pub(crate) fn lds798_spdc_config_with_sigma(sigma_c2pa_gm: f64) -> ExperimentConfig {
    dye_config(lds798(sigma_c2pa_gm), 0.3e-3, 0.025)
}

/// Styryl dye in the classical-laser arrangement: 0.1 mM, 1.8% chain
/// efficiency.
pub(crate) fn lds798_c2pa_config() -> ExperimentConfig {
    dye_config(lds798(220.0), 1e-4, 0.018)
}

/// Rhodamine-like reference arrangement: 1.1 mM, 7.5% chain efficiency.
pub(crate) fn rh6g_config() -> ExperimentConfig {
    dye_config(rh6g(), 1.1e-3, 0.075)
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub(crate) fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo * (step * i as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

//! Fluorescence signal forward models and a Poisson counting simulator.
//!
//! Covers the excitation geometry (elliptical Gaussian beam), the collection
//! chain (geometric fraction, filters, detector efficiency), and three
//! excitation mechanisms: one-photon hot-band absorption of the source
//! spectrum, classical two-photon excitation, and a toy photon-pair model
//! whose signal is linear in pair rate but quadratic in per-photon
//! transmission.

use std::f64::consts::{LN_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::constants::AVOGADRO_PER_MOL;
use crate::error::{ModelError, Result};
use crate::photophysics::{hba_cross_section, Fluorophore};
use crate::series::{PowerSeries, SeriesAxis, SeriesPoint, SweepKind};
use crate::spectra::{
    photon_energy, photon_energy_at_wavelength, trapezoid, wavelength_to_frequency, Spectrum,
    SpectrumKind,
};

/// Peak-intensity prefactor `sqrt(2) (ln 2 / pi)^(3/2)` relating the mean
/// photon flux through the FWHM ellipse of a Gaussian beam to the effective
/// squared flux that drives two-photon excitation.
pub const GAUSSIAN_BEAM_PREFACTOR: f64 = 0.146_564_361_498_457_3;

/// Wavelength assigned to broadband pair sources for per-photon energy
/// bookkeeping: the degenerate wavelength at which both photons of a pair
/// carry half the pump energy.
pub const DEGENERATE_PAIR_WAVELENGTH_NM: f64 = 1064.0;

/// Elliptical Gaussian excitation spot described by its intensity FWHMs.
#[derive(Debug, Clone, Copy)]
pub struct BeamGeometry {
    fwhm_x_um: f64,
    fwhm_y_um: f64,
}

impl BeamGeometry {
    pub fn new(fwhm_x_um: f64, fwhm_y_um: f64) -> Result<Self> {
        for (label, v) in [("x", fwhm_x_um), ("y", fwhm_y_um)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::invalid(format!(
                    "beam FWHM along {label} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            fwhm_x_um,
            fwhm_y_um,
        })
    }

    pub fn fwhm_x_um(&self) -> f64 {
        self.fwhm_x_um
    }

    pub fn fwhm_y_um(&self) -> f64 {
        self.fwhm_y_um
    }

    /// Effective excitation area (cm^2): the ellipse spanned by the two
    /// intensity FWHMs, `pi (FWHM_x / 2) (FWHM_y / 2)`.
    pub fn area_cm2(&self) -> f64 {
        PI * (0.5 * self.fwhm_x_um * 1e-4) * (0.5 * self.fwhm_y_um * 1e-4)
    }
}

/// Light collection chain: geometric collection fraction plus the spectral
/// elements between sample and counter.
#[derive(Debug, Clone)]
pub struct CollectionChain {
    kappa: f64,
    filters: Vec<Spectrum>,
    detector_qe: Option<Spectrum>,
}

impl CollectionChain {
    /// `kappa` is the geometric collection fraction in (0, 1]; `filters` are
    /// transmission spectra applied in series; `detector_qe` is the counter's
    /// quantum efficiency (`None` models an ideal counter).
    pub fn new(kappa: f64, filters: Vec<Spectrum>, detector_qe: Option<Spectrum>) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0 && kappa <= 1.0) {
            return Err(ModelError::invalid(format!(
                "geometric collection fraction must be in (0, 1], got {kappa}"
            )));
        }
        for f in &filters {
            if f.kind() != SpectrumKind::Transmission {
                return Err(ModelError::invalid(format!(
                    "collection filter has kind {}, expected {}",
                    f.kind(),
                    SpectrumKind::Transmission
                )));
            }
        }
        if let Some(qe) = &detector_qe {
            if qe.kind() != SpectrumKind::QuantumEfficiency {
                return Err(ModelError::invalid(format!(
                    "detector efficiency has kind {}, expected {}",
                    qe.kind(),
                    SpectrumKind::QuantumEfficiency
                )));
            }
        }
        Ok(Self {
            kappa,
            filters,
            detector_qe,
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn filters(&self) -> &[Spectrum] {
        &self.filters
    }

    pub fn detector_qe(&self) -> Option<&Spectrum> {
        self.detector_qe.as_ref()
    }
}

/// Spectrally averaged transmission-times-efficiency of the collection chain
/// over a (relative) emission spectrum:
/// `integral(emission * prod(filters) * qe) / integral(emission)`.
///
/// Every filter and the detector efficiency must cover the full emission
/// span; anything narrower is a hard error rather than a silent zero.
pub fn gamma_overlap(emission: &Spectrum, chain: &CollectionChain) -> Result<f64> {
    if emission.kind() != SpectrumKind::Emission {
        return Err(ModelError::invalid(format!(
            "collection overlap got kind {} where an emission spectrum was expected",
            emission.kind()
        )));
    }
    let denominator = emission.integrate();
    if !(denominator.is_finite() && denominator > 0.0) {
        return Err(ModelError::degenerate(
            "emission spectrum integrates to zero; collection efficiency is undefined",
        ));
    }
    let mut weighted = emission.values().to_vec();
    for filter in chain.filters() {
        let resampled = filter.resample(emission.grid())?;
        for (w, t) in weighted.iter_mut().zip(resampled.values()) {
            *w *= t;
        }
    }
    if let Some(qe) = chain.detector_qe() {
        let resampled = qe.resample(emission.grid())?;
        for (w, q) in weighted.iter_mut().zip(resampled.values()) {
            *w *= q;
        }
    }
    Ok(trapezoid(emission.grid(), &weighted) / denominator)
}

/// Complete description of one excitation/collection arrangement.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    fluorophore: Fluorophore,
    concentration_mol_l: f64,
    path_length_cm: f64,
    beam: BeamGeometry,
    collection: CollectionChain,
    temperature_k: f64,
}

impl ExperimentConfig {
    pub fn new(
        fluorophore: Fluorophore,
        concentration_mol_l: f64,
        path_length_cm: f64,
        beam: BeamGeometry,
        collection: CollectionChain,
        temperature_k: f64,
    ) -> Result<Self> {
        if !(concentration_mol_l.is_finite() && concentration_mol_l > 0.0) {
            return Err(ModelError::invalid(format!(
                "concentration must be positive and finite, got {concentration_mol_l} mol/L"
            )));
        }
        if !(path_length_cm.is_finite() && path_length_cm > 0.0) {
            return Err(ModelError::invalid(format!(
                "path length must be positive and finite, got {path_length_cm} cm"
            )));
        }
        if !(temperature_k.is_finite() && temperature_k > 0.0) {
            return Err(ModelError::invalid(format!(
                "temperature must be positive and finite, got {temperature_k} K"
            )));
        }
        Ok(Self {
            fluorophore,
            concentration_mol_l,
            path_length_cm,
            beam,
            collection,
            temperature_k,
        })
    }

    pub fn fluorophore(&self) -> &Fluorophore {
        &self.fluorophore
    }

    pub fn concentration_mol_l(&self) -> f64 {
        self.concentration_mol_l
    }

    pub fn path_length_cm(&self) -> f64 {
        self.path_length_cm
    }

    pub fn beam(&self) -> &BeamGeometry {
        &self.beam
    }

    pub fn collection(&self) -> &CollectionChain {
        &self.collection
    }

    pub fn temperature_k(&self) -> f64 {
        self.temperature_k
    }

    /// Number density of fluorophores (cm^-3).
    pub fn n_mol_per_cm3(&self) -> f64 {
        AVOGADRO_PER_MOL * self.concentration_mol_l * 1e-3
    }

    /// Spectrally averaged collection efficiency of the filter chain over
    /// this fluorophore's emission band.
    pub fn gamma(&self) -> Result<f64> {
        gamma_overlap(self.fluorophore.emission(), &self.collection)
    }

    /// Counts detected per excited molecule: collection-chain transmission
    /// times geometric fraction times fluorescence quantum efficiency.
    pub fn k_collection(&self) -> Result<f64> {
        Ok(self.gamma()? * self.collection.kappa() * self.fluorophore.quantum_efficiency())
    }
}

/// Spectral shape of the excitation source.
#[derive(Debug, Clone)]
pub enum SourceShape {
    /// Narrow laser line: center wavelength and intensity-FWHM linewidth.
    Monochromatic {
        lambda_nm: f64,
        linewidth_fwhm_nm: f64,
    },
    /// Arbitrary broadband spectral power density (relative units; the
    /// total power normalizes it).
    Broadband { density: Spectrum },
}

/// An excitation source: spectral shape plus delivered total power.
#[derive(Debug, Clone)]
pub struct ExcitationSource {
    shape: SourceShape,
    total_power_w: f64,
}

impl ExcitationSource {
    pub fn monochromatic(
        lambda_nm: f64,
        linewidth_fwhm_nm: f64,
        total_power_w: f64,
    ) -> Result<Self> {
        if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
            return Err(ModelError::invalid(format!(
                "source wavelength must be positive and finite, got {lambda_nm} nm"
            )));
        }
        if !(linewidth_fwhm_nm.is_finite() && linewidth_fwhm_nm > 0.0) {
            return Err(ModelError::invalid(format!(
                "source linewidth must be positive and finite, got {linewidth_fwhm_nm} nm"
            )));
        }
        Self::validated(
            SourceShape::Monochromatic {
                lambda_nm,
                linewidth_fwhm_nm,
            },
            total_power_w,
        )
    }

    pub fn broadband(density: Spectrum, total_power_w: f64) -> Result<Self> {
        if density.kind() != SpectrumKind::SpectralPowerDensity {
            return Err(ModelError::invalid(format!(
                "broadband source has kind {}, expected {}",
                density.kind(),
                SpectrumKind::SpectralPowerDensity
            )));
        }
        let norm = density.integrate();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(ModelError::degenerate(
                "broadband source density integrates to zero",
            ));
        }
        Self::validated(SourceShape::Broadband { density }, total_power_w)
    }

    fn validated(shape: SourceShape, total_power_w: f64) -> Result<Self> {
        if !(total_power_w.is_finite() && total_power_w >= 0.0) {
            return Err(ModelError::invalid(format!(
                "source power must be non-negative and finite, got {total_power_w} W"
            )));
        }
        Ok(Self {
            shape,
            total_power_w,
        })
    }

    pub fn shape(&self) -> &SourceShape {
        &self.shape
    }

    pub fn total_power_w(&self) -> f64 {
        self.total_power_w
    }

    /// Same source at a different delivered power.
    pub fn with_power(&self, total_power_w: f64) -> Result<Self> {
        Self::validated(self.shape.clone(), total_power_w)
    }

    /// Wavelength used for per-photon energy bookkeeping in lumped models:
    /// the line center for monochromatic sources, the degenerate pair
    /// wavelength for broadband sources.
    pub fn effective_wavelength_nm(&self) -> f64 {
        match &self.shape {
            SourceShape::Monochromatic { lambda_nm, .. } => *lambda_nm,
            SourceShape::Broadband { .. } => DEGENERATE_PAIR_WAVELENGTH_NM,
        }
    }
}

/// Photon flux (photons cm^-2 s^-1) of `power_w` at `lambda_nm` spread over
/// `area_cm2`.
pub fn photon_flux_cm2_s(power_w: f64, lambda_nm: f64, area_cm2: f64) -> Result<f64> {
    if !(power_w.is_finite() && power_w >= 0.0) {
        return Err(ModelError::invalid(format!(
            "power must be non-negative and finite, got {power_w} W"
        )));
    }
    if !(area_cm2.is_finite() && area_cm2 > 0.0) {
        return Err(ModelError::invalid(format!(
            "beam area must be positive and finite, got {area_cm2} cm^2"
        )));
    }
    let energy = photon_energy_at_wavelength(lambda_nm)?;
    Ok(power_w / energy / area_cm2)
}

/// Photon-pair rate (pairs/s) of a beam of total power `power_w` whose
/// photons are booked at `lambda_nm`: every pair carries two photons.
pub fn pair_rate_s(power_w: f64, lambda_nm: f64) -> Result<f64> {
    if !(power_w.is_finite() && power_w >= 0.0) {
        return Err(ModelError::invalid(format!(
            "power must be non-negative and finite, got {power_w} W"
        )));
    }
    let energy = photon_energy_at_wavelength(lambda_nm)?;
    Ok(power_w / (2.0 * energy))
}

/// Classical two-photon-excited fluorescence rate (counts/s) for a
/// Gaussian-profile beam:
/// `pref K n L sigma_c2pa (1/S) (P / h nu)^2` with the peak-intensity
/// prefactor [`GAUSSIAN_BEAM_PREFACTOR`].
pub fn c2pef_signal(cfg: &ExperimentConfig, source: &ExcitationSource) -> Result<f64> {
    let k = cfg.k_collection()?;
    let energy = photon_energy_at_wavelength(source.effective_wavelength_nm())?;
    let photons_s = source.total_power_w() / energy;
    let area = cfg.beam().area_cm2();
    Ok(GAUSSIAN_BEAM_PREFACTOR
        * k
        * cfg.n_mol_per_cm3()
        * cfg.path_length_cm()
        * cfg.fluorophore().sigma_c2pa_cm4s()
        * (1.0 / area)
        * photons_s
        * photons_s)
}

/// One-photon hot-band fluorescence rate (counts/s) of a source spectrum:
/// the per-wavelength photon rate weighted by the hot-band cross section and
/// integrated over the band, times `K n L`. Linear in power and independent
/// of the beam area.
///
/// Monochromatic sources are expanded onto an internal Gaussian line profile
/// spanning +/- 6 sigma around the center (121 samples).
pub fn hba_signal(cfg: &ExperimentConfig, source: &ExcitationSource) -> Result<f64> {
    match source.shape() {
        SourceShape::Monochromatic {
            lambda_nm,
            linewidth_fwhm_nm,
        } => {
            let sg = linewidth_fwhm_nm / (2.0 * (2.0 * LN_2).sqrt());
            let lambda: Vec<f64> = (0..=120)
                .map(|i| lambda_nm + sg * (0.1 * i as f64 - 6.0))
                .collect();
            let values: Vec<f64> = lambda
                .iter()
                .map(|&l| {
                    let d = l - lambda_nm;
                    (-(d * d) / (2.0 * sg * sg)).exp()
                })
                .collect();
            let density = Spectrum::new(SpectrumKind::SpectralPowerDensity, lambda, values)?;
            hba_integrate(cfg, &density, source.total_power_w())
        }
        SourceShape::Broadband { density } => hba_integrate(cfg, density, source.total_power_w()),
    }
}

fn hba_integrate(cfg: &ExperimentConfig, density: &Spectrum, power_w: f64) -> Result<f64> {
    let norm = density.integrate();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(ModelError::degenerate(
            "source density integrates to zero; cannot normalize to total power",
        ));
    }
    let scale = power_w / norm;
    let mut integrand = Vec::with_capacity(density.len());
    for (&lam, &d) in density.grid().iter().zip(density.values()) {
        let nu = wavelength_to_frequency(lam)?;
        let sigma = hba_cross_section(nu, cfg.temperature_k(), cfg.fluorophore())?;
        integrand.push(d * scale / photon_energy(nu)? * sigma);
    }
    let integral = trapezoid(density.grid(), &integrand);
    Ok(cfg.k_collection()? * cfg.n_mol_per_cm3() * cfg.path_length_cm() * integral)
}

/// Total fluorescence rate (counts/s) of the lumped two-channel model at
/// photon flux `phi`: a linear hot-band term plus a quadratic two-photon
/// term, `K N (sigma_hba phi + sigma_c2pa phi^2 / 2)` where
/// `N = n L S` is the number of molecules in the excitation volume.
pub fn total_signal(cfg: &ExperimentConfig, phi_cm2_s: f64, sigma_hba_cm2: f64) -> Result<f64> {
    if !(phi_cm2_s.is_finite() && phi_cm2_s >= 0.0) {
        return Err(ModelError::invalid(format!(
            "photon flux must be non-negative and finite, got {phi_cm2_s}"
        )));
    }
    if !(sigma_hba_cm2.is_finite() && sigma_hba_cm2 >= 0.0) {
        return Err(ModelError::invalid(format!(
            "hot-band cross section must be non-negative and finite, got {sigma_hba_cm2}"
        )));
    }
    let k = cfg.k_collection()?;
    let n_molecules = cfg.n_mol_per_cm3() * cfg.path_length_cm() * cfg.beam().area_cm2();
    let quadratic = 0.5 * cfg.fluorophore().sigma_c2pa_cm4s() * phi_cm2_s * phi_cm2_s;
    Ok(k * n_molecules * (sigma_hba_cm2 * phi_cm2_s + quadratic))
}

/// Toy photon-pair excitation rate (counts/s): linear in the generated pair
/// rate and quadratic in the per-photon transmission between source and
/// sample (both photons of a pair must survive).
pub fn e2pa_signal_toy(
    cfg: &ExperimentConfig,
    pair_rate_s: f64,
    sigma_e2pa_cm2: f64,
    per_photon_transmission: f64,
) -> Result<f64> {
    if !(pair_rate_s.is_finite() && pair_rate_s >= 0.0) {
        return Err(ModelError::invalid(format!(
            "pair rate must be non-negative and finite, got {pair_rate_s}"
        )));
    }
    if !(sigma_e2pa_cm2.is_finite() && sigma_e2pa_cm2 >= 0.0) {
        return Err(ModelError::invalid(format!(
            "pair cross section must be non-negative and finite, got {sigma_e2pa_cm2}"
        )));
    }
    if !(per_photon_transmission.is_finite() && (0.0..=1.0).contains(&per_photon_transmission)) {
        return Err(ModelError::invalid(format!(
            "per-photon transmission must be in [0, 1], got {per_photon_transmission}"
        )));
    }
    let k = cfg.k_collection()?;
    Ok(k * cfg.n_mol_per_cm3()
        * cfg.path_length_cm()
        * sigma_e2pa_cm2
        * pair_rate_s
        * (per_photon_transmission * per_photon_transmission))
}

/// Excitation mechanism used by the forward simulator.
#[derive(Debug, Clone, Copy)]
pub enum Mechanism {
    /// One-photon hot-band absorption of the source spectrum.
    HotBand,
    /// Classical two-photon excitation (Gaussian-beam quadratic model).
    ClassicalTwoPhoton,
    /// Lumped linear-plus-quadratic model with the given hot-band cross
    /// section (cm^2); the quadratic channel uses the fluorophore's
    /// two-photon cross section.
    Mixed { sigma_hba_cm2: f64 },
    /// Toy photon-pair excitation with the given pair cross section (cm^2).
    EntangledToy { sigma_e2pa_cm2: f64 },
}

/// Simulates a count-rate series over the given sweep values (W).
///
/// For [`SweepKind::PumpPower`] each value is the delivered source power.
/// For [`SweepKind::PostAttenuation`] the largest value is the fixed source
/// power and each value expresses a post-source attenuation `value / max`:
/// classical mechanisms only see the delivered power, while the pair
/// mechanism keeps the source pair rate fixed and squares the per-photon
/// transmission.
///
/// With `seed = Some(s)` every point draws Poisson counts of
/// `(rate + background) * dwell` from its own counter-indexed RNG stream, so
/// a point's draw depends only on the seed, its index, and its mean.
/// Background is subtracted from the realized count rate, clipping at zero
/// (flagged on the point); the quoted uncertainty is `sqrt(max(counts, 1))
/// / dwell`. With `seed = None` the rates are the exact model values and the
/// uncertainty is the Poisson error such a measurement would carry,
/// `sqrt((rate + background) / dwell)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_power_series(
    cfg: &ExperimentConfig,
    source: &ExcitationSource,
    mechanism: Mechanism,
    sweep: SweepKind,
    powers_w: &[f64],
    dwell_s: f64,
    background_cps: f64,
    seed: Option<u64>,
) -> Result<PowerSeries> {
    if powers_w.is_empty() {
        return Err(ModelError::invalid("sweep needs at least one power value"));
    }
    for &p in powers_w {
        if !(p.is_finite() && p > 0.0) {
            return Err(ModelError::invalid(format!(
                "sweep powers must be positive and finite, got {p} W"
            )));
        }
    }
    for w in powers_w.windows(2) {
        if !(w[1] > w[0]) {
            return Err(ModelError::invalid(format!(
                "sweep powers must be strictly ascending ({} then {} W)",
                w[0], w[1]
            )));
        }
    }
    if !(dwell_s.is_finite() && dwell_s > 0.0) {
        return Err(ModelError::invalid(format!(
            "dwell time must be positive and finite, got {dwell_s} s"
        )));
    }
    if !(background_cps.is_finite() && background_cps >= 0.0) {
        return Err(ModelError::invalid(format!(
            "background rate must be non-negative and finite, got {background_cps}"
        )));
    }

    let source_power_w = *powers_w.last().unwrap();
    let lambda_eff = source.effective_wavelength_nm();

    let mut points = Vec::with_capacity(powers_w.len());
    for (i, &p) in powers_w.iter().enumerate() {
        let expected = match mechanism {
            Mechanism::HotBand => hba_signal(cfg, &source.with_power(p)?)?,
            Mechanism::ClassicalTwoPhoton => c2pef_signal(cfg, &source.with_power(p)?)?,
            Mechanism::Mixed { sigma_hba_cm2 } => {
                let phi = photon_flux_cm2_s(p, lambda_eff, cfg.beam().area_cm2())?;
                total_signal(cfg, phi, sigma_hba_cm2)?
            }
            Mechanism::EntangledToy { sigma_e2pa_cm2 } => match sweep {
                SweepKind::PumpPower => {
                    e2pa_signal_toy(cfg, pair_rate_s(p, lambda_eff)?, sigma_e2pa_cm2, 1.0)?
                }
                SweepKind::PostAttenuation => e2pa_signal_toy(
                    cfg,
                    pair_rate_s(source_power_w, lambda_eff)?,
                    sigma_e2pa_cm2,
                    p / source_power_w,
                )?,
            },
        };

        let (rate_cps, rate_err_cps, clamped) = match seed {
            Some(s) => {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                rng.set_stream(i as u64);
                let mean_counts = (expected + background_cps) * dwell_s;
                let counts = if mean_counts > 0.0 {
                    Poisson::new(mean_counts)
                        .map_err(|e| {
                            ModelError::invalid(format!("invalid Poisson mean {mean_counts}: {e}"))
                        })?
                        .sample(&mut rng)
                } else {
                    0.0
                };
                let raw = counts / dwell_s - background_cps;
                let err = counts.max(1.0).sqrt() / dwell_s;
                if raw < 0.0 {
                    (0.0, err, true)
                } else {
                    (raw, err, false)
                }
            }
            None => {
                let err = ((expected + background_cps) * dwell_s).sqrt() / dwell_s;
                (expected, err, false)
            }
        };

        points.push(SeriesPoint {
            x: p,
            rate_cps,
            rate_err_cps,
            dwell_s,
            clamped,
        });
    }
    PowerSeries::new(points, sweep, SeriesAxis::Power)
}

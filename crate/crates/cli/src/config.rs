//! Declarative run configuration.
//!
//! A run is described by one TOML file with five sections: `[fluorophore]`
//! (photophysical record plus spectra paths), `[experiment]` (bench
//! geometry and sample), `[source]` (excitation), `[collection]` (filter
//! and detector curves), and `[run]` (seed, dwell, output). Unknown keys
//! anywhere are hard errors, so a typo cannot silently fall back to a
//! default.
//!
//! Loading resolves every default and relative path and returns both the
//! constructed domain objects and an echo of the resolved configuration.
//! The echo serializes back to a valid config file that reproduces the run
//! exactly: the band-crossing wavelength found by `"auto"` is locked to its
//! nanometer rendering, so reloading the echo rebuilds bit-identical model
//! inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tpef_core::constants::GM_CM4_S;
use tpef_core::photophysics::{find_nu_max, Fluorophore};
use tpef_core::signal::{BeamGeometry, CollectionChain, ExcitationSource, ExperimentConfig};
use tpef_core::spectra::{
    frequency_to_wavelength, wavelength_to_frequency, Spectrum, SpectrumKind,
};

use crate::error::CliError;

/// Whole-file run configuration. Field names are the on-disk keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fluorophore: FluorophoreSection,
    pub experiment: ExperimentSection,
    pub source: SourceSection,
    #[serde(default)]
    pub collection: CollectionSection,
    #[serde(default)]
    pub run: RunSection,
}

/// `[fluorophore]`: the photophysical record and its spectra.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluorophoreSection {
    pub name: String,
    /// Fluorescence quantum yield.
    pub eta: f64,
    /// Peak molar extinction coefficient (M^-1 cm^-1).
    pub epsilon_max: f64,
    /// Band-crossing wavelength (nm), or "auto" to locate the crossing of
    /// the peak-normalized absorption and emission profiles.
    #[serde(default)]
    pub nu_max_nm: NuMaxSpec,
    /// Two-photon cross section (GM).
    pub sigma_c2pa_gm: f64,
    /// Absorption spectrum CSV (`wavelength_nm,value`).
    pub absorption_csv: String,
    /// Emission spectrum CSV (`wavelength_nm,value`).
    pub emission_csv: String,
}

/// A band-crossing wavelength: either explicit nanometers or `"auto"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NuMaxSpec {
    Nanometers(f64),
    Keyword(String),
}

impl Default for NuMaxSpec {
    fn default() -> Self {
        NuMaxSpec::Keyword("auto".to_string())
    }
}

/// `[experiment]`: sample and bench geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Sample concentration (mmol/L).
    #[serde(rename = "concentration_mM")]
    pub concentration_mm: f64,
    /// Illuminated path length (cm).
    pub path_length_cm: f64,
    /// Beam intensity FWHM along x (um).
    pub beam_fwhm_x_um: f64,
    /// Beam intensity FWHM along y (um).
    pub beam_fwhm_y_um: f64,
    /// Geometric collection efficiency of the objective and relay optics.
    pub kappa: f64,
    /// Sample temperature (K); defaults to 298.15.
    #[serde(rename = "temperature_K", default = "default_temperature_k")]
    pub temperature_k: f64,
    /// Detector background rate (counts/s); defaults to 0.
    #[serde(default)]
    pub background_cps: f64,
}

fn default_temperature_k() -> f64 {
    298.15
}

/// `[source]`: the excitation source.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    /// "laser" (monochromatic line) or "spdc" (broadband density from CSV).
    #[serde(rename = "type")]
    pub kind: String,
    /// Line center (nm); lasers only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_nm: Option<f64>,
    /// Line FWHM (nm); lasers only, defaults to 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linewidth_fwhm_nm: Option<f64>,
    /// Relative spectral power density CSV; spdc only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum_csv: Option<String>,
    /// Hard short-wavelength cutoff (nm) applied to the density; spdc only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blue_cutoff_nm: Option<f64>,
    /// Power delivered to the sample (W).
    pub power_w: f64,
}

/// `[collection]`: emission-side filter and detector curves.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CollectionSection {
    /// Transmission curves applied in series (CSV paths).
    pub filter_csv: Vec<String>,
    /// Detector quantum-efficiency curve (CSV path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmt_qe_csv: Option<String>,
}

/// `[run]`: execution options.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Counting-noise RNG seed; omit for noise-free model output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Dwell time per sweep point (s); defaults to 10.
    pub dwell_s: f64,
    /// Default output directory for this run's artifacts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: None,
            dwell_s: 10.0,
            output_dir: None,
        }
    }
}

/// A parsed, validated configuration with its domain objects built and
/// every default and path resolved.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    /// The resolved configuration; serializing it reproduces the run.
    pub echo: RunConfig,
    pub experiment: ExperimentConfig,
    pub source: ExcitationSource,
}

/// Reads and resolves a TOML run configuration.
pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let raw: RunConfig =
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let base = std::path::absolute(&parent)?;
    resolve(raw, &base)
}

fn resolve(mut cfg: RunConfig, base: &Path) -> Result<LoadedConfig, CliError> {
    // Absolutize every referenced path so the echoed config is portable.
    cfg.fluorophore.absorption_csv = absolutize(base, &cfg.fluorophore.absorption_csv);
    cfg.fluorophore.emission_csv = absolutize(base, &cfg.fluorophore.emission_csv);
    for filter in &mut cfg.collection.filter_csv {
        *filter = absolutize(base, filter);
    }
    if let Some(qe) = cfg.collection.pmt_qe_csv.take() {
        cfg.collection.pmt_qe_csv = Some(absolutize(base, &qe));
    }
    if let Some(spec) = cfg.source.spectrum_csv.take() {
        cfg.source.spectrum_csv = Some(absolutize(base, &spec));
    }
    if let Some(dir) = cfg.run.output_dir.take() {
        cfg.run.output_dir = Some(absolutize(base, &dir));
    }

    if !(cfg.experiment.background_cps.is_finite() && cfg.experiment.background_cps >= 0.0) {
        return Err(CliError::config(format!(
            "experiment.background_cps must be non-negative and finite, got {}",
            cfg.experiment.background_cps
        )));
    }
    if !(cfg.run.dwell_s.is_finite() && cfg.run.dwell_s > 0.0) {
        return Err(CliError::config(format!(
            "run.dwell_s must be positive and finite, got {}",
            cfg.run.dwell_s
        )));
    }

    let absorption = read_spectrum(&cfg.fluorophore.absorption_csv, SpectrumKind::Absorption)?;
    let emission = read_spectrum(&cfg.fluorophore.emission_csv, SpectrumKind::Emission)?;

    // Resolve the band-crossing wavelength. An "auto" crossing is locked to
    // its nanometer rendering before use, so this run and any rerun of the
    // echoed config derive the crossing frequency from the same literal.
    let nu_max_nm = match &cfg.fluorophore.nu_max_nm {
        NuMaxSpec::Nanometers(nm) => *nm,
        NuMaxSpec::Keyword(word) if word == "auto" => {
            let found = find_nu_max(&absorption, &emission)?;
            frequency_to_wavelength(found)?
        }
        NuMaxSpec::Keyword(word) => {
            return Err(CliError::config(format!(
                "fluorophore.nu_max_nm must be a wavelength in nm or \"auto\", got \"{word}\""
            )));
        }
    };
    cfg.fluorophore.nu_max_nm = NuMaxSpec::Nanometers(nu_max_nm);
    let nu_max_hz = wavelength_to_frequency(nu_max_nm)?;

    let fluorophore = Fluorophore::new(
        &cfg.fluorophore.name,
        cfg.fluorophore.eta,
        cfg.fluorophore.epsilon_max,
        nu_max_hz,
        cfg.fluorophore.sigma_c2pa_gm * GM_CM4_S,
        absorption,
        emission,
    )?;

    let beam = BeamGeometry::new(cfg.experiment.beam_fwhm_x_um, cfg.experiment.beam_fwhm_y_um)?;
    let mut filters = Vec::with_capacity(cfg.collection.filter_csv.len());
    for path in &cfg.collection.filter_csv {
        filters.push(read_spectrum(path, SpectrumKind::Transmission)?);
    }
    let detector_qe = match &cfg.collection.pmt_qe_csv {
        Some(path) => Some(read_spectrum(path, SpectrumKind::QuantumEfficiency)?),
        None => None,
    };
    let chain = CollectionChain::new(cfg.experiment.kappa, filters, detector_qe)?;
    let experiment = ExperimentConfig::new(
        fluorophore,
        cfg.experiment.concentration_mm * 1e-3,
        cfg.experiment.path_length_cm,
        beam,
        chain,
        cfg.experiment.temperature_k,
    )?;

    let source = build_source(&mut cfg.source)?;
    Ok(LoadedConfig {
        echo: cfg,
        experiment,
        source,
    })
}

fn build_source(source: &mut SourceSection) -> Result<ExcitationSource, CliError> {
    match source.kind.as_str() {
        "laser" => {
            if source.spectrum_csv.is_some() {
                return Err(CliError::config(
                    "source.spectrum_csv is only valid for source.type = \"spdc\"",
                ));
            }
            if source.blue_cutoff_nm.is_some() {
                return Err(CliError::config(
                    "source.blue_cutoff_nm is only valid for source.type = \"spdc\"",
                ));
            }
            let lambda = source.lambda_nm.ok_or_else(|| {
                CliError::config("source.type = \"laser\" requires source.lambda_nm")
            })?;
            let linewidth = *source.linewidth_fwhm_nm.get_or_insert(1.0);
            Ok(ExcitationSource::monochromatic(
                lambda,
                linewidth,
                source.power_w,
            )?)
        }
        "spdc" => {
            if source.lambda_nm.is_some() || source.linewidth_fwhm_nm.is_some() {
                return Err(CliError::config(
                    "source.lambda_nm and source.linewidth_fwhm_nm are only valid for \
                     source.type = \"laser\"",
                ));
            }
            let path = source.spectrum_csv.clone().ok_or_else(|| {
                CliError::config("source.type = \"spdc\" requires source.spectrum_csv")
            })?;
            let mut density = read_spectrum(&path, SpectrumKind::SpectralPowerDensity)?;
            if let Some(cutoff) = source.blue_cutoff_nm {
                density = density.truncated_below(cutoff)?;
            }
            Ok(ExcitationSource::broadband(density, source.power_w)?)
        }
        other => Err(CliError::config(format!(
            "source.type must be \"laser\" or \"spdc\", got \"{other}\""
        ))),
    }
}

fn read_spectrum(path: &str, kind: SpectrumKind) -> Result<Spectrum, CliError> {
    Spectrum::read_csv_file(Path::new(path), kind).map_err(|e| CliError::from(e).with_prefix(path))
}

fn absolutize(base: &Path, value: &str) -> String {
    let p = Path::new(value);
    if p.is_absolute() {
        value.to_string()
    } else {
        base.join(p).to_string_lossy().into_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_file(dir: &Path, name: &str, contents: &str) -> String {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path.to_string_lossy().into_owned()
    }

    fn gaussian_csv(lo: f64, hi: f64, step: f64, center: f64, fwhm: f64) -> String {
        let sg = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let mut text = String::from("wavelength_nm,value\n");
        let n = ((hi - lo) / step).round() as usize + 1;
        for i in 0..n {
            let l = lo + step * i as f64;
            let d = l - center;
            text.push_str(&format!("{},{}\n", l, (-(d * d) / (2.0 * sg * sg)).exp()));
        }
        text
    }

    fn write_minimal_fixture(dir: &Path) -> (String, String) {
        let abs = write_file(
            dir,
            "abs.csv",
            &gaussian_csv(400.0, 650.0, 1.0, 530.0, 40.0),
        );
        let emi = write_file(
            dir,
            "emi.csv",
            &gaussian_csv(480.0, 700.0, 1.0, 560.0, 40.0),
        );
        (abs, emi)
    }

    fn minimal_config_text() -> &'static str {
        r#"
[fluorophore]
name = "dye"
eta = 0.9
epsilon_max = 1.16e5
nu_max_nm = 545.0
sigma_c2pa_gm = 9.9
absorption_csv = "abs.csv"
emission_csv = "emi.csv"

[experiment]
concentration_mM = 1.1
path_length_cm = 1.0
beam_fwhm_x_um = 55.0
beam_fwhm_y_um = 57.0
kappa = 0.042

[source]
type = "laser"
lambda_nm = 1060.0
power_w = 1e-3
"#
    }

    #[test]
    fn minimal_laser_config_loads_with_defaults_materialized() {
        let dir = tempfile::tempdir().unwrap();
        write_minimal_fixture(dir.path());
        let cfg_path = dir.path().join("run.toml");
        fs::write(&cfg_path, minimal_config_text()).unwrap();

        let loaded = load_config(&cfg_path).unwrap();
        assert_eq!(loaded.echo.experiment.temperature_k, 298.15);
        assert_eq!(loaded.echo.experiment.background_cps, 0.0);
        assert_eq!(loaded.echo.run.dwell_s, 10.0);
        assert_eq!(loaded.echo.source.linewidth_fwhm_nm, Some(1.0));
        assert_eq!(loaded.experiment.temperature_k(), 298.15);
        assert_eq!(loaded.source.effective_wavelength_nm(), 1060.0);
        assert!(Path::new(&loaded.echo.fluorophore.absorption_csv).is_absolute());
    }

    #[test]
    fn unknown_keys_are_hard_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_minimal_fixture(dir.path());
        let cfg_path = dir.path().join("run.toml");
        let text = format!("{}\n[run]\ndwel_s = 3.0\n", minimal_config_text());
        fs::write(&cfg_path, text).unwrap();

        let err = load_config(&cfg_path).unwrap_err();
        assert_eq!(err.kind, "config");
        assert_eq!(err.exit_code, 1);
        assert!(err.message.contains("dwel_s"), "message: {}", err.message);
    }

    #[test]
    fn auto_crossing_resolves_to_a_number_in_the_echo() {
        let dir = tempfile::tempdir().unwrap();
        write_minimal_fixture(dir.path());
        let cfg_path = dir.path().join("run.toml");
        let text = minimal_config_text().replace("nu_max_nm = 545.0", "nu_max_nm = \"auto\"");
        fs::write(&cfg_path, text).unwrap();

        let loaded = load_config(&cfg_path).unwrap();
        let nm = match loaded.echo.fluorophore.nu_max_nm {
            NuMaxSpec::Nanometers(nm) => nm,
            ref other => panic!("expected a resolved wavelength, got {other:?}"),
        };
        // Two identical-width Gaussians 30 nm apart cross halfway between.
        assert!((nm - 545.0).abs() < 0.51, "crossing at {nm} nm");
        let nu_used = wavelength_to_frequency(nm).unwrap();
        assert_eq!(loaded.experiment.fluorophore().nu_max_hz(), nu_used);
    }

    #[test]
    fn spdc_source_applies_the_blue_cutoff() {
        let dir = tempfile::tempdir().unwrap();
        write_minimal_fixture(dir.path());
        write_file(
            dir.path(),
            "spdc.csv",
            &gaussian_csv(700.0, 1600.0, 1.0, 1077.4, 128.9),
        );
        let cfg_path = dir.path().join("run.toml");
        let text = minimal_config_text().replace(
            "[source]\ntype = \"laser\"\nlambda_nm = 1060.0\npower_w = 1e-3",
            "[source]\ntype = \"spdc\"\nspectrum_csv = \"spdc.csv\"\nblue_cutoff_nm = 850.0\npower_w = 40e-9",
        );
        fs::write(&cfg_path, text).unwrap();

        let loaded = load_config(&cfg_path).unwrap();
        match loaded.source.shape() {
            tpef_core::signal::SourceShape::Broadband { density } => {
                assert_eq!(density.min_nm(), 850.0);
            }
            other => panic!("expected a broadband source, got {other:?}"),
        }
    }

    #[test]
    fn laser_rejects_spdc_only_keys() {
        let dir = tempfile::tempdir().unwrap();
        write_minimal_fixture(dir.path());
        let cfg_path = dir.path().join("run.toml");
        let text = minimal_config_text()
            .replace("power_w = 1e-3", "power_w = 1e-3\nblue_cutoff_nm = 850.0");
        fs::write(&cfg_path, text).unwrap();

        let err = load_config(&cfg_path).unwrap_err();
        assert_eq!(err.kind, "config");
        assert!(err.message.contains("blue_cutoff_nm"));
    }

    #[test]
    fn echo_reloads_to_the_same_model_inputs() {
        let dir = tempfile::tempdir().unwrap();
        write_minimal_fixture(dir.path());
        let cfg_path = dir.path().join("run.toml");
        let text = minimal_config_text().replace("nu_max_nm = 545.0", "nu_max_nm = \"auto\"");
        fs::write(&cfg_path, text).unwrap();
        let first = load_config(&cfg_path).unwrap();

        let echo_path = dir.path().join("echo.toml");
        fs::write(&echo_path, toml::to_string(&first.echo).unwrap()).unwrap();
        let second = load_config(&echo_path).unwrap();

        assert_eq!(
            first.experiment.fluorophore().nu_max_hz(),
            second.experiment.fluorophore().nu_max_hz()
        );
        assert_eq!(
            first.experiment.k_collection().unwrap(),
            second.experiment.k_collection().unwrap()
        );
        assert_eq!(first.echo.run.dwell_s, second.echo.run.dwell_s);
    }
}

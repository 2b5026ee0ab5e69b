//! Shared fixtures and process helpers for the end-to-end command tests.
//!
//! The synthetic styryl dye here mirrors the library's internal test
//! fixture: a bi-Gaussian absorption band (different flank widths) whose
//! emission band is the exact mirror image about the 672 nm crossing, so
//! hot-band quantities have closed-form expectations. A simpler
//! rhodamine-like dye with plain Gaussian bands covers the classical
//! two-photon paths.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use tpef_core::spectra::{wavelength_to_frequency, Spectrum, SpectrumKind};

/// Captured exit code and streams of one `tpef` invocation.
pub struct CmdOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdOutput {
    /// Parses the single-line JSON error contract from stderr.
    pub fn stderr_error(&self) -> (String, String) {
        let line = self
            .stderr
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .unwrap_or_else(|| panic!("expected a JSON error line on stderr, got none"));
        let v: serde_json::Value = serde_json::from_str(line)
            .unwrap_or_else(|e| panic!("stderr line is not JSON ({e}): {line:?}"));
        let kind = v
            .pointer("/error/kind")
            .and_then(|k| k.as_str())
            .unwrap_or_else(|| panic!("no error.kind in {line:?}"))
            .to_string();
        let message = v
            .pointer("/error/message")
            .and_then(|m| m.as_str())
            .unwrap_or_else(|| panic!("no error.message in {line:?}"))
            .to_string();
        (kind, message)
    }
}

/// Runs the `tpef` binary with the given arguments and a scrubbed
/// environment (no inherited output-directory override).
pub fn run_tpef(args: &[&str]) -> CmdOutput {
    run_tpef_env(args, &[])
}

/// Runs the `tpef` binary with extra environment variables set.
pub fn run_tpef_env(args: &[&str], envs: &[(&str, &str)]) -> CmdOutput {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tpef"));
    cmd.env_remove("TPEF_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.args(args);
    let out = cmd.output().expect("spawn tpef binary");
    CmdOutput {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Runs `tpef` and asserts success, echoing stderr on failure.
pub fn run_tpef_ok(args: &[&str]) -> CmdOutput {
    let out = run_tpef(args);
    assert_eq!(
        out.code, 0,
        "tpef {:?} failed\nstdout: {}\nstderr: {}",
        args, out.stdout, out.stderr
    );
    out
}

/// Reads and parses `report.json` from an output directory.
pub fn read_report(dir: &Path) -> serde_json::Value {
    let path = dir.join("report.json");
    let text =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parse {}: {e}", path.display()))
}

/// Extracts a float at a JSON pointer path (e.g. `/results/fit/a`).
pub fn report_f64(report: &serde_json::Value, pointer: &str) -> f64 {
    report
        .pointer(pointer)
        .and_then(|v| v.as_f64())
        .unwrap_or_else(|| panic!("no float at {pointer} in {report}"))
}

/// Extracts a string at a JSON pointer path.
pub fn report_str(report: &serde_json::Value, pointer: &str) -> String {
    report
        .pointer(pointer)
        .and_then(|v| v.as_str())
        .unwrap_or_else(|| panic!("no string at {pointer} in {report}"))
        .to_string()
}

/// Finds a named parameter in a serialized fit report's `params` array,
/// returning `(value, sigma)`.
pub fn fit_param(report: &serde_json::Value, params_pointer: &str, name: &str) -> (f64, f64) {
    let params = report
        .pointer(params_pointer)
        .and_then(|v| v.as_array())
        .unwrap_or_else(|| panic!("no params array at {params_pointer} in {report}"));
    let param = params
        .iter()
        .find(|p| p.pointer("/name").and_then(|n| n.as_str()) == Some(name))
        .unwrap_or_else(|| panic!("no parameter '{name}' at {params_pointer}"));
    (
        param.pointer("/value").and_then(|v| v.as_f64()).unwrap(),
        param.pointer("/sigma").and_then(|v| v.as_f64()).unwrap(),
    )
}

/// Writes a spectrum to the two-column CSV wire format.
pub fn write_spectrum(path: &Path, spectrum: &Spectrum) {
    let mut buf = Vec::new();
    spectrum.write_csv(&mut buf).unwrap();
    std::fs::write(path, buf).unwrap_or_else(|e| panic!("write {}: {e}", path.display()));
}

/// Band-crossing frequency (672 nm) of the synthetic styryl dye.
pub fn styryl_nu_max_hz() -> f64 {
    wavelength_to_frequency(672.0).unwrap()
}

fn styryl_peak_hz() -> f64 {
    wavelength_to_frequency(555.0).unwrap()
}

/// Red- and blue-flank Gaussian widths (Hz) of the styryl absorption band.
fn styryl_flanks_hz() -> (f64, f64) {
    let nu_max = styryl_nu_max_hz();
    let nu_a = styryl_peak_hz();
    let s_red = ((nu_a - nu_max) * (nu_a - nu_max) / (2.0 * 2.65f64.ln())).sqrt();
    let d_blue = 2.0 * nu_max - 200e12 - nu_a;
    let s_blue = (d_blue * d_blue / (2.0 * (2.65f64 / 0.41).ln())).sqrt();
    (s_red, s_blue)
}

/// Relative absorbance of the styryl dye at frequency `nu_hz`.
pub fn styryl_absorb_rel(nu_hz: f64) -> f64 {
    let (s_red, s_blue) = styryl_flanks_hz();
    let nu_a = styryl_peak_hz();
    let s = if nu_hz >= nu_a { s_blue } else { s_red };
    let d = nu_hz - nu_a;
    (-(d * d) / (2.0 * s * s)).exp()
}

/// Styryl absorption band: 400.0..780.0 nm sampled every 0.1 nm.
pub fn styryl_absorption() -> Spectrum {
    let lambda: Vec<f64> = (0..3801).map(|i| (4000 + i) as f64 / 10.0).collect();
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| styryl_absorb_rel(wavelength_to_frequency(l).unwrap()))
        .collect();
    Spectrum::new(SpectrumKind::Absorption, lambda, values).unwrap()
}

/// Styryl emission band: mirror image of the absorption about the crossing,
/// sampled on 540..1400 nm at 1 nm steps.
pub fn styryl_emission() -> Spectrum {
    let nu_max = styryl_nu_max_hz();
    let lambda: Vec<f64> = (0..861).map(|i| 540.0 + i as f64).collect();
    let values: Vec<f64> = lambda
        .iter()
        .map(|&l| styryl_absorb_rel(2.0 * nu_max - wavelength_to_frequency(l).unwrap()))
        .collect();
    Spectrum::new(SpectrumKind::Emission, lambda, values).unwrap()
}

/// Gaussian band on an integer-nanometer grid.
pub fn gaussian_spectrum(
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

/// Two-node constant spectrum (flat filters, unit efficiencies).
pub fn flat_spectrum(kind: SpectrumKind, lo_nm: f64, hi_nm: f64, value: f64) -> Spectrum {
    Spectrum::new(kind, vec![lo_nm, hi_nm], vec![value, value]).unwrap()
}

/// Gaussian broadband power density centered at 1077.4 nm with 128.9 nm
/// FWHM, on the half-nanometer grid `lo_nm + 0.5 i` with `n` nodes.
pub fn spdc_density(lo_nm: f64, n: usize) -> Spectrum {
    let lambda: Vec<f64> = (0..n).map(|i| lo_nm + 0.5 * i as f64).collect();
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

/// Paths of the styryl fixture files written into one directory.
pub struct StyrylFiles {
    pub absorption: PathBuf,
    pub emission: PathBuf,
    pub filter: PathBuf,
    pub spdc: PathBuf,
}

/// Writes the styryl spectra, a flat collection filter with the given
/// transmission, and an SPDC-shaped source density (700..1600 nm) into
/// `dir`.
pub fn write_styryl_files(dir: &Path, filter_value: f64) -> StyrylFiles {
    let files = StyrylFiles {
        absorption: dir.join("absorption.csv"),
        emission: dir.join("emission.csv"),
        filter: dir.join("filter.csv"),
        spdc: dir.join("spdc.csv"),
    };
    write_spectrum(&files.absorption, &styryl_absorption());
    write_spectrum(&files.emission, &styryl_emission());
    write_spectrum(
        &files.filter,
        &flat_spectrum(SpectrumKind::Transmission, 530.0, 1410.0, filter_value),
    );
    write_spectrum(&files.spdc, &spdc_density(700.0, 1801));
    files
}

/// Renders a styryl-dye run configuration. `nu_max_toml` is the raw TOML
/// value for the crossing wavelength (`"\"auto\""` or a number literal);
/// `source_toml` and `run_toml` are the bodies of the `[source]` and
/// `[run]` tables.
pub fn styryl_config(
    files: &StyrylFiles,
    nu_max_toml: &str,
    concentration_mm: f64,
    source_toml: &str,
    run_toml: &str,
) -> String {
    let run_section = if run_toml.is_empty() {
        String::new()
    } else {
        format!("\n[run]\n{run_toml}\n")
    };
    format!(
        r#"[fluorophore]
name = "styryl-11"
eta = 0.054
epsilon_max = 1.54e4
nu_max_nm = {nu_max_toml}
sigma_c2pa_gm = 220.0
absorption_csv = "{abs}"
emission_csv = "{emi}"

[experiment]
concentration_mM = {concentration_mm}
path_length_cm = 1.0
beam_fwhm_x_um = 55.0
beam_fwhm_y_um = 57.0
kappa = 0.042
background_cps = 4.0

[source]
{source_toml}

[collection]
filter_csv = ["{filt}"]
{run_section}"#,
        abs = files.absorption.display(),
        emi = files.emission.display(),
        filt = files.filter.display(),
    )
}

/// Paths of the rhodamine-like fixture files.
pub struct SimpleDyeFiles {
    pub absorption: PathBuf,
    pub emission: PathBuf,
    pub filter: PathBuf,
}

/// Writes plain Gaussian absorption/emission bands and a flat filter for
/// the rhodamine-like dye into `dir`.
pub fn write_simple_dye_files(dir: &Path, filter_value: f64) -> SimpleDyeFiles {
    let files = SimpleDyeFiles {
        absorption: dir.join("rh_absorption.csv"),
        emission: dir.join("rh_emission.csv"),
        filter: dir.join("rh_filter.csv"),
    };
    write_spectrum(
        &files.absorption,
        &gaussian_spectrum(SpectrumKind::Absorption, 400.0, 650.0, 1.0, 530.0, 40.0),
    );
    write_spectrum(
        &files.emission,
        &gaussian_spectrum(SpectrumKind::Emission, 480.0, 700.0, 1.0, 560.0, 40.0),
    );
    write_spectrum(
        &files.filter,
        &flat_spectrum(SpectrumKind::Transmission, 470.0, 710.0, filter_value),
    );
    files
}

/// Renders a rhodamine-like run configuration (1.1 mM, 1064 nm laser by
/// default via `source_toml`).
pub fn simple_dye_config(files: &SimpleDyeFiles, source_toml: &str, run_toml: &str) -> String {
    let run_section = if run_toml.is_empty() {
        String::new()
    } else {
        format!("\n[run]\n{run_toml}\n")
    };
    format!(
        r#"[fluorophore]
name = "rh6g-like"
eta = 0.9
epsilon_max = 1.16e5
nu_max_nm = 540.0
sigma_c2pa_gm = 9.9
absorption_csv = "{abs}"
emission_csv = "{emi}"

[experiment]
concentration_mM = 1.1
path_length_cm = 1.0
beam_fwhm_x_um = 55.0
beam_fwhm_y_um = 57.0
kappa = 0.042

[source]
{source_toml}

[collection]
filter_csv = ["{filt}"]
{run_section}"#,
        abs = files.absorption.display(),
        emi = files.emission.display(),
        filt = files.filter.display(),
    )
}

//! `tpef spectrum`: spectrum utilities (mirror construction, Gaussian line
//! fit, collection overlap, band crossing, vibronic mirror ratio).

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use tpef_core::photophysics::{fc_ratio, find_nu_max};
use tpef_core::signal::{gamma_overlap, CollectionChain};
use tpef_core::spectra::{
    frequency_to_wavelength, wavelength_to_frequency, Spectrum, SpectrumKind,
};

use crate::commands::resolve_out_dir;
use crate::error::CliError;
use crate::io::atomic_write;
use crate::report::Report;

#[derive(Debug, Subcommand)]
pub enum SpectrumCmd {
    /// Build a symmetric spectrum from the samples red of a center
    /// wavelength (point reflection, keeping the red side).
    Mirror(MirrorArgs),
    /// Fit a single Gaussian line to a spectrum.
    Gaussfit(GaussfitArgs),
    /// Spectral overlap of an emission band with a filter/detector chain.
    Gamma(GammaArgs),
    /// Locate the band-crossing wavelength of the peak-normalized
    /// absorption and emission profiles.
    Numax(NumaxArgs),
    /// Vibronic mirror ratio of an absorption band at a wavelength.
    Fc(FcArgs),
}

#[derive(Debug, Args)]
pub struct MirrorArgs {
    /// Input spectrum CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Mirror center (nm).
    #[arg(long)]
    pub center_nm: f64,
    /// Physical kind of the input spectrum.
    #[arg(long, value_enum, default_value_t = KindArg::SpectralPowerDensity)]
    pub kind: KindArg,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GaussfitArgs {
    /// Input spectrum CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Physical kind of the input spectrum.
    #[arg(long, value_enum, default_value_t = KindArg::SpectralPowerDensity)]
    pub kind: KindArg,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GammaArgs {
    /// Emission spectrum CSV.
    #[arg(long)]
    pub emission: PathBuf,
    /// Transmission filter CSV; repeat for a filter stack.
    #[arg(long = "filter")]
    pub filters: Vec<PathBuf>,
    /// Detector quantum-efficiency CSV.
    #[arg(long)]
    pub pmt_qe: Option<PathBuf>,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NumaxArgs {
    /// Absorption spectrum CSV.
    #[arg(long)]
    pub absorption: PathBuf,
    /// Emission spectrum CSV.
    #[arg(long)]
    pub emission: PathBuf,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FcArgs {
    /// Absorption spectrum CSV.
    #[arg(long)]
    pub absorption: PathBuf,
    /// Band-crossing wavelength (nm).
    #[arg(long)]
    pub crossing_nm: f64,
    /// Excitation wavelength (nm) to evaluate at.
    #[arg(long)]
    pub lambda_nm: f64,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Spectrum kinds addressable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    #[value(name = "absorption")]
    Absorption,
    #[value(name = "emission")]
    Emission,
    #[value(name = "transmission")]
    Transmission,
    #[value(name = "quantum_efficiency")]
    QuantumEfficiency,
    #[value(name = "spectral_power_density")]
    SpectralPowerDensity,
}

impl KindArg {
    fn to_kind(self) -> SpectrumKind {
        match self {
            KindArg::Absorption => SpectrumKind::Absorption,
            KindArg::Emission => SpectrumKind::Emission,
            KindArg::Transmission => SpectrumKind::Transmission,
            KindArg::QuantumEfficiency => SpectrumKind::QuantumEfficiency,
            KindArg::SpectralPowerDensity => SpectrumKind::SpectralPowerDensity,
        }
    }
}

fn read_spectrum(path: &Path, kind: SpectrumKind) -> Result<Spectrum, CliError> {
    Spectrum::read_csv_file(path, kind).map_err(|e| CliError::from(e).with_prefix(path.display()))
}

fn write_report(
    out: Option<&Path>,
    results: serde_json::Value,
    argv: &[String],
    summary: &str,
) -> Result<(), CliError> {
    let out_dir = resolve_out_dir(out, None);
    std::fs::create_dir_all(&out_dir)?;
    let report = Report::new(None, results, argv.to_vec(), None);
    let report_path = report.write(&out_dir)?;
    println!("{summary}");
    println!("report: {}", report_path.display());
    Ok(())
}

pub fn run(cmd: &SpectrumCmd, argv: &[String]) -> Result<(), CliError> {
    match cmd {
        SpectrumCmd::Mirror(args) => {
            let spectrum = read_spectrum(&args.input, args.kind.to_kind())?;
            let mirrored = spectrum.mirror_about_center(args.center_nm)?;
            let out_dir = resolve_out_dir(args.out.as_deref(), None);
            std::fs::create_dir_all(&out_dir)?;
            let csv_path = out_dir.join("mirrored.csv");
            let mut buffer = Vec::new();
            mirrored.write_csv(&mut buffer)?;
            let text = String::from_utf8(buffer).expect("CSV output is ASCII");
            atomic_write(&csv_path, &text)?;
            let results = serde_json::json!({
                "operation": "spectrum_mirror",
                "center_nm": args.center_nm,
                "input_points": spectrum.len(),
                "output_points": mirrored.len(),
                "span_nm": [mirrored.min_nm(), mirrored.max_nm()],
                "output_csv": "mirrored.csv",
            });
            write_report(
                args.out.as_deref(),
                results,
                argv,
                &format!(
                    "mirror: {} points about {} nm -> {}",
                    mirrored.len(),
                    args.center_nm,
                    csv_path.display()
                ),
            )
        }
        SpectrumCmd::Gaussfit(args) => {
            let spectrum = read_spectrum(&args.input, args.kind.to_kind())?;
            let fit = spectrum.fit_gaussian()?;
            let results = serde_json::json!({
                "operation": "spectrum_gaussfit",
                "fit": fit,
            });
            write_report(
                args.out.as_deref(),
                results,
                argv,
                &format!(
                    "gaussfit: center = {:.4} nm, fwhm = {:.4} nm, amplitude = {:.6e}",
                    fit.center_nm, fit.fwhm_nm, fit.amplitude
                ),
            )
        }
        SpectrumCmd::Gamma(args) => {
            let emission = read_spectrum(&args.emission, SpectrumKind::Emission)?;
            let mut filters = Vec::with_capacity(args.filters.len());
            for path in &args.filters {
                filters.push(read_spectrum(path, SpectrumKind::Transmission)?);
            }
            let detector_qe = match &args.pmt_qe {
                Some(path) => Some(read_spectrum(path, SpectrumKind::QuantumEfficiency)?),
                None => None,
            };
            // kappa does not enter the overlap; the chain carries a
            // placeholder of 1.
            let chain = CollectionChain::new(1.0, filters, detector_qe)?;
            let gamma = gamma_overlap(&emission, &chain)?;
            let results = serde_json::json!({
                "operation": "spectrum_gamma",
                "gamma": gamma,
                "n_filters": args.filters.len(),
                "has_detector_qe": args.pmt_qe.is_some(),
            });
            write_report(
                args.out.as_deref(),
                results,
                argv,
                &format!("gamma = {gamma}"),
            )
        }
        SpectrumCmd::Numax(args) => {
            let absorption = read_spectrum(&args.absorption, SpectrumKind::Absorption)?;
            let emission = read_spectrum(&args.emission, SpectrumKind::Emission)?;
            let nu_max_hz = find_nu_max(&absorption, &emission)?;
            let lambda_nm = frequency_to_wavelength(nu_max_hz)?;
            let results = serde_json::json!({
                "operation": "spectrum_numax",
                "nu_max_hz": nu_max_hz,
                "lambda_nm": lambda_nm,
            });
            write_report(
                args.out.as_deref(),
                results,
                argv,
                &format!("numax: {lambda_nm} nm ({nu_max_hz} Hz)"),
            )
        }
        SpectrumCmd::Fc(args) => {
            let absorption = read_spectrum(&args.absorption, SpectrumKind::Absorption)?;
            let nu_hz = wavelength_to_frequency(args.lambda_nm)?;
            let nu_max_hz = wavelength_to_frequency(args.crossing_nm)?;
            let fc = fc_ratio(nu_hz, &absorption, nu_max_hz)?;
            let results = serde_json::json!({
                "operation": "spectrum_fc",
                "lambda_nm": args.lambda_nm,
                "crossing_nm": args.crossing_nm,
                "fc": fc,
            });
            write_report(
                args.out.as_deref(),
                results,
                argv,
                &format!("fc({} nm) = {fc}", args.lambda_nm),
            )
        }
    }
}

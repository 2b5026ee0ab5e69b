//! `tpef derive`: invert a sweep into an absorption cross section.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tpef_core::constants::GM_CM4_S;
use tpef_core::inference::{
    derive_sigma_c2pa, derive_sigma_hba_from_fit, fit_linear_quadratic, RegimePolicy,
};
use tpef_core::series::SeriesAxis;

use crate::commands::resolve_out_dir;
use crate::config::load_config;
use crate::error::CliError;
use crate::io::read_power_series_file;
use crate::report::Report;

#[derive(Debug, Args)]
pub struct DeriveArgs {
    /// Run configuration (TOML) describing the bench behind the series.
    #[arg(long)]
    pub config: PathBuf,
    /// Input count-rate sweep CSV.
    #[arg(long)]
    pub series: PathBuf,
    /// Which cross section to derive.
    #[arg(long, value_enum)]
    pub quantity: QuantityArg,
    /// What to do when the sweep fails the quadratic-regime slope check
    /// (--quantity c2pa).
    #[arg(long, value_enum, default_value_t = PolicyArg::Warn)]
    pub policy: PolicyArg,
    /// Two-photon anchor cross section (GM); required by --quantity hba.
    #[arg(long)]
    pub sigma_c2pa_gm: Option<f64>,
    /// One-sigma uncertainty of the anchor (GM).
    #[arg(long, default_value_t = 0.0)]
    pub sigma_c2pa_err_gm: f64,
    /// Output directory (falls back to run.output_dir, then $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    /// Classical two-photon cross section from a quadratic sweep.
    C2pa,
    /// Hot-band cross section from the linear amplitude, anchored to a
    /// known two-photon cross section.
    Hba,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    /// Note the violation on the report and continue.
    Warn,
    /// Fail with a numerical error.
    Abort,
}

impl PolicyArg {
    fn to_policy(self) -> RegimePolicy {
        match self {
            PolicyArg::Warn => RegimePolicy::Warn,
            PolicyArg::Abort => RegimePolicy::Abort,
        }
    }
}

/// The systematic inputs the derivation takes as exact, recorded on every
/// report so the quoted uncertainty's scope is explicit.
fn uncertainty_budget(statistical_err_desc: &str) -> serde_json::Value {
    serde_json::json!({
        "statistical": statistical_err_desc,
        "systematic_inputs_treated_as_exact": [
            "kappa (geometric collection)",
            "spectral overlap gamma (filter and detector curves)",
            "eta (quantum yield)",
            "concentration_mM",
            "path_length_cm",
            "beam area",
            "delivered power calibration",
            "photon energy (wavelength calibration)",
        ],
    })
}

pub fn run(args: &DeriveArgs, argv: &[String]) -> Result<(), CliError> {
    let loaded = load_config(&args.config)?;
    let series = read_power_series_file(&args.series)?;
    let lambda_nm = loaded.source.effective_wavelength_nm();

    let (results, summary) = match args.quantity {
        QuantityArg::C2pa => {
            if args.sigma_c2pa_gm.is_some() {
                return Err(CliError::usage(
                    "--sigma-c2pa-gm is the anchor for --quantity hba; \
                     --quantity c2pa derives it instead",
                ));
            }
            let derivation = derive_sigma_c2pa(
                &series,
                &loaded.experiment,
                lambda_nm,
                args.policy.to_policy(),
            )?;
            let summary = format!(
                "sigma_c2pa = {:.6} +/- {:.6} GM (slope {:.4})",
                derivation.sigma_gm, derivation.sigma_err_gm, derivation.slope
            );
            let results = serde_json::json!({
                "operation": "derive",
                "quantity": "c2pa",
                "lambda_nm": lambda_nm,
                "derivation": derivation,
                "uncertainty_budget": uncertainty_budget(
                    "sigma_err_gm, from the quadratic-amplitude fit covariance",
                ),
            });
            (results, summary)
        }
        QuantityArg::Hba => {
            let anchor_gm = args.sigma_c2pa_gm.ok_or_else(|| {
                CliError::usage("--quantity hba requires --sigma-c2pa-gm (the two-photon anchor)")
            })?;
            let flux_series = match series.axis() {
                SeriesAxis::Flux => series,
                SeriesAxis::Power => {
                    series.to_flux_axis(lambda_nm, loaded.experiment.beam().area_cm2())?
                }
            };
            let fit = fit_linear_quadratic(&flux_series)?;
            let (sigma_hba_cm2, sigma_hba_err_cm2) = derive_sigma_hba_from_fit(
                &fit,
                anchor_gm * GM_CM4_S,
                args.sigma_c2pa_err_gm * GM_CM4_S,
            )?;
            let summary =
                format!("sigma_hba = {sigma_hba_cm2:.6e} +/- {sigma_hba_err_cm2:.6e} cm^2");
            let results = serde_json::json!({
                "operation": "derive",
                "quantity": "hba",
                "lambda_nm": lambda_nm,
                "sigma_hba_cm2": sigma_hba_cm2,
                "sigma_hba_err_cm2": sigma_hba_err_cm2,
                "anchor_sigma_c2pa_gm": anchor_gm,
                "anchor_sigma_c2pa_err_gm": args.sigma_c2pa_err_gm,
                "fit": fit,
                "uncertainty_budget": uncertainty_budget(
                    "sigma_hba_err_cm2, from the amplitude-fit covariance and the anchor \
                     uncertainty",
                ),
            });
            (results, summary)
        }
    };

    let out_dir = resolve_out_dir(args.out.as_deref(), loaded.echo.run.output_dir.as_deref());
    std::fs::create_dir_all(&out_dir)?;
    let report = Report::new(Some(loaded.echo), results, argv.to_vec(), None);
    let report_path = report.write(&out_dir)?;

    println!("derive: {summary}");
    println!("report: {}", report_path.display());
    Ok(())
}

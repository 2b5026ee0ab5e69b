//! `tpef fit`: fit a measured or simulated series and emit a plot-ready
//! fit curve.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tpef_core::constants::BOLTZMANN_J_K;
use tpef_core::inference::{
    fit_boltzmann, fit_boltzmann_free_energy, fit_linear_quadratic, fit_loglog_slope,
    fit_loglog_slope_weighted, FitReport,
};
use tpef_core::series::SeriesAxis;

use crate::commands::{geomspace, linspace, resolve_out_dir};
use crate::error::CliError;
use crate::io::{atomic_write, read_power_series_file, read_temperature_series_file};
use crate::report::Report;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input series CSV (count-rate sweep, or temperature sweep for
    /// --model boltzmann).
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long, value_enum)]
    pub model: FitModelArg,
    /// Weight log-log points by their rate uncertainties (slope model).
    #[arg(long)]
    pub weighted: bool,
    /// Excitation wavelength (nm) for converting a power-axis series to
    /// photon flux (linquad model).
    #[arg(long)]
    pub lambda_nm: Option<f64>,
    /// Beam area (cm^2) for the power-to-flux conversion (linquad model).
    #[arg(long)]
    pub area_cm2: Option<f64>,
    /// Activation energy (J); required by the boltzmann model (initial
    /// guess when --free-energy is set, held fixed otherwise).
    #[arg(long)]
    pub activation_energy_j: Option<f64>,
    /// Let the boltzmann activation energy float.
    #[arg(long)]
    pub free_energy: bool,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModelArg {
    /// Log-log power law.
    Slope,
    /// Non-negative linear-plus-quadratic amplitudes on a flux axis.
    Linquad,
    /// Thermally activated rate over temperature.
    Boltzmann,
}

impl FitModelArg {
    pub fn as_str(self) -> &'static str {
        match self {
            FitModelArg::Slope => "slope",
            FitModelArg::Linquad => "linquad",
            FitModelArg::Boltzmann => "boltzmann",
        }
    }
}

/// Number of samples in the emitted fit curve.
const CURVE_POINTS: usize = 101;

pub fn run(args: &FitArgs, argv: &[String]) -> Result<(), CliError> {
    check_flag_consistency(args)?;
    let (fit_json, curve, summary) = match args.model {
        FitModelArg::Slope => fit_slope(args)?,
        FitModelArg::Linquad => fit_linquad(args)?,
        FitModelArg::Boltzmann => fit_boltzmann_series(args)?,
    };

    let out_dir = resolve_out_dir(args.out.as_deref(), None);
    std::fs::create_dir_all(&out_dir)?;
    let curve_path = out_dir.join("fit_curve.csv");
    atomic_write(&curve_path, &curve)?;

    let results = serde_json::json!({
        "operation": "fit",
        "model": args.model.as_str(),
        "series_csv": args.series.display().to_string(),
        "fit": fit_json,
        "curve_csv": "fit_curve.csv",
    });
    let report = Report::new(None, results, argv.to_vec(), None);
    let report_path = report.write(&out_dir)?;

    println!("fit ({}): {summary}", args.model.as_str());
    println!("report: {}", report_path.display());
    Ok(())
}

fn check_flag_consistency(args: &FitArgs) -> Result<(), CliError> {
    if args.weighted && args.model != FitModelArg::Slope {
        return Err(CliError::usage("--weighted only applies to --model slope"));
    }
    if (args.lambda_nm.is_some() || args.area_cm2.is_some()) && args.model != FitModelArg::Linquad {
        return Err(CliError::usage(
            "--lambda-nm/--area-cm2 only apply to --model linquad",
        ));
    }
    if (args.activation_energy_j.is_some() || args.free_energy)
        && args.model != FitModelArg::Boltzmann
    {
        return Err(CliError::usage(
            "--activation-energy-j/--free-energy only apply to --model boltzmann",
        ));
    }
    Ok(())
}

/// Renders a plot-ready curve CSV with the given x-column name.
fn render_curve(x_name: &str, xs: &[f64], ys: &[f64]) -> String {
    let mut out = format!("{x_name},rate_fit_cps\n");
    for (x, y) in xs.iter().zip(ys) {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

/// x-column name matching what the series axis actually holds.
fn axis_column(axis: SeriesAxis) -> &'static str {
    match axis {
        SeriesAxis::Power => "power_w",
        SeriesAxis::Flux => "flux_per_cm2_s",
    }
}

fn param(report: &FitReport, name: &str) -> Result<f64, CliError> {
    report
        .param(name)
        .map(|p| p.value)
        .ok_or_else(|| CliError::usage(format!("fit report lacks parameter '{name}'")))
}

fn fit_slope(args: &FitArgs) -> Result<(serde_json::Value, String, String), CliError> {
    let series = read_power_series_file(&args.series)?;
    let fit = if args.weighted {
        fit_loglog_slope_weighted(&series)?
    } else {
        fit_loglog_slope(&series)?
    };
    let slope = param(&fit, "slope")?;
    let intercept = param(&fit, "log10_intercept")?;

    let points = series.points();
    let xs = geomspace(points[0].x, points[points.len() - 1].x, CURVE_POINTS)?;
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| 10f64.powf(intercept + slope * x.log10()))
        .collect();
    let curve = render_curve(axis_column(series.axis()), &xs, &ys);
    let summary = format!(
        "slope = {slope:.6} +/- {:.6}",
        fit.param("slope").map(|p| p.sigma).unwrap_or(f64::NAN)
    );
    Ok((serde_json::to_value(&fit).unwrap(), curve, summary))
}

fn fit_linquad(args: &FitArgs) -> Result<(serde_json::Value, String, String), CliError> {
    let mut series = read_power_series_file(&args.series)?;
    match series.axis() {
        SeriesAxis::Power => {
            let (lambda_nm, area_cm2) = match (args.lambda_nm, args.area_cm2) {
                (Some(l), Some(a)) => (l, a),
                _ => {
                    return Err(CliError::usage(
                        "this series is on a power axis; pass --lambda-nm and --area-cm2 \
                         to convert it to photon flux",
                    ))
                }
            };
            series = series.to_flux_axis(lambda_nm, area_cm2)?;
        }
        SeriesAxis::Flux => {
            if args.lambda_nm.is_some() || args.area_cm2.is_some() {
                return Err(CliError::usage(
                    "this series is already on a flux axis; drop --lambda-nm/--area-cm2",
                ));
            }
        }
    }
    let fit = fit_linear_quadratic(&series)?;

    let points = series.points();
    let xs = geomspace(points[0].x, points[points.len() - 1].x, CURVE_POINTS)?;
    let ys: Vec<f64> = xs.iter().map(|x| fit.a * x + fit.b * x * x).collect();
    let curve = render_curve(axis_column(series.axis()), &xs, &ys);
    let summary = format!("a = {:.6e}, b = {:.6e}", fit.a, fit.b);
    Ok((serde_json::to_value(&fit).unwrap(), curve, summary))
}

fn fit_boltzmann_series(args: &FitArgs) -> Result<(serde_json::Value, String, String), CliError> {
    let energy_j = args
        .activation_energy_j
        .ok_or_else(|| CliError::usage("--model boltzmann requires --activation-energy-j"))?;
    let points = read_temperature_series_file(&args.series)?;
    let temperatures: Vec<f64> = points.iter().map(|p| p.temperature_k).collect();
    let rates: Vec<f64> = points.iter().map(|p| p.rate_cps).collect();

    let fit = if args.free_energy {
        fit_boltzmann_free_energy(&temperatures, &rates, energy_j)?
    } else {
        fit_boltzmann(&temperatures, &rates, energy_j)?
    };
    let amplitude = param(&fit, "amplitude")?;
    let offset = param(&fit, "offset")?;
    let energy_used = if args.free_energy {
        param(&fit, "activation_energy_j")?
    } else {
        energy_j
    };

    let t_lo = temperatures.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_hi = temperatures
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let xs = linspace(t_lo, t_hi, CURVE_POINTS);
    let ys: Vec<f64> = xs
        .iter()
        .map(|t| amplitude * (-energy_used / (BOLTZMANN_J_K * t)).exp() + offset)
        .collect();
    let curve = render_curve("temperature_k", &xs, &ys);
    let summary = format!("amplitude = {amplitude:.6e}, offset = {offset:.6}");
    Ok((serde_json::to_value(&fit).unwrap(), curve, summary))
}

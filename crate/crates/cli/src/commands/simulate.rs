//! `tpef simulate`: forward-model a photon-counting sweep.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use tpef_core::photophysics::hba_cross_section;
use tpef_core::series::SweepKind;
use tpef_core::signal::{simulate_power_series, Mechanism};
use tpef_core::spectra::wavelength_to_frequency;

use crate::commands::{geomspace, resolve_out_dir};
use crate::config::load_config;
use crate::error::CliError;
use crate::io::{atomic_write, render_power_series};
use crate::report::Report;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Excitation mechanism to simulate.
    #[arg(long, value_enum)]
    pub mechanism: MechanismArg,
    /// Sweep protocol: vary the pump, or attenuate after the source.
    #[arg(long, value_enum)]
    pub sweep: SweepArg,
    /// Comma-separated sweep powers (W), strictly ascending.
    #[arg(long, conflicts_with = "powers_geom")]
    pub powers: Option<String>,
    /// Geometric sweep as "lo_w,hi_w,n".
    #[arg(long)]
    pub powers_geom: Option<String>,
    /// Hot-band cross section override (cm^2) for --mechanism mixed;
    /// defaults to the model value at the source line center.
    #[arg(long)]
    pub sigma_hba_cm2: Option<f64>,
    /// Pair-excitation cross section (cm^2); required for --mechanism e2pa.
    #[arg(long)]
    pub sigma_e2pa_cm2: Option<f64>,
    /// Output directory (falls back to run.output_dir, then $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismArg {
    /// One-photon hot-band absorption.
    Hba,
    /// Classical two-photon excitation.
    C2pa,
    /// Linear-plus-quadratic mixture.
    Mixed,
    /// Toy photon-pair excitation.
    E2pa,
}

impl MechanismArg {
    pub fn as_str(self) -> &'static str {
        match self {
            MechanismArg::Hba => "hba",
            MechanismArg::C2pa => "c2pa",
            MechanismArg::Mixed => "mixed",
            MechanismArg::E2pa => "e2pa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepArg {
    /// Vary the delivered source power.
    #[value(name = "pump_power")]
    PumpPower,
    /// Keep the source fixed and attenuate after it.
    #[value(name = "post_attenuation")]
    PostAttenuation,
}

impl SweepArg {
    pub fn to_sweep(self) -> SweepKind {
        match self {
            SweepArg::PumpPower => SweepKind::PumpPower,
            SweepArg::PostAttenuation => SweepKind::PostAttenuation,
        }
    }
}

pub fn run(args: &SimulateArgs, argv: &[String]) -> Result<(), CliError> {
    let mut loaded = load_config(&args.config)?;
    let powers = parse_powers(args)?;
    let mechanism = build_mechanism(args, &loaded)?;
    let seed = loaded.echo.run.seed;
    let dwell_s = loaded.echo.run.dwell_s;
    let background_cps = loaded.echo.experiment.background_cps;

    let series = simulate_power_series(
        &loaded.experiment,
        &loaded.source,
        mechanism,
        args.sweep.to_sweep(),
        &powers,
        dwell_s,
        background_cps,
        seed,
    )?;

    let out_dir = resolve_out_dir(args.out.as_deref(), loaded.echo.run.output_dir.as_deref());
    std::fs::create_dir_all(&out_dir)?;
    loaded.echo.run.output_dir = Some(
        std::path::absolute(&out_dir)?
            .to_string_lossy()
            .into_owned(),
    );

    let csv_path = out_dir.join("power_series.csv");
    atomic_write(&csv_path, &render_power_series(&series))?;

    let clamped_points = series.points().iter().filter(|p| p.clamped).count();
    let results = serde_json::json!({
        "operation": "simulate",
        "mechanism": args.mechanism.as_str(),
        "sweep_kind": series.sweep().as_str(),
        "axis": series.axis().as_str(),
        "n_points": series.len(),
        "power_min_w": powers.first().copied(),
        "power_max_w": powers.last().copied(),
        "dwell_s": dwell_s,
        "background_cps": background_cps,
        "clamped_points": clamped_points,
        "series_csv": "power_series.csv",
    });
    let report = Report::new(Some(loaded.echo), results, argv.to_vec(), seed);
    let report_path = report.write(&out_dir)?;

    println!(
        "simulate: {} {} points -> {}",
        series.len(),
        args.mechanism.as_str(),
        csv_path.display()
    );
    println!("report: {}", report_path.display());
    Ok(())
}

fn parse_powers(args: &SimulateArgs) -> Result<Vec<f64>, CliError> {
    match (&args.powers, &args.powers_geom) {
        (Some(list), None) => list
            .split(',')
            .map(|cell| {
                cell.trim().parse::<f64>().map_err(|_| {
                    CliError::usage(format!("--powers: cannot parse '{}' as W", cell.trim()))
                })
            })
            .collect(),
        (None, Some(spec)) => {
            let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(CliError::usage(format!(
                    "--powers-geom expects 'lo_w,hi_w,n', got '{spec}'"
                )));
            }
            let lo: f64 = parts[0]
                .parse()
                .map_err(|_| CliError::usage(format!("--powers-geom: bad lo '{}'", parts[0])))?;
            let hi: f64 = parts[1]
                .parse()
                .map_err(|_| CliError::usage(format!("--powers-geom: bad hi '{}'", parts[1])))?;
            let n: usize = parts[2]
                .parse()
                .map_err(|_| CliError::usage(format!("--powers-geom: bad count '{}'", parts[2])))?;
            geomspace(lo, hi, n)
        }
        (None, None) => Err(CliError::usage(
            "one of --powers or --powers-geom is required",
        )),
        (Some(_), Some(_)) => Err(CliError::usage(
            "--powers and --powers-geom are mutually exclusive",
        )),
    }
}

fn build_mechanism(
    args: &SimulateArgs,
    loaded: &crate::config::LoadedConfig,
) -> Result<Mechanism, CliError> {
    if args.sigma_hba_cm2.is_some() && args.mechanism != MechanismArg::Mixed {
        return Err(CliError::usage(
            "--sigma-hba-cm2 only applies to --mechanism mixed",
        ));
    }
    if args.sigma_e2pa_cm2.is_some() && args.mechanism != MechanismArg::E2pa {
        return Err(CliError::usage(
            "--sigma-e2pa-cm2 only applies to --mechanism e2pa",
        ));
    }
    match args.mechanism {
        MechanismArg::Hba => Ok(Mechanism::HotBand),
        MechanismArg::C2pa => Ok(Mechanism::ClassicalTwoPhoton),
        MechanismArg::Mixed => {
            let sigma_hba_cm2 = match args.sigma_hba_cm2 {
                Some(sigma) => sigma,
                None => {
                    let nu = wavelength_to_frequency(loaded.source.effective_wavelength_nm())?;
                    hba_cross_section(
                        nu,
                        loaded.experiment.temperature_k(),
                        loaded.experiment.fluorophore(),
                    )?
                }
            };
            Ok(Mechanism::Mixed { sigma_hba_cm2 })
        }
        MechanismArg::E2pa => {
            let sigma_e2pa_cm2 = args
                .sigma_e2pa_cm2
                .ok_or_else(|| CliError::usage("--mechanism e2pa requires --sigma-e2pa-cm2"))?;
            Ok(Mechanism::EntangledToy { sigma_e2pa_cm2 })
        }
    }
}

//! `tpef discriminate`: classify the excitation mechanism from a
//! pump-power sweep and a post-source attenuation sweep.

use std::path::PathBuf;

use clap::Args;
use tpef_core::inference::discriminate_mechanism;

use crate::commands::resolve_out_dir;
use crate::error::CliError;
use crate::io::read_power_series_file;
use crate::report::Report;

#[derive(Debug, Args)]
pub struct DiscriminateArgs {
    /// Pump-power sweep CSV (sweep_kind pump_power).
    #[arg(long)]
    pub pump: PathBuf,
    /// Post-source attenuation sweep CSV (sweep_kind post_attenuation).
    #[arg(long)]
    pub attenuation: PathBuf,
    /// Half-width of the slope-matching windows around 1 and 2.
    #[arg(long, default_value_t = 0.25)]
    pub threshold: f64,
    /// Output directory (falls back to $TPEF_OUTPUT_DIR).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &DiscriminateArgs, argv: &[String]) -> Result<(), CliError> {
    let pump = read_power_series_file(&args.pump)?;
    let attenuation = read_power_series_file(&args.attenuation)?;
    let verdict = discriminate_mechanism(&pump, &attenuation, args.threshold)?;

    let out_dir = resolve_out_dir(args.out.as_deref(), None);
    std::fs::create_dir_all(&out_dir)?;
    let results = serde_json::json!({
        "operation": "discriminate",
        "pump_csv": args.pump.display().to_string(),
        "attenuation_csv": args.attenuation.display().to_string(),
        "verdict": verdict,
    });
    let report = Report::new(None, results, argv.to_vec(), None);
    let report_path = report.write(&out_dir)?;

    // Any verdict, including `inconclusive`, is a successful classification
    // run: the verdict is data, not an error condition.
    println!(
        "verdict: {} (pump slope {:.4} +/- {:.4}, attenuation slope {:.4} +/- {:.4})",
        verdict.verdict,
        verdict.pump_slope,
        verdict.pump_slope_err,
        verdict.attenuation_slope,
        verdict.attenuation_slope_err
    );
    println!("report: {}", report_path.display());
    Ok(())
}

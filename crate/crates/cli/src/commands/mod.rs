//! Subcommand implementations.

pub mod derive;
pub mod discriminate;
pub mod fit;
pub mod simulate;
pub mod spectrum;

use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TPEF_OUTPUT_DIR";

/// Resolves the output directory: explicit `--out` flag, then the config's
/// `run.output_dir`, then `$TPEF_OUTPUT_DIR`, then the working directory.
pub fn resolve_out_dir(flag: Option<&Path>, config_dir: Option<&str>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = config_dir {
        return PathBuf::from(dir);
    }
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    PathBuf::from(".")
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive, endpoints
/// exact.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(CliError::usage(format!(
            "geometric range needs 0 < lo < hi, got lo = {lo}, hi = {hi}"
        )));
    }
    if n < 2 {
        return Err(CliError::usage(format!(
            "geometric range needs at least 2 points, got {n}"
        )));
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut values: Vec<f64> = (0..n).map(|i| lo * (step * i as f64).exp()).collect();
    values[0] = lo;
    values[n - 1] = hi;
    Ok(values)
}

/// `n` linearly spaced values from `lo` to `hi` inclusive, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && hi > lo);
    let step = (hi - lo) / (n - 1) as f64;
    let mut values: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    values[0] = lo;
    values[n - 1] = hi;
    values
}

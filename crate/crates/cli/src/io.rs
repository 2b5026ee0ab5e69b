//! Wire formats and atomic file writes.
//!
//! Count-rate sweeps travel as CSV with two `#` metadata lines naming the
//! sweep protocol and the x-axis, then the fixed header
//! `power_w,rate_cps,rate_err_cps,dwell_s`. The x column keeps that name on
//! both axes for wire stability; the `axis` metadata line says whether it
//! holds watts (`power`) or photons cm^-2 s^-1 (`flux`). Temperature sweeps
//! use the header `temperature_k,rate_cps,rate_err_cps,dwell_s` and carry
//! no metadata lines.
//!
//! All floats are written with the shortest decimal rendering that parses
//! back to the same bits, so a read-back loses nothing. Writes go through
//! a temp-file-then-rename so readers never observe a partial file.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use tpef_core::series::{PowerSeries, SeriesAxis, SeriesPoint, SweepKind};

use crate::error::CliError;

/// Fixed header of the count-rate sweep wire format.
pub const POWER_SERIES_HEADER: &str = "power_w,rate_cps,rate_err_cps,dwell_s";
/// Fixed header of the temperature sweep wire format.
pub const TEMPERATURE_SERIES_HEADER: &str = "temperature_k,rate_cps,rate_err_cps,dwell_s";

/// Renders a count-rate sweep to the CSV wire format.
pub fn render_power_series(series: &PowerSeries) -> String {
    let mut out = String::new();
    out.push_str(&format!("# sweep_kind: {}\n", series.sweep().as_str()));
    out.push_str(&format!("# axis: {}\n", series.axis().as_str()));
    out.push_str(POWER_SERIES_HEADER);
    out.push('\n');
    for p in series.points() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.x, p.rate_cps, p.rate_err_cps, p.dwell_s
        ));
    }
    out
}

/// Parses the count-rate sweep wire format. `origin` names the source in
/// error messages. The `sweep_kind` and `axis` metadata lines are required;
/// other `#` lines are ignored as comments.
pub fn parse_power_series(text: &str, origin: &str) -> Result<PowerSeries, CliError> {
    let mut sweep: Option<SweepKind> = None;
    let mut axis: Option<SeriesAxis> = None;
    let mut points: Vec<SeriesPoint> = Vec::new();
    let mut saw_header = false;

    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once(':') {
                match key.trim() {
                    "sweep_kind" => sweep = Some(parse_sweep_kind(value.trim(), origin)?),
                    "axis" => axis = Some(parse_axis(value.trim(), origin)?),
                    _ => {}
                }
            }
            continue;
        }
        if !saw_header {
            if line != POWER_SERIES_HEADER {
                return Err(format_error(format!(
                    "{origin}: expected header '{POWER_SERIES_HEADER}', got '{line}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields = parse_row(line, 4, origin, line_no)?;
        points.push(SeriesPoint {
            x: fields[0],
            rate_cps: fields[1],
            rate_err_cps: fields[2],
            dwell_s: fields[3],
            clamped: false,
        });
    }

    if !saw_header {
        return Err(format_error(format!(
            "{origin}: no '{POWER_SERIES_HEADER}' header found"
        )));
    }
    let sweep = sweep.ok_or_else(|| {
        format_error(format!(
            "{origin}: missing '# sweep_kind: ...' metadata line"
        ))
    })?;
    let axis =
        axis.ok_or_else(|| format_error(format!("{origin}: missing '# axis: ...' metadata line")))?;
    PowerSeries::new(points, sweep, axis).map_err(|e| CliError::from(e).with_prefix(origin))
}

/// Reads a count-rate sweep CSV from disk.
pub fn read_power_series_file(path: &Path) -> Result<PowerSeries, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::from(e).with_prefix(path.display()))?;
    parse_power_series(&text, &path.display().to_string())
}

/// One point of a temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperaturePoint {
    pub temperature_k: f64,
    pub rate_cps: f64,
    pub rate_err_cps: f64,
    pub dwell_s: f64,
}

/// Renders a temperature sweep to its CSV wire format.
pub fn render_temperature_series(points: &[TemperaturePoint]) -> String {
    let mut out = String::from(TEMPERATURE_SERIES_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.temperature_k, p.rate_cps, p.rate_err_cps, p.dwell_s
        ));
    }
    out
}

/// Parses the temperature sweep wire format; `#` lines are comments.
pub fn parse_temperature_series(
    text: &str,
    origin: &str,
) -> Result<Vec<TemperaturePoint>, CliError> {
    let mut points = Vec::new();
    let mut saw_header = false;
    for (line_no, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != TEMPERATURE_SERIES_HEADER {
                return Err(format_error(format!(
                    "{origin}: expected header '{TEMPERATURE_SERIES_HEADER}', got '{line}'"
                )));
            }
            saw_header = true;
            continue;
        }
        let fields = parse_row(line, 4, origin, line_no)?;
        points.push(TemperaturePoint {
            temperature_k: fields[0],
            rate_cps: fields[1],
            rate_err_cps: fields[2],
            dwell_s: fields[3],
        });
    }
    if !saw_header {
        return Err(format_error(format!(
            "{origin}: no '{TEMPERATURE_SERIES_HEADER}' header found"
        )));
    }
    if points.is_empty() {
        return Err(format_error(format!("{origin}: no data rows")));
    }
    Ok(points)
}

/// Reads a temperature sweep CSV from disk.
pub fn read_temperature_series_file(path: &Path) -> Result<Vec<TemperaturePoint>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::from(e).with_prefix(path.display()))?;
    parse_temperature_series(&text, &path.display().to_string())
}

/// Writes `contents` to `path` atomically: the bytes land under a temporary
/// name in the same directory and are renamed into place, so a crash or a
/// concurrent reader never sees a partial file.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::usage(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp-{}", std::process::id()));
    let tmp = dir.join(tmp_name);
    let result = (|| -> Result<(), CliError> {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn format_error(message: String) -> CliError {
    CliError {
        kind: "format",
        exit_code: crate::error::EXIT_USAGE,
        message,
    }
}

fn parse_sweep_kind(value: &str, origin: &str) -> Result<SweepKind, CliError> {
    match value {
        "pump_power" => Ok(SweepKind::PumpPower),
        "post_attenuation" => Ok(SweepKind::PostAttenuation),
        other => Err(format_error(format!(
            "{origin}: sweep_kind must be 'pump_power' or 'post_attenuation', got '{other}'"
        ))),
    }
}

fn parse_axis(value: &str, origin: &str) -> Result<SeriesAxis, CliError> {
    match value {
        "power" => Ok(SeriesAxis::Power),
        "flux" => Ok(SeriesAxis::Flux),
        other => Err(format_error(format!(
            "{origin}: axis must be 'power' or 'flux', got '{other}'"
        ))),
    }
}

fn parse_row(line: &str, want: usize, origin: &str, line_no: usize) -> Result<Vec<f64>, CliError> {
    let cells: Vec<&str> = line.split(',').collect();
    if cells.len() != want {
        return Err(format_error(format!(
            "{origin}:{}: expected {want} comma-separated values, got {}",
            line_no + 1,
            cells.len()
        )));
    }
    cells
        .iter()
        .map(|cell| {
            cell.trim().parse::<f64>().map_err(|_| {
                format_error(format!(
                    "{origin}:{}: cannot parse '{}' as a number",
                    line_no + 1,
                    cell.trim()
                ))
            })
        })
        .collect()
}

//! Count-rate series over a swept excitation variable.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::signal::photon_flux_cm2_s;

/// Which knob was physically swept to produce the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// The source (pump) power itself was varied.
    PumpPower,
    /// The source ran at fixed power and a variable attenuator downstream of
    /// it set the delivered power.
    PostAttenuation,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::PumpPower => "pump_power",
            SweepKind::PostAttenuation => "post_attenuation",
        }
    }
}

impl std::fmt::Display for SweepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Units of the independent variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesAxis {
    /// Delivered optical power (W).
    Power,
    /// Photon flux through the excitation area (photons cm^-2 s^-1).
    Flux,
}

impl SeriesAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SeriesAxis::Power => "power",
            SeriesAxis::Flux => "flux",
        }
    }
}

impl std::fmt::Display for SeriesAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One measured or simulated point of a series.
#[derive(Debug, Clone, Copy)]
pub struct SeriesPoint {
    /// Independent variable (units given by the series axis).
    pub x: f64,
    /// Background-subtracted count rate (counts/s), never negative.
    pub rate_cps: f64,
    /// One-sigma uncertainty of the rate (counts/s), zero when unknown.
    pub rate_err_cps: f64,
    /// Integration time behind the rate estimate (s).
    pub dwell_s: f64,
    /// True when background subtraction clipped a negative rate to zero.
    /// This flag is not representable in the CSV wire format and defaults to
    /// false for series read back from disk.
    pub clamped: bool,
}

/// A validated series of count-rate points over a strictly ascending,
/// positive sweep axis.
#[derive(Debug, Clone)]
pub struct PowerSeries {
    points: Vec<SeriesPoint>,
    sweep: SweepKind,
    axis: SeriesAxis,
}

impl PowerSeries {
    pub fn new(points: Vec<SeriesPoint>, sweep: SweepKind, axis: SeriesAxis) -> Result<Self> {
        if points.is_empty() {
            return Err(ModelError::invalid("a series needs at least one point"));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.x > 0.0) {
                return Err(ModelError::invalid(format!(
                    "sweep value at index {i} must be positive and finite, got {}",
                    p.x
                )));
            }
            if !(p.rate_cps.is_finite() && p.rate_cps >= 0.0) {
                return Err(ModelError::invalid(format!(
                    "rate at index {i} must be non-negative and finite, got {}",
                    p.rate_cps
                )));
            }
            if !(p.rate_err_cps.is_finite() && p.rate_err_cps >= 0.0) {
                return Err(ModelError::invalid(format!(
                    "rate uncertainty at index {i} must be non-negative and finite, got {}",
                    p.rate_err_cps
                )));
            }
            if !(p.dwell_s.is_finite() && p.dwell_s > 0.0) {
                return Err(ModelError::invalid(format!(
                    "dwell time at index {i} must be positive and finite, got {}",
                    p.dwell_s
                )));
            }
        }
        for w in points.windows(2) {
            if !(w[1].x > w[0].x) {
                return Err(ModelError::invalid(format!(
                    "sweep values must be strictly ascending ({} then {})",
                    w[0].x, w[1].x
                )));
            }
        }
        Ok(Self {
            points,
            sweep,
            axis,
        })
    }

    pub fn points(&self) -> &[SeriesPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sweep(&self) -> SweepKind {
        self.sweep
    }

    pub fn axis(&self) -> SeriesAxis {
        self.axis
    }

    /// Converts a power-axis series to photon flux (photons cm^-2 s^-1)
    /// through `area_cm2` at wavelength `lambda_nm`. Rates are unchanged.
    pub fn to_flux_axis(&self, lambda_nm: f64, area_cm2: f64) -> Result<PowerSeries> {
        if self.axis != SeriesAxis::Power {
            return Err(ModelError::invalid(
                "series axis is already photon flux; expected a power axis",
            ));
        }
        let mut points = self.points.clone();
        for p in &mut points {
            p.x = photon_flux_cm2_s(p.x, lambda_nm, area_cm2)?;
        }
        PowerSeries::new(points, self.sweep, SeriesAxis::Flux)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn point(x: f64, rate: f64) -> SeriesPoint {
        SeriesPoint {
            x,
            rate_cps: rate,
            rate_err_cps: 0.1,
            dwell_s: 10.0,
            clamped: false,
        }
    }

    #[test]
    fn construction_validates_points() {
        let ok = vec![point(1e-3, 1.0), point(2e-3, 4.0), point(4e-3, 16.0)];
        assert!(PowerSeries::new(ok.clone(), SweepKind::PumpPower, SeriesAxis::Power).is_ok());

        assert!(PowerSeries::new(vec![], SweepKind::PumpPower, SeriesAxis::Power).is_err());

        let mut bad = ok.clone();
        bad[1].x = 1e-3; // duplicate
        assert!(PowerSeries::new(bad, SweepKind::PumpPower, SeriesAxis::Power).is_err());

        let mut bad = ok.clone();
        bad[2].x = 1e-4; // descending
        assert!(PowerSeries::new(bad, SweepKind::PumpPower, SeriesAxis::Power).is_err());

        let mut bad = ok.clone();
        bad[0].rate_cps = -1.0;
        assert!(PowerSeries::new(bad, SweepKind::PumpPower, SeriesAxis::Power).is_err());

        let mut bad = ok.clone();
        bad[0].rate_err_cps = f64::NAN;
        assert!(PowerSeries::new(bad, SweepKind::PumpPower, SeriesAxis::Power).is_err());

        let mut bad = ok.clone();
        bad[0].dwell_s = 0.0;
        assert!(PowerSeries::new(bad, SweepKind::PumpPower, SeriesAxis::Power).is_err());

        let mut bad = ok;
        bad[0].x = 0.0;
        assert!(PowerSeries::new(bad, SweepKind::PumpPower, SeriesAxis::Power).is_err());
    }

    #[test]
    fn flux_conversion_rescales_the_axis_only() {
        let pts = vec![point(1e-3, 1.0), point(2e-3, 4.0), point(4e-3, 16.0)];
        let s = PowerSeries::new(pts, SweepKind::PumpPower, SeriesAxis::Power).unwrap();
        let area = 2.4622232422510005e-5;
        let f = s.to_flux_axis(1060.0, area).unwrap();
        assert_eq!(f.axis(), SeriesAxis::Flux);
        assert_eq!(f.sweep(), SweepKind::PumpPower);
        for (a, b) in s.points().iter().zip(f.points()) {
            assert_relative_eq!(
                b.x,
                photon_flux_cm2_s(a.x, 1060.0, area).unwrap(),
                max_relative = 1e-15
            );
            assert_eq!(a.rate_cps, b.rate_cps);
            assert_eq!(a.rate_err_cps, b.rate_err_cps);
        }
        // Frozen check at 10 mW.
        let pts = vec![point(10e-3, 1.0), point(20e-3, 4.0), point(40e-3, 16.0)];
        let s = PowerSeries::new(pts, SweepKind::PumpPower, SeriesAxis::Power).unwrap();
        let f = s.to_flux_axis(1060.0, area).unwrap();
        assert_relative_eq!(f.points()[0].x, 2.1672135450711095e21, max_relative = 1e-12);

        assert!(f.to_flux_axis(1060.0, area).is_err());
    }

    #[test]
    fn labels_round_trip_through_serde_names() {
        assert_eq!(SweepKind::PumpPower.as_str(), "pump_power");
        assert_eq!(SweepKind::PostAttenuation.to_string(), "post_attenuation");
        assert_eq!(SeriesAxis::Power.as_str(), "power");
        assert_eq!(SeriesAxis::Flux.to_string(), "flux");
        let j = serde_json::to_string(&SweepKind::PumpPower).unwrap();
        assert_eq!(j, "\"pump_power\"");
        let k: SweepKind = serde_json::from_str(&j).unwrap();
        assert_eq!(k, SweepKind::PumpPower);
    }
}

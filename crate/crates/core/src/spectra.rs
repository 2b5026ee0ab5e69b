//! Wavelength-gridded spectra and the operations the models need from them:
//! unit conversions, linear interpolation, trapezoidal quadrature, peak
//! normalization, Gaussian line fitting, and mirror extension of a measured
//! band about a center wavelength.
//!
//! Conventions, fixed across the crate:
//! - Spectra are stored against vacuum wavelength in nm, grid strictly
//!   ascending. Frequency-domain integrals over these grids use an explicit
//!   change of variables rather than resampling onto a frequency grid.
//! - Interpolation between samples is linear and exact at the nodes.
//!   Queries outside the stored grid are hard errors, never zero.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::constants::{PLANCK_J_S, SPEED_OF_LIGHT_M_S};
use crate::error::{ModelError, Result};
use crate::linalg;

/// Vacuum wavelength (nm) to frequency (Hz).
pub fn wavelength_to_frequency(lambda_nm: f64) -> Result<f64> {
    if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
        return Err(ModelError::invalid(format!(
            "wavelength must be positive and finite, got {lambda_nm}"
        )));
    }
    Ok(SPEED_OF_LIGHT_M_S / (lambda_nm * 1e-9))
}

/// Frequency (Hz) to vacuum wavelength (nm).
pub fn frequency_to_wavelength(nu_hz: f64) -> Result<f64> {
    if !(nu_hz.is_finite() && nu_hz > 0.0) {
        return Err(ModelError::invalid(format!(
            "frequency must be positive and finite, got {nu_hz}"
        )));
    }
    Ok(SPEED_OF_LIGHT_M_S / nu_hz * 1e9)
}

/// Photon energy (J) at frequency nu (Hz).
pub fn photon_energy(nu_hz: f64) -> Result<f64> {
    if !(nu_hz.is_finite() && nu_hz > 0.0) {
        return Err(ModelError::invalid(format!(
            "frequency must be positive and finite, got {nu_hz}"
        )));
    }
    Ok(PLANCK_J_S * nu_hz)
}

/// Photon energy (J) at vacuum wavelength lambda (nm).
pub fn photon_energy_at_wavelength(lambda_nm: f64) -> Result<f64> {
    photon_energy(wavelength_to_frequency(lambda_nm)?)
}

/// What a spectrum's values mean. Transmission and quantum efficiency are
/// bounded to [0, 1]; every kind is non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// Relative or absolute absorption band (arbitrary non-negative units).
    Absorption,
    /// Relative emission band (arbitrary non-negative units).
    Emission,
    /// Filter transmission, dimensionless in [0, 1].
    Transmission,
    /// Detector quantum efficiency, dimensionless in [0, 1].
    QuantumEfficiency,
    /// Spectral power density, W/nm.
    SpectralPowerDensity,
}

impl SpectrumKind {
    /// Unit label for the value column.
    pub fn unit(self) -> &'static str {
        match self {
            SpectrumKind::SpectralPowerDensity => "W/nm",
            _ => "dimensionless",
        }
    }

    fn bounded_to_unit_interval(self) -> bool {
        matches!(
            self,
            SpectrumKind::Transmission | SpectrumKind::QuantumEfficiency
        )
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SpectrumKind::Absorption => "absorption",
            SpectrumKind::Emission => "emission",
            SpectrumKind::Transmission => "transmission",
            SpectrumKind::QuantumEfficiency => "quantum_efficiency",
            SpectrumKind::SpectralPowerDensity => "spectral_power_density",
        };
        f.write_str(name)
    }
}

/// A sampled spectrum on a strictly ascending wavelength grid (nm).
///
/// Construction validates the grid and the value range for the kind; the
/// stored data is immutable afterwards, and every operation returns a new
/// spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    kind: SpectrumKind,
    lambda_nm: Vec<f64>,
    values: Vec<f64>,
}

impl Spectrum {
    /// Validates and builds a spectrum.
    ///
    /// Requirements: at least two samples, equal lengths, wavelengths finite,
    /// positive, strictly ascending; values finite and non-negative, and
    /// within [0, 1] for transmission / quantum-efficiency kinds.
    pub fn new(kind: SpectrumKind, lambda_nm: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if lambda_nm.len() != values.len() {
            return Err(ModelError::invalid(format!(
                "grid and values differ in length: {} vs {}",
                lambda_nm.len(),
                values.len()
            )));
        }
        if lambda_nm.len() < 2 {
            return Err(ModelError::invalid("a spectrum needs at least two samples"));
        }
        for (i, &l) in lambda_nm.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(ModelError::invalid(format!(
                    "wavelength at index {i} must be positive and finite, got {l}"
                )));
            }
            if i > 0 && l <= lambda_nm[i - 1] {
                return Err(ModelError::invalid(format!(
                    "wavelength grid must be strictly ascending: {} then {} at index {i}",
                    lambda_nm[i - 1],
                    l
                )));
            }
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(ModelError::invalid(format!(
                    "{kind} value at index {i} must be finite and non-negative, got {v}"
                )));
            }
            if kind.bounded_to_unit_interval() && v > 1.0 {
                return Err(ModelError::invalid(format!(
                    "{kind} value at index {i} must lie in [0, 1], got {v}"
                )));
            }
        }
        Ok(Spectrum {
            kind,
            lambda_nm,
            values,
        })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.lambda_nm.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least two samples
    }

    pub fn grid(&self) -> &[f64] {
        &self.lambda_nm
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_nm(&self) -> f64 {
        self.lambda_nm[0]
    }

    pub fn max_nm(&self) -> f64 {
        *self.lambda_nm.last().expect("non-empty grid")
    }

    /// Largest sampled value and the wavelength where it occurs.
    pub fn peak(&self) -> (f64, f64) {
        let mut best = 0usize;
        for i in 1..self.values.len() {
            if self.values[i] > self.values[best] {
                best = i;
            }
        }
        (self.lambda_nm[best], self.values[best])
    }

    /// Linear interpolation at `lambda_nm`; exact at grid nodes.
    /// Queries outside the grid are an error (`context` names the caller for
    /// the message).
    pub fn value_at_ctx(&self, lambda_nm: f64, context: &'static str) -> Result<f64> {
        if !lambda_nm.is_finite() {
            return Err(ModelError::invalid(format!(
                "query wavelength must be finite, got {lambda_nm}"
            )));
        }
        if lambda_nm < self.min_nm() || lambda_nm > self.max_nm() {
            return Err(ModelError::OutOfDomain {
                lambda_nm,
                min_nm: self.min_nm(),
                max_nm: self.max_nm(),
                context,
            });
        }
        match self
            .lambda_nm
            .binary_search_by(|probe| probe.partial_cmp(&lambda_nm).expect("finite grid"))
        {
            Ok(i) => Ok(self.values[i]),
            Err(i) => {
                // i is the insertion point; the query lies strictly between
                // nodes i-1 and i.
                let (x0, x1) = (self.lambda_nm[i - 1], self.lambda_nm[i]);
                let (y0, y1) = (self.values[i - 1], self.values[i]);
                let t = (lambda_nm - x0) / (x1 - x0);
                Ok(y0 + t * (y1 - y0))
            }
        }
    }

    /// Linear interpolation at `lambda_nm`; exact at grid nodes.
    pub fn value_at(&self, lambda_nm: f64) -> Result<f64> {
        self.value_at_ctx(lambda_nm, "spectrum query")
    }

    /// Resamples onto `target_nm` by linear interpolation. The target grid
    /// must satisfy the same constraints as a constructor grid and must lie
    /// within the source span (no extrapolation).
    pub fn resample(&self, target_nm: &[f64]) -> Result<Spectrum> {
        let mut values = Vec::with_capacity(target_nm.len());
        for &l in target_nm {
            values.push(self.value_at_ctx(l, "resample")?);
        }
        Spectrum::new(self.kind, target_nm.to_vec(), values)
    }

    /// Trapezoidal integral of value dlambda over the full grid
    /// (value units x nm).
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.lambda_nm, &self.values)
    }

    /// Returns a copy scaled so the peak value is exactly 1.
    /// An all-zero spectrum cannot be normalized.
    pub fn normalize_peak(&self) -> Result<Spectrum> {
        let (_, peak) = self.peak();
        if peak <= 0.0 {
            return Err(ModelError::degenerate(
                "cannot peak-normalize an all-zero spectrum",
            ));
        }
        let values = self.values.iter().map(|v| v / peak).collect();
        // Division by the maximum keeps every value in [0, 1], so the result
        // is valid for every kind.
        Spectrum::new(self.kind, self.lambda_nm.clone(), values)
    }

    /// Returns a copy with every value multiplied by `factor` (>= 0).
    pub fn scaled(&self, factor: f64) -> Result<Spectrum> {
        if !(factor.is_finite() && factor >= 0.0) {
            return Err(ModelError::invalid(format!(
                "scale factor must be finite and non-negative, got {factor}"
            )));
        }
        let values = self.values.iter().map(|v| v * factor).collect();
        Spectrum::new(self.kind, self.lambda_nm.clone(), values)
    }

    /// Returns the part of the spectrum at wavelengths >= `cutoff_nm`,
    /// inserting an interpolated sample at the cutoff when it falls between
    /// grid nodes (a hard filter edge). A cutoff at or below the grid start
    /// returns an unchanged copy; a cutoff at or beyond the grid end leaves
    /// nothing and is an error.
    pub fn truncated_below(&self, cutoff_nm: f64) -> Result<Spectrum> {
        if !cutoff_nm.is_finite() {
            return Err(ModelError::invalid(format!(
                "cutoff wavelength must be finite, got {cutoff_nm}"
            )));
        }
        if cutoff_nm <= self.min_nm() {
            return Ok(self.clone());
        }
        if cutoff_nm >= self.max_nm() {
            return Err(ModelError::invalid(format!(
                "cutoff {cutoff_nm} nm leaves no spectrum (span {}..{} nm)",
                self.min_nm(),
                self.max_nm()
            )));
        }
        let start = self.lambda_nm.partition_point(|&l| l < cutoff_nm);
        let mut grid = Vec::with_capacity(self.len() - start + 1);
        let mut values = Vec::with_capacity(self.len() - start + 1);
        if self.lambda_nm[start] > cutoff_nm {
            grid.push(cutoff_nm);
            values.push(self.value_at_ctx(cutoff_nm, "cutoff truncation")?);
        }
        grid.extend_from_slice(&self.lambda_nm[start..]);
        values.extend_from_slice(&self.values[start..]);
        Spectrum::new(self.kind, grid, values)
    }

    /// Builds a spectrum symmetric about `center_nm` by point-reflecting the
    /// red side (lambda > center) onto the blue side. The red side is kept
    /// as-is; any original blue-side samples are discarded. The sample at the
    /// center is taken from the grid if present, otherwise interpolated.
    ///
    /// This is the standard construction for extending a measured band whose
    /// blue side is unresolved: measure the red tail, reflect it about the
    /// band center.
    pub fn mirror_about_center(&self, center_nm: f64) -> Result<Spectrum> {
        if !(center_nm.is_finite() && center_nm >= self.min_nm() && center_nm < self.max_nm()) {
            return Err(ModelError::invalid(format!(
                "mirror center {center_nm} nm must lie inside the grid span [{}, {}) nm",
                self.min_nm(),
                self.max_nm()
            )));
        }
        let red: Vec<usize> = (0..self.len())
            .filter(|&i| self.lambda_nm[i] > center_nm)
            .collect();
        if red.is_empty() {
            return Err(ModelError::degenerate(
                "no samples red of the mirror center",
            ));
        }
        let center_value = self.value_at_ctx(center_nm, "mirror_about_center")?;

        let mut grid = Vec::with_capacity(2 * red.len() + 1);
        let mut values = Vec::with_capacity(2 * red.len() + 1);
        for &i in red.iter().rev() {
            grid.push(2.0 * center_nm - self.lambda_nm[i]);
            values.push(self.values[i]);
        }
        grid.push(center_nm);
        values.push(center_value);
        for &i in &red {
            grid.push(self.lambda_nm[i]);
            values.push(self.values[i]);
        }
        Spectrum::new(self.kind, grid, values)
    }

    /// Least-squares Gaussian line fit, `a * exp(-(l - mu)^2 / (2 s^2))`.
    /// See [`fit_gaussian`].
    pub fn fit_gaussian(&self) -> Result<GaussianFit> {
        fit_gaussian(self)
    }

    /// Reads the two-column CSV wire format (`wavelength_nm,value`).
    pub fn read_csv<R: Read>(reader: R, kind: SpectrumKind) -> Result<Spectrum> {
        let mut lines = BufReader::new(reader).lines();
        let header = lines
            .next()
            .ok_or_else(|| ModelError::Format("empty spectrum file".into()))??;
        if header.trim() != "wavelength_nm,value" {
            return Err(ModelError::Format(format!(
                "expected header 'wavelength_nm,value', got '{}'",
                header.trim()
            )));
        }
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let (l, v) = match (fields.next(), fields.next(), fields.next()) {
                (Some(l), Some(v), None) => (l, v),
                _ => {
                    return Err(ModelError::Format(format!(
                        "line {}: expected two comma-separated fields, got '{line}'",
                        lineno + 2
                    )))
                }
            };
            let parse = |s: &str, what: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|_| {
                    ModelError::Format(format!(
                        "line {}: cannot parse {what} '{}'",
                        lineno + 2,
                        s.trim()
                    ))
                })
            };
            grid.push(parse(l, "wavelength")?);
            values.push(parse(v, "value")?);
        }
        Spectrum::new(kind, grid, values)
    }

    /// Reads the CSV wire format from a file.
    pub fn read_csv_file(path: &Path, kind: SpectrumKind) -> Result<Spectrum> {
        let file = std::fs::File::open(path)
            .map_err(|e| ModelError::Format(format!("cannot open {}: {e}", path.display())))?;
        Spectrum::read_csv(file, kind)
    }

    /// Writes the two-column CSV wire format with full float precision
    /// (shortest round-trip representation).
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        writeln!(writer, "wavelength_nm,value")?;
        for i in 0..self.len() {
            writeln!(writer, "{},{}", self.lambda_nm[i], self.values[i])?;
        }
        Ok(())
    }
}

/// Result of a Gaussian line fit.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct GaussianFit {
    /// Peak amplitude (> 0).
    pub amplitude: f64,
    /// Line center, nm.
    pub center_nm: f64,
    /// Full width at half maximum, nm (> 0).
    pub fwhm_nm: f64,
    /// Root-mean-square residual of the fit, value units.
    pub residual_rms: f64,
}

/// FWHM of a Gaussian with standard deviation 1: 2 sqrt(2 ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

const GAUSS_MAX_ITERATIONS: usize = 200;

/// Levenberg-Marquardt least-squares fit of a single Gaussian
/// `a * exp(-(l - mu)^2 / (2 s^2))` to a spectrum with one dominant peak.
///
/// Initial values come from the sampled peak and its half-maximum crossings.
/// Fails with `NonConvergence` if the iteration budget is exhausted or the
/// normal equations stay singular, and with `DegenerateData` on an all-zero
/// spectrum.
pub fn fit_gaussian(spectrum: &Spectrum) -> Result<GaussianFit> {
    let x = spectrum.grid();
    let y = spectrum.values();
    let n = x.len();
    if n < 4 {
        return Err(ModelError::degenerate(
            "gaussian fit needs at least four samples",
        ));
    }
    let (peak_nm, peak) = spectrum.peak();
    if peak <= 0.0 {
        return Err(ModelError::degenerate(
            "cannot fit a gaussian to an all-zero spectrum",
        ));
    }

    let mut a = peak;
    let mut mu = peak_nm;
    let mut s = initial_sigma(x, y, peak_nm, peak);

    let cost = |a: f64, mu: f64, s: f64| -> f64 {
        let mut c = 0.0;
        for i in 0..n {
            let r = y[i] - a * (-((x[i] - mu) * (x[i] - mu)) / (2.0 * s * s)).exp();
            c += r * r;
        }
        c
    };

    let mut damping = 1e-3;
    let mut current = cost(a, mu, s);
    for _ in 0..GAUSS_MAX_ITERATIONS {
        // Normal equations J^T J delta = J^T r for parameters (a, mu, s).
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for i in 0..n {
            let d = x[i] - mu;
            let e = (-(d * d) / (2.0 * s * s)).exp();
            let r = y[i] - a * e;
            let j = [e, a * e * d / (s * s), a * e * d * d / (s * s * s)];
            for p in 0..3 {
                jtr[p] += j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }

        let mut stepped = false;
        for _ in 0..12 {
            let mut lhs = jtj;
            for p in 0..3 {
                lhs[p][p] += damping * jtj[p][p].max(1e-300);
            }
            let Some(delta) = linalg::solve3(lhs, jtr) else {
                damping *= 10.0;
                continue;
            };
            let (ta, tmu, ts) = (a + delta[0], mu + delta[1], (s + delta[2]).abs());
            if !(ta.is_finite() && tmu.is_finite() && ts.is_finite()) || ts == 0.0 {
                damping *= 10.0;
                continue;
            }
            let trial = cost(ta, tmu, ts);
            if trial < current {
                let improvement = (current - trial) / current.max(f64::MIN_POSITIVE);
                a = ta;
                mu = tmu;
                s = ts;
                current = trial;
                damping = (damping * 0.3).max(1e-12);
                stepped = true;
                if improvement < 1e-14 {
                    return finish_gaussian(a, mu, s, current, n);
                }
                break;
            }
            damping *= 10.0;
        }
        if !stepped {
            // No damping level improved the cost: either converged or stuck.
            return finish_gaussian(a, mu, s, current, n);
        }
    }
    Err(ModelError::NonConvergence(format!(
        "gaussian fit exhausted {GAUSS_MAX_ITERATIONS} iterations"
    )))
}

fn finish_gaussian(a: f64, mu: f64, s: f64, cost: f64, n: usize) -> Result<GaussianFit> {
    if !(a > 0.0 && s > 0.0 && mu.is_finite()) {
        return Err(ModelError::NonConvergence(format!(
            "gaussian fit settled on a non-physical line (amplitude {a}, sigma {s})"
        )));
    }
    Ok(GaussianFit {
        amplitude: a,
        center_nm: mu,
        fwhm_nm: FWHM_PER_SIGMA * s,
        residual_rms: (cost / n as f64).sqrt(),
    })
}

fn initial_sigma(x: &[f64], y: &[f64], peak_nm: f64, peak: f64) -> f64 {
    // Interpolated half-maximum crossings on either side of the peak.
    let half = peak / 2.0;
    let mut left = None;
    let mut right = None;
    for i in 1..x.len() {
        if x[i] <= peak_nm && y[i - 1] < half && y[i] >= half {
            let t = (half - y[i - 1]) / (y[i] - y[i - 1]);
            left = Some(x[i - 1] + t * (x[i] - x[i - 1]));
        }
        if x[i - 1] >= peak_nm && y[i - 1] >= half && y[i] < half && right.is_none() {
            let t = (y[i - 1] - half) / (y[i - 1] - y[i]);
            right = Some(x[i - 1] + t * (x[i] - x[i - 1]));
        }
    }
    let span = x[x.len() - 1] - x[0];
    match (left, right) {
        (Some(l), Some(r)) if r > l => (r - l) / FWHM_PER_SIGMA,
        (Some(l), None) => (2.0 * (peak_nm - l) / FWHM_PER_SIGMA).max(span / 100.0),
        (None, Some(r)) => (2.0 * (r - peak_nm) / FWHM_PER_SIGMA).max(span / 100.0),
        _ => span / 6.0,
    }
}

/// Trapezoidal quadrature of y dx on an ascending grid.
pub(crate) fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = 0.0;
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    }
    acc
}

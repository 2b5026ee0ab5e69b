//! Parameter estimation for count-rate series: power-law slopes,
//! non-negative linear-plus-quadratic amplitude fits, cross-section
//! extraction, temperature fits, and the pump-versus-attenuation mechanism
//! discriminator.

use std::f64::consts::{LN_10, LOG10_E};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN_J_K, GM_CM4_S, PLANCK_J_S, SPEED_OF_LIGHT_M_S};
use crate::error::{ModelError, Result};
use crate::linalg::{invert2, solve2, solve3};
use crate::series::{PowerSeries, SeriesAxis, SweepKind};
use crate::signal::{ExperimentConfig, GAUSSIAN_BEAM_PREFACTOR};
use crate::spectra::photon_energy_at_wavelength;

/// Slope window accepted as quadratic-regime behavior when deriving a
/// two-photon cross section from a power sweep.
pub const C2PA_SLOPE_BAND: (f64, f64) = (1.8, 2.2);

/// One fitted parameter: point estimate, one-sigma uncertainty, and whether
/// a non-negativity constraint pinned it at zero.
#[derive(Debug, Clone, Serialize)]
pub struct FitParam {
    pub name: &'static str,
    pub value: f64,
    pub sigma: f64,
    pub at_bound: bool,
}

/// Outcome of a least-squares fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub model: &'static str,
    pub params: Vec<FitParam>,
    /// Unweighted RMS of the residuals, in the fit's own response units
    /// (log10 counts for log-log fits, counts/s otherwise).
    pub residual_rms: f64,
    pub dof: usize,
    pub converged: bool,
    pub excluded_points: usize,
    pub notes: Vec<String>,
}

impl FitReport {
    pub fn param(&self, name: &str) -> Option<&FitParam> {
        self.params.iter().find(|p| p.name == name)
    }

    fn require(&self, name: &'static str) -> f64 {
        self.param(name)
            .expect("fit report is missing one of its own parameters")
            .value
    }
}

fn loglog_core(series: &PowerSeries, weighted: bool) -> Result<FitReport> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    let mut excluded = 0usize;
    for pt in series.points() {
        if pt.rate_cps <= 0.0 {
            excluded += 1;
            continue;
        }
        if weighted {
            if !(pt.rate_err_cps > 0.0) {
                return Err(ModelError::invalid(
                    "weighted slope fit needs a positive uncertainty on every usable point",
                ));
            }
            let dlog = pt.rate_err_cps / (pt.rate_cps * LN_10);
            ws.push(1.0 / (dlog * dlog));
        } else {
            ws.push(1.0);
        }
        xs.push(pt.x.log10());
        ys.push(pt.rate_cps.log10());
    }
    let n = xs.len();
    if n < 3 {
        return Err(ModelError::degenerate(format!(
            "slope fit needs at least 3 points with positive rates, got {n}"
        )));
    }
    let sw: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| w * x).sum::<f64>() / sw;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - xbar;
        sxx += ws[i] * dx * dx;
        sxy += ws[i] * dx * (ys[i] - ybar);
    }
    if !(sxx > 0.0) {
        return Err(ModelError::degenerate(
            "slope fit needs at least two distinct sweep values",
        ));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ssr = 0.0;
    for i in 0..n {
        let r = ys[i] - (slope * xs[i] + intercept);
        ssr += r * r;
    }
    let dof = n - 2;
    let (slope_se, intercept_se) = if weighted {
        ((1.0 / sxx).sqrt(), (1.0 / sw + xbar * xbar / sxx).sqrt())
    } else {
        let s2 = ssr / dof as f64;
        (
            (s2 / sxx).sqrt(),
            (s2 * (1.0 / n as f64 + xbar * xbar / sxx)).sqrt(),
        )
    };
    let mut notes = Vec::new();
    if excluded > 0 {
        notes.push(format!(
            "excluded {excluded} point(s) with non-positive rates from the log-log fit"
        ));
    }
    Ok(FitReport {
        model: "loglog_slope",
        params: vec![
            FitParam {
                name: "slope",
                value: slope,
                sigma: slope_se,
                at_bound: false,
            },
            FitParam {
                name: "log10_intercept",
                value: intercept,
                sigma: intercept_se,
                at_bound: false,
            },
        ],
        residual_rms: (ssr / n as f64).sqrt(),
        dof,
        converged: true,
        excluded_points: excluded,
        notes,
    })
}

/// Ordinary least-squares slope of `log10(rate)` against `log10(x)`.
/// Points with non-positive rates are excluded (and counted in the report).
pub fn fit_loglog_slope(series: &PowerSeries) -> Result<FitReport> {
    loglog_core(series, false)
}

/// Like [`fit_loglog_slope`] but weighting each point by its propagated
/// `log10` uncertainty; every usable point must carry a positive error bar.
pub fn fit_loglog_slope_weighted(series: &PowerSeries) -> Result<FitReport> {
    loglog_core(series, true)
}

/// Non-negative linear-plus-quadratic amplitude fit,
/// `rate = a x + b x^2` with `a, b >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct LinQuadFit {
    pub report: FitReport,
    /// Linear amplitude (counts/s per axis unit).
    pub a: f64,
    /// Quadratic amplitude (counts/s per squared axis unit).
    pub b: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub cov_ab: f64,
}

struct SubsetSolution {
    alpha: f64,
    beta: f64,
    free_a: bool,
    free_b: bool,
    ssr: f64,
}

fn wdot(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += w[i] * a[i] * b[i];
    }
    acc
}

/// Fits `rate = a x + b x^2` with both amplitudes constrained non-negative,
/// by exhausting the four active-set candidates of the two-parameter
/// problem. The series must already be on a photon-flux axis. Weighted by
/// `1/err^2` when every point has a positive uncertainty, unweighted
/// otherwise.
pub fn fit_linear_quadratic(series: &PowerSeries) -> Result<LinQuadFit> {
    if series.axis() != SeriesAxis::Flux {
        return Err(ModelError::invalid(
            "linear-plus-quadratic fit expects a photon-flux axis; convert the series first",
        ));
    }
    let pts = series.points();
    let n = pts.len();
    if n < 3 {
        return Err(ModelError::degenerate(format!(
            "linear-plus-quadratic fit needs at least 3 points, got {n}"
        )));
    }
    let weighted = pts.iter().all(|p| p.rate_err_cps > 0.0);
    let mut notes = Vec::new();
    if !weighted {
        notes.push("some uncertainties are zero; fitting unweighted".to_string());
    }
    // Work on the scaled axis u = x / x_max so both columns are O(1).
    let x_max = pts.last().unwrap().x;
    let u: Vec<f64> = pts.iter().map(|p| p.x / x_max).collect();
    let u2: Vec<f64> = u.iter().map(|&v| v * v).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.rate_cps).collect();
    let w: Vec<f64> = pts
        .iter()
        .map(|p| {
            if weighted {
                1.0 / (p.rate_err_cps * p.rate_err_cps)
            } else {
                1.0
            }
        })
        .collect();

    let s11 = wdot(&u, &u, &w);
    let s12 = wdot(&u, &u2, &w);
    let s22 = wdot(&u2, &u2, &w);

    let ssr_of = |alpha: f64, beta: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let r = y[i] - (alpha * u[i] + beta * u2[i]);
            acc += w[i] * r * r;
        }
        acc
    };

    let mut candidates: Vec<SubsetSolution> = Vec::with_capacity(4);

    // Both amplitudes free: normal equations plus two refinement passes.
    if let Some(mut ab) = solve2(
        [[s11, s12], [s12, s22]],
        [wdot(&u, &y, &w), wdot(&u2, &y, &w)],
    ) {
        for _ in 0..2 {
            let r: Vec<f64> = (0..n)
                .map(|i| y[i] - (ab[0] * u[i] + ab[1] * u2[i]))
                .collect();
            if let Some(d) = solve2(
                [[s11, s12], [s12, s22]],
                [wdot(&u, &r, &w), wdot(&u2, &r, &w)],
            ) {
                ab[0] += d[0];
                ab[1] += d[1];
            }
        }
        if ab[0] >= 0.0 && ab[1] >= 0.0 {
            candidates.push(SubsetSolution {
                alpha: ab[0],
                beta: ab[1],
                free_a: true,
                free_b: true,
                ssr: ssr_of(ab[0], ab[1]),
            });
        }
    }
    // Linear-only and quadratic-only candidates.
    for (col, s_cc, free_a) in [(&u, s11, true), (&u2, s22, false)] {
        if s_cc > 0.0 {
            let mut coef = wdot(col, &y, &w) / s_cc;
            for _ in 0..2 {
                let r: Vec<f64> = (0..n)
                    .map(|i| {
                        if free_a {
                            y[i] - coef * u[i]
                        } else {
                            y[i] - coef * u2[i]
                        }
                    })
                    .collect();
                coef += wdot(col, &r, &w) / s_cc;
            }
            if coef >= 0.0 {
                candidates.push(SubsetSolution {
                    alpha: if free_a { coef } else { 0.0 },
                    beta: if free_a { 0.0 } else { coef },
                    free_a,
                    free_b: !free_a,
                    ssr: ssr_of(
                        if free_a { coef } else { 0.0 },
                        if free_a { 0.0 } else { coef },
                    ),
                });
            }
        }
    }
    // Everything clamped.
    candidates.push(SubsetSolution {
        alpha: 0.0,
        beta: 0.0,
        free_a: false,
        free_b: false,
        ssr: ssr_of(0.0, 0.0),
    });

    let best = candidates
        .into_iter()
        .filter(|c| c.ssr.is_finite())
        .reduce(|best, c| if c.ssr < best.ssr { c } else { best })
        .ok_or_else(|| ModelError::degenerate("amplitude fit produced no finite candidate"))?;

    // Covariance of the free amplitudes on the scaled axis.
    let p_free = best.free_a as usize + best.free_b as usize;
    let dof = n - p_free;
    let scale = if weighted {
        1.0
    } else if dof > 0 {
        best.ssr / dof as f64
    } else {
        0.0
    };
    let (mut var_alpha, mut var_beta, mut cov_alphabeta) = (0.0, 0.0, 0.0);
    if best.free_a && best.free_b {
        let inv = invert2([[s11, s12], [s12, s22]])
            .ok_or_else(|| ModelError::degenerate("amplitude fit normal matrix is singular"))?;
        var_alpha = scale * inv[0][0];
        var_beta = scale * inv[1][1];
        cov_alphabeta = scale * inv[0][1];
    } else if best.free_a {
        var_alpha = scale / s11;
    } else if best.free_b {
        var_beta = scale / s22;
    }

    // Undo the axis scaling: a = alpha / x_max, b = beta / x_max^2.
    let a = best.alpha / x_max;
    let b = best.beta / (x_max * x_max);
    let var_a = var_alpha / (x_max * x_max);
    let var_b = var_beta / (x_max * x_max * x_max * x_max);
    let cov_ab = cov_alphabeta / (x_max * x_max * x_max);

    let mut ssr_plain = 0.0;
    for i in 0..n {
        let r = y[i] - (best.alpha * u[i] + best.beta * u2[i]);
        ssr_plain += r * r;
    }

    let report = FitReport {
        model: "linear_quadratic_nnls",
        params: vec![
            FitParam {
                name: "linear_coefficient",
                value: a,
                sigma: var_a.sqrt(),
                at_bound: !best.free_a,
            },
            FitParam {
                name: "quadratic_coefficient",
                value: b,
                sigma: var_b.sqrt(),
                at_bound: !best.free_b,
            },
        ],
        residual_rms: (ssr_plain / n as f64).sqrt(),
        dof,
        converged: true,
        excluded_points: 0,
        notes,
    };
    Ok(LinQuadFit {
        report,
        a,
        b,
        var_a,
        var_b,
        cov_ab,
    })
}

/// What to do when a power sweep fails the quadratic-regime slope check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimePolicy {
    /// Record a note on the fit report and carry on.
    Warn,
    /// Refuse to derive a cross section.
    Abort,
}

/// A derived two-photon cross section with its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaDerivation {
    pub sigma_cm4s: f64,
    /// Same value in Goeppert-Mayer units (1 GM = 1e-50 cm^4 s).
    pub sigma_gm: f64,
    pub sigma_err_gm: f64,
    /// Log-log power-law slope of the input series.
    pub slope: f64,
    /// Quadratic-amplitude fit behind the cross section.
    pub fit: FitReport,
    /// Power-law diagnostic fit behind `slope`.
    pub slope_fit: FitReport,
}

/// Derives the two-photon cross section from a fluorescence power (or flux)
/// sweep by inverting the Gaussian-beam quadratic model.
///
/// The sweep must look quadratic: its log-log slope is checked against
/// [`C2PA_SLOPE_BAND`] and handled per `policy`. The quadratic amplitude is
/// then fit (weighted when every point has a positive uncertainty) and
/// inverted using the experiment's collection constant, molecule count, and
/// beam area. `lambda_nm` is the excitation wavelength used for per-photon
/// energy bookkeeping on power-axis series.
pub fn derive_sigma_c2pa(
    series: &PowerSeries,
    cfg: &ExperimentConfig,
    lambda_nm: f64,
    policy: RegimePolicy,
) -> Result<SigmaDerivation> {
    let slope_fit = fit_loglog_slope(series)?;
    let slope = slope_fit.require("slope");
    let (lo, hi) = C2PA_SLOPE_BAND;
    let mut notes = Vec::new();
    if !(slope >= lo && slope <= hi) {
        match policy {
            RegimePolicy::Abort => return Err(ModelError::RegimeCheck { slope, lo, hi }),
            RegimePolicy::Warn => notes.push(format!(
                "power-law slope {slope:.4} is outside [{lo}, {hi}]; \
                 the derived cross section may be unreliable"
            )),
        }
    }

    // Quadratic-amplitude fit on the scaled axis, rate = beta (x / x_max)^2.
    let pts = series.points();
    let n = pts.len();
    let weighted = pts.iter().all(|p| p.rate_err_cps > 0.0);
    if !weighted {
        notes.push("some uncertainties are zero; fitting unweighted".to_string());
    }
    let x_max = pts.last().unwrap().x;
    let mut s = 0.0;
    let mut t = 0.0;
    let u2: Vec<f64> = pts.iter().map(|p| (p.x / x_max) * (p.x / x_max)).collect();
    let w: Vec<f64> = pts
        .iter()
        .map(|p| {
            if weighted {
                1.0 / (p.rate_err_cps * p.rate_err_cps)
            } else {
                1.0
            }
        })
        .collect();
    for i in 0..n {
        s += w[i] * u2[i] * u2[i];
        t += w[i] * u2[i] * pts[i].rate_cps;
    }
    if !(s > 0.0) {
        return Err(ModelError::degenerate(
            "quadratic amplitude fit has no support on this series",
        ));
    }
    let mut beta = t / s;
    for _ in 0..2 {
        let mut tr = 0.0;
        for i in 0..n {
            tr += w[i] * u2[i] * (pts[i].rate_cps - beta * u2[i]);
        }
        beta += tr / s;
    }
    let mut ssr = 0.0;
    for i in 0..n {
        let r = pts[i].rate_cps - beta * u2[i];
        ssr += r * r;
    }
    let var_beta = if weighted {
        1.0 / s
    } else {
        ssr / (n - 1) as f64 / s
    };
    if !(beta > 0.0) {
        return Err(ModelError::degenerate(format!(
            "series has no quadratic component (fitted amplitude {beta:.3e})"
        )));
    }

    let c = beta / (x_max * x_max);
    let k = cfg.k_collection()?;
    let nl = cfg.n_mol_per_cm3() * cfg.path_length_cm();
    let area = cfg.beam().area_cm2();
    let sigma_cm4s = match series.axis() {
        SeriesAxis::Power => {
            let energy = photon_energy_at_wavelength(lambda_nm)?;
            c * area * energy * energy / (GAUSSIAN_BEAM_PREFACTOR * k * nl)
        }
        SeriesAxis::Flux => c / (GAUSSIAN_BEAM_PREFACTOR * k * nl * area),
    };
    let sigma_err_cm4s = sigma_cm4s * var_beta.sqrt() / beta;

    let fit = FitReport {
        model: "quadratic_amplitude",
        params: vec![FitParam {
            name: "quadratic_coefficient",
            value: c,
            sigma: var_beta.sqrt() / (x_max * x_max),
            at_bound: false,
        }],
        residual_rms: (ssr / n as f64).sqrt(),
        dof: n - 1,
        converged: true,
        excluded_points: 0,
        notes,
    };
    Ok(SigmaDerivation {
        sigma_cm4s,
        sigma_gm: sigma_cm4s / GM_CM4_S,
        sigma_err_gm: sigma_err_cm4s / GM_CM4_S,
        slope,
        fit,
        slope_fit,
    })
}

/// Hot-band cross section anchored to a known two-photon cross section:
/// with fitted amplitudes `rate = a phi + b phi^2`, the identity
/// `a / b = sigma_hba / (sigma_c2pa / 2)` gives
/// `sigma_hba = (a / b) sigma_c2pa / 2`.
pub fn derive_sigma_hba(a: f64, b: f64, sigma_c2pa_cm4s: f64) -> Result<f64> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(ModelError::invalid(format!(
            "linear amplitude must be non-negative and finite, got {a}"
        )));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(ModelError::degenerate(format!(
            "quadratic amplitude must be positive to anchor the linear channel, got {b}"
        )));
    }
    if !(sigma_c2pa_cm4s.is_finite() && sigma_c2pa_cm4s > 0.0) {
        return Err(ModelError::invalid(format!(
            "anchor cross section must be positive and finite, got {sigma_c2pa_cm4s}"
        )));
    }
    Ok(a / b * sigma_c2pa_cm4s / 2.0)
}

/// [`derive_sigma_hba`] with first-order error propagation from the
/// amplitude covariance and the anchor's uncertainty. Returns
/// `(sigma_hba_cm2, sigma_err_cm2)`.
pub fn derive_sigma_hba_from_fit(
    fit: &LinQuadFit,
    sigma_c2pa_cm4s: f64,
    sigma_c2pa_err_cm4s: f64,
) -> Result<(f64, f64)> {
    if !(sigma_c2pa_err_cm4s.is_finite() && sigma_c2pa_err_cm4s >= 0.0) {
        return Err(ModelError::invalid(format!(
            "anchor uncertainty must be non-negative and finite, got {sigma_c2pa_err_cm4s}"
        )));
    }
    let value = derive_sigma_hba(fit.a, fit.b, sigma_c2pa_cm4s)?;
    let da = sigma_c2pa_cm4s / (2.0 * fit.b);
    let db = -(sigma_c2pa_cm4s * fit.a) / (2.0 * fit.b * fit.b);
    let ds = fit.a / (2.0 * fit.b);
    let var = da * da * fit.var_a
        + db * db * fit.var_b
        + ds * ds * sigma_c2pa_err_cm4s * sigma_c2pa_err_cm4s
        + 2.0 * da * db * fit.cov_ab;
    Ok((value, var.max(0.0).sqrt()))
}

fn validate_temperature_series(
    temperatures_k: &[f64],
    rates_cps: &[f64],
    activation_energy_j: f64,
    min_points: usize,
) -> Result<()> {
    if temperatures_k.len() != rates_cps.len() {
        return Err(ModelError::invalid(format!(
            "temperature and rate arrays differ in length ({} vs {})",
            temperatures_k.len(),
            rates_cps.len()
        )));
    }
    if temperatures_k.len() < min_points {
        return Err(ModelError::degenerate(format!(
            "temperature fit needs at least {min_points} points, got {}",
            temperatures_k.len()
        )));
    }
    for &t in temperatures_k {
        if !(t.is_finite() && t > 0.0) {
            return Err(ModelError::invalid(format!(
                "temperatures must be positive and finite, got {t} K"
            )));
        }
    }
    for &r in rates_cps {
        if !r.is_finite() {
            return Err(ModelError::invalid(format!(
                "rates must be finite, got {r}"
            )));
        }
    }
    if !(activation_energy_j.is_finite() && activation_energy_j > 0.0) {
        return Err(ModelError::invalid(format!(
            "activation energy must be positive and finite, got {activation_energy_j} J"
        )));
    }
    let t_min = temperatures_k.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = temperatures_k
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(t_max > t_min) {
        return Err(ModelError::degenerate(
            "temperature fit needs a temperature spread, all points are equal",
        ));
    }
    Ok(())
}

/// Fits `rate(T) = A exp(-E / kT) + C` with the activation energy `E` held
/// fixed. Linear least squares in `(A, C)` on the rescaled regressor
/// `exp(-E / kT) / max`, which keeps the normal equations conditioned even
/// when `A` is enormous and the Boltzmann factors are tiny.
pub fn fit_boltzmann(
    temperatures_k: &[f64],
    rates_cps: &[f64],
    activation_energy_j: f64,
) -> Result<FitReport> {
    validate_temperature_series(temperatures_k, rates_cps, activation_energy_j, 3)?;
    let n = temperatures_k.len();
    let x: Vec<f64> = temperatures_k
        .iter()
        .map(|&t| (-activation_energy_j / (BOLTZMANN_J_K * t)).exp())
        .collect();
    let x_max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(x_max > 0.0) {
        return Err(ModelError::degenerate(
            "Boltzmann regressors underflowed to zero; activation energy is too large",
        ));
    }
    let u: Vec<f64> = x.iter().map(|&v| v / x_max).collect();
    let y = rates_cps;

    let s11: f64 = u.iter().map(|&v| v * v).sum();
    let s12: f64 = u.iter().sum();
    let s22 = n as f64;
    let m = [[s11, s12], [s12, s22]];
    let rhs = [
        u.iter().zip(y).map(|(&a, &b)| a * b).sum::<f64>(),
        y.iter().sum::<f64>(),
    ];
    let mut beta = solve2(m, rhs)
        .ok_or_else(|| ModelError::degenerate("temperature fit normal matrix is singular"))?;
    for _ in 0..2 {
        let rr: [f64; 2] = {
            let mut t1 = 0.0;
            let mut t2 = 0.0;
            for i in 0..n {
                let r = y[i] - (beta[0] * u[i] + beta[1]);
                t1 += u[i] * r;
                t2 += r;
            }
            [t1, t2]
        };
        if let Some(d) = solve2(m, rr) {
            beta[0] += d[0];
            beta[1] += d[1];
        }
    }

    let mut ssr = 0.0;
    for i in 0..n {
        let r = y[i] - (beta[0] * u[i] + beta[1]);
        ssr += r * r;
    }
    let dof = n - 2;
    let s2 = ssr / dof as f64;
    let inv = invert2(m)
        .ok_or_else(|| ModelError::degenerate("temperature fit normal matrix is singular"))?;
    let se_alpha = (s2 * inv[0][0]).sqrt();
    let se_c = (s2 * inv[1][1]).sqrt();

    Ok(FitReport {
        model: "boltzmann_fixed_energy",
        params: vec![
            FitParam {
                name: "amplitude",
                value: beta[0] / x_max,
                sigma: se_alpha / x_max,
                at_bound: false,
            },
            FitParam {
                name: "offset",
                value: beta[1],
                sigma: se_c,
                at_bound: false,
            },
        ],
        residual_rms: (ssr / n as f64).sqrt(),
        dof,
        converged: true,
        excluded_points: 0,
        notes: Vec::new(),
    })
}

/// Fits `rate(T) = A exp(-E / kT) + C` with the activation energy free,
/// starting from `activation_energy_init_j`. Levenberg-Marquardt over the
/// reparameterized model `alpha exp(-eps g_i) + C` with
/// `g_i = E_init (1/kT_i - 1/kT_max)`, so `alpha` is the amplitude at the
/// hottest point (a rate-sized number) and `eps = E / E_init` is order one.
pub fn fit_boltzmann_free_energy(
    temperatures_k: &[f64],
    rates_cps: &[f64],
    activation_energy_init_j: f64,
) -> Result<FitReport> {
    validate_temperature_series(temperatures_k, rates_cps, activation_energy_init_j, 4)?;
    let n = temperatures_k.len();
    let t_max = temperatures_k
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let h = activation_energy_init_j / (BOLTZMANN_J_K * t_max);
    let g: Vec<f64> = temperatures_k
        .iter()
        .map(|&t| activation_energy_init_j / (BOLTZMANN_J_K * t) - h)
        .collect();
    let y = rates_cps;

    // Initial (alpha, C) from a linear solve at eps = 1.
    let e1: Vec<f64> = g.iter().map(|&gi| (-gi).exp()).collect();
    let s11: f64 = e1.iter().map(|&v| v * v).sum();
    let s12: f64 = e1.iter().sum();
    let rhs = [
        e1.iter().zip(y).map(|(&a, &b)| a * b).sum::<f64>(),
        y.iter().sum::<f64>(),
    ];
    let init = solve2([[s11, s12], [s12, n as f64]], rhs).unwrap_or([
        y.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - y.iter().cloned().fold(f64::INFINITY, f64::min),
        y.iter().cloned().fold(f64::INFINITY, f64::min),
    ]);
    let mut alpha = init[0];
    let mut c = init[1];
    let mut eps: f64 = 1.0;

    let ssr_of = |alpha: f64, c: f64, eps: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let r = y[i] - (alpha * (-eps * g[i]).exp() + c);
            acc += r * r;
        }
        acc
    };

    let mut ssr = ssr_of(alpha, c, eps);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..200 {
        // Jacobian products at the current parameters.
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for i in 0..n {
            let e = (-eps * g[i]).exp();
            let j = [e, 1.0, -alpha * g[i] * e];
            let r = y[i] - (alpha * e + c);
            for p in 0..3 {
                jtr[p] += j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let mut accepted = false;
        for _ in 0..40 {
            let mut m = jtj;
            for d in 0..3 {
                m[d][d] = jtj[d][d] * (1.0 + lambda);
            }
            let Some(step) = solve3(m, jtr) else {
                lambda *= 10.0;
                if lambda > 1e14 {
                    break;
                }
                continue;
            };
            let cand = (alpha + step[0], c + step[1], eps + step[2]);
            let ssr_new = ssr_of(cand.0, cand.1, cand.2);
            if ssr_new.is_finite() && ssr_new <= ssr {
                let drop = ssr - ssr_new;
                alpha = cand.0;
                c = cand.1;
                eps = cand.2;
                lambda = (lambda / 3.0).max(1e-14);
                if drop <= 1e-12 * ssr_new + f64::MIN_POSITIVE {
                    converged = true;
                }
                ssr = ssr_new;
                accepted = true;
                break;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break;
            }
        }
        if !accepted {
            // No damping level produces a downhill step: numerical minimum.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(ModelError::NonConvergence(format!(
            "temperature fit did not settle in 200 steps (residual sum {ssr:.3e})"
        )));
    }

    // Gauss-Newton covariance at the solution, mapped back to (A, C, E).
    let mut jtj = [[0.0f64; 3]; 3];
    for &gi in &g {
        let e = (-eps * gi).exp();
        let j = [e, 1.0, -alpha * gi * e];
        for p in 0..3 {
            for q in 0..3 {
                jtj[p][q] += j[p] * j[q];
            }
        }
    }
    let dof = n - 3;
    let s2 = ssr / dof as f64;
    let mut cov = [[f64::NAN; 3]; 3];
    let mut cov_ok = true;
    for col in 0..3 {
        let mut unit = [0.0; 3];
        unit[col] = 1.0;
        match solve3(jtj, unit) {
            Some(col_vals) => {
                for row in 0..3 {
                    cov[row][col] = s2 * col_vals[row];
                }
            }
            None => {
                cov_ok = false;
                break;
            }
        }
    }

    let growth = (eps * h).exp();
    let amplitude = alpha * growth;
    let energy = eps * activation_energy_init_j;
    let (se_a, se_c, se_e) = if cov_ok {
        let pa = growth;
        let pe = alpha * h * growth;
        let var_a = pa * pa * cov[0][0] + pe * pe * cov[2][2] + 2.0 * pa * pe * cov[0][2];
        (
            var_a.max(0.0).sqrt(),
            cov[1][1].max(0.0).sqrt(),
            (activation_energy_init_j * activation_energy_init_j * cov[2][2])
                .max(0.0)
                .sqrt(),
        )
    } else {
        (0.0, 0.0, 0.0)
    };
    let mut notes = Vec::new();
    if !cov_ok {
        notes.push("curvature matrix is singular; uncertainties unavailable".to_string());
    }

    Ok(FitReport {
        model: "boltzmann_free_energy",
        params: vec![
            FitParam {
                name: "amplitude",
                value: amplitude,
                sigma: se_a,
                at_bound: false,
            },
            FitParam {
                name: "offset",
                value: c,
                sigma: se_c,
                at_bound: false,
            },
            FitParam {
                name: "activation_energy_j",
                value: energy,
                sigma: se_e,
                at_bound: false,
            },
        ],
        residual_rms: (ssr / n as f64).sqrt(),
        dof,
        converged: true,
        excluded_points: 0,
        notes,
    })
}

/// Compares the wavelength dependence of measured hot-band cross sections
/// against the thermal expectation.
///
/// `points` are `(wavelength_nm, sigma_cm2)` pairs. The fitted quantity is
/// the slope of `log10(sigma)` against wavenumber (cm^-1); for a thermally
/// activated band it should approach `log10(e) h c / kT`, up to the
/// curvature of the band-shape weight.
pub fn check_boltzmann_slope(points: &[(f64, f64)], temperature_k: f64) -> Result<FitReport> {
    if points.len() < 3 {
        return Err(ModelError::degenerate(format!(
            "slope check needs at least 3 points, got {}",
            points.len()
        )));
    }
    if !(temperature_k.is_finite() && temperature_k > 0.0) {
        return Err(ModelError::invalid(format!(
            "temperature must be positive and finite, got {temperature_k} K"
        )));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(lambda_nm, sigma_cm2) in points {
        if !(lambda_nm.is_finite() && lambda_nm > 0.0) {
            return Err(ModelError::invalid(format!(
                "wavelengths must be positive and finite, got {lambda_nm} nm"
            )));
        }
        if !(sigma_cm2.is_finite() && sigma_cm2 > 0.0) {
            return Err(ModelError::invalid(format!(
                "cross sections must be positive and finite, got {sigma_cm2}"
            )));
        }
        xs.push(1e7 / lambda_nm);
        ys.push(sigma_cm2.log10());
    }
    let n = xs.len();
    let xbar = xs.iter().sum::<f64>() / n as f64;
    let ybar = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - xbar;
        sxx += dx * dx;
        sxy += dx * (ys[i] - ybar);
    }
    if !(sxx > 0.0) {
        return Err(ModelError::degenerate(
            "slope check needs at least two distinct wavelengths",
        ));
    }
    let fitted = sxy / sxx;
    let mut ssr = 0.0;
    for i in 0..n {
        let r = ys[i] - ybar - fitted * (xs[i] - xbar);
        ssr += r * r;
    }
    let dof = n - 2;
    let se = (ssr / dof as f64 / sxx).sqrt();
    let expected =
        LOG10_E * PLANCK_J_S * (SPEED_OF_LIGHT_M_S * 100.0) / (BOLTZMANN_J_K * temperature_k);

    Ok(FitReport {
        model: "boltzmann_wavelength_slope",
        params: vec![
            FitParam {
                name: "fitted_slope_cm",
                value: fitted,
                sigma: se,
                at_bound: false,
            },
            FitParam {
                name: "expected_slope_cm",
                value: expected,
                sigma: 0.0,
                at_bound: false,
            },
            FitParam {
                name: "ratio",
                value: fitted / expected,
                sigma: se / expected,
                at_bound: false,
            },
        ],
        residual_rms: (ssr / n as f64).sqrt(),
        dof,
        converged: true,
        excluded_points: 0,
        notes: Vec::new(),
    })
}

/// Mechanism classes the pump-versus-attenuation comparison can assign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    OnePhoton,
    ClassicalTwoPhoton,
    EntangledTwoPhotonConsistent,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::OnePhoton => "one_photon",
            Verdict::ClassicalTwoPhoton => "classical_two_photon",
            Verdict::EntangledTwoPhotonConsistent => "entangled_two_photon_consistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of the pump-versus-attenuation slope comparison.
#[derive(Debug, Clone, Serialize)]
pub struct MechanismVerdict {
    pub verdict: Verdict,
    pub pump_slope: f64,
    pub pump_slope_err: f64,
    pub attenuation_slope: f64,
    pub attenuation_slope_err: f64,
    pub threshold: f64,
    /// Human-readable record of which rules fired.
    pub rule_trace: Vec<String>,
}

/// Classifies an excitation mechanism from the log-log slopes of a
/// pump-power sweep and a post-source attenuation sweep.
///
/// Linear excitation responds with slope 1 to both; classical two-photon
/// excitation with slope 2 to both; pair-driven excitation is the odd one
/// out, responding linearly to pump power but quadratically to attenuation
/// because both photons of a pair must survive the attenuator. Slopes are
/// matched to their targets within `threshold`, which must stay below 0.5
/// so the classes cannot overlap.
pub fn discriminate_mechanism(
    pump: &PowerSeries,
    attenuation: &PowerSeries,
    threshold: f64,
) -> Result<MechanismVerdict> {
    if pump.sweep() != SweepKind::PumpPower {
        return Err(ModelError::invalid(
            "first series must be a pump-power sweep",
        ));
    }
    if attenuation.sweep() != SweepKind::PostAttenuation {
        return Err(ModelError::invalid(
            "second series must be a post-attenuation sweep",
        ));
    }
    if !(threshold.is_finite() && threshold > 0.0 && threshold < 0.5) {
        return Err(ModelError::invalid(format!(
            "slope threshold must lie in (0, 0.5) so the classes cannot overlap, got {threshold}"
        )));
    }
    let pump_fit = fit_loglog_slope(pump)?;
    let atten_fit = fit_loglog_slope(attenuation)?;
    let sp = pump_fit.require("slope");
    let spe = pump_fit.param("slope").unwrap().sigma;
    let sa = atten_fit.require("slope");
    let sae = atten_fit.param("slope").unwrap().sigma;

    let near = |slope: f64, target: f64| (slope - target).abs() <= threshold;
    let mut rule_trace = vec![
        format!("pump slope {sp:.4} +/- {spe:.4}"),
        format!("attenuation slope {sa:.4} +/- {sae:.4}"),
    ];
    let verdict = if near(sp, 1.0) && near(sa, 1.0) {
        rule_trace.push(format!(
            "both slopes within {threshold} of 1: linear response on both axes"
        ));
        Verdict::OnePhoton
    } else if near(sp, 2.0) && near(sa, 2.0) {
        rule_trace.push(format!(
            "both slopes within {threshold} of 2: quadratic response on both axes"
        ));
        Verdict::ClassicalTwoPhoton
    } else if near(sp, 1.0) && near(sa, 2.0) {
        rule_trace.push(format!(
            "pump slope within {threshold} of 1 but attenuation slope within {threshold} of 2: \
             linear in pair rate, quadratic in per-photon loss"
        ));
        Verdict::EntangledTwoPhotonConsistent
    } else {
        rule_trace.push(format!(
            "slope pair ({sp:.3}, {sa:.3}) matches no mechanism within {threshold}"
        ));
        Verdict::Inconclusive
    };

    Ok(MechanismVerdict {
        verdict,
        pump_slope: sp,
        pump_slope_err: spe,
        attenuation_slope: sa,
        attenuation_slope_err: sae,
        threshold,
        rule_trace,
    })
}

//! Property tests for the structural invariants of the models: unit
//! round-trips, homogeneity of the forward models in power, bounds on
//! derived cross sections, non-negativity of the constrained fits, and
//! determinism of the seeded simulator.

use proptest::prelude::*;

use tpef_core::constants::PLANCK_J_S;
use tpef_core::inference::{fit_linear_quadratic, fit_loglog_slope};
use tpef_core::photophysics::{hba_cross_section, Fluorophore};
use tpef_core::series::{PowerSeries, SeriesAxis, SeriesPoint, SweepKind};
use tpef_core::signal::{
    c2pef_signal, e2pa_signal_toy, hba_signal, photon_flux_cm2_s, simulate_power_series,
    total_signal, BeamGeometry, CollectionChain, ExcitationSource, ExperimentConfig, Mechanism,
};
use tpef_core::spectra::{
    frequency_to_wavelength, photon_energy, wavelength_to_frequency, Spectrum, SpectrumKind,
};

fn gaussian(kind: SpectrumKind, lo: f64, hi: f64, n: usize, center: f64, fwhm: f64) -> Spectrum {
    let step = (hi - lo) / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let sg = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
    let values: Vec<f64> = grid
        .iter()
        .map(|&l| {
            let d = l - center;
            (-(d * d) / (2.0 * sg * sg)).exp()
        })
        .collect();
    Spectrum::new(kind, grid, values).unwrap()
}

/// Simple dye with Gaussian bands: absorption peaked at 555 nm, emission at
/// 750 nm, band crossing declared at 672 nm.
fn dye() -> Fluorophore {
    Fluorophore::new(
        "testdye",
        0.054,
        1.54e4,
        wavelength_to_frequency(672.0).unwrap(),
        2.2e-48,
        gaussian(SpectrumKind::Absorption, 400.0, 780.0, 381, 555.0, 120.0),
        gaussian(SpectrumKind::Emission, 600.0, 1400.0, 401, 750.0, 150.0),
    )
    .unwrap()
}

fn config() -> ExperimentConfig {
    let filter = Spectrum::new(
        SpectrumKind::Transmission,
        vec![590.0, 1410.0],
        vec![0.025, 0.025],
    )
    .unwrap();
    ExperimentConfig::new(
        dye(),
        0.3e-3,
        1.0,
        BeamGeometry::new(55.0, 57.0).unwrap(),
        CollectionChain::new(0.042, vec![filter], None).unwrap(),
        298.15,
    )
    .unwrap()
}

fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi / lo).ln() / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo * (step * i as f64).exp()).collect();
    v[0] = lo;
    v[n - 1] = hi;
    v
}

fn flux_series(xs: &[f64], rates: &[f64], errs: &[f64]) -> PowerSeries {
    let pts: Vec<SeriesPoint> = xs
        .iter()
        .zip(rates)
        .zip(errs)
        .map(|((&x, &r), &e)| SeriesPoint {
            x,
            rate_cps: r,
            rate_err_cps: e,
            dwell_s: 1.0,
            clamped: false,
        })
        .collect();
    PowerSeries::new(pts, SweepKind::PumpPower, SeriesAxis::Flux).unwrap()
}

proptest! {
    #[test]
    fn wavelength_frequency_round_trip(lambda_nm in 100.0..5000.0f64) {
        let nu = wavelength_to_frequency(lambda_nm).unwrap();
        prop_assert!(nu > 0.0);
        let back = frequency_to_wavelength(nu).unwrap();
        prop_assert!((back - lambda_nm).abs() <= 1e-12 * lambda_nm);
        let e = photon_energy(nu).unwrap();
        prop_assert!((e - PLANCK_J_S * nu).abs() <= 1e-12 * e);
    }

    #[test]
    fn resampling_onto_own_nodes_is_exact(
        center in 500.0..700.0f64,
        fwhm in 20.0..200.0f64,
    ) {
        let s = gaussian(SpectrumKind::Emission, 400.0, 800.0, 201, center, fwhm);
        let sub: Vec<f64> = s.grid().iter().copied().step_by(2).collect();
        let r = s.resample(&sub).unwrap();
        for (i, &l) in sub.iter().enumerate() {
            let j = s.grid().iter().position(|&g| g == l).unwrap();
            prop_assert_eq!(r.values()[i], s.values()[j]);
        }
    }

    #[test]
    fn integration_is_homogeneous_in_amplitude(
        scale in 1e-3..1e3f64,
        fwhm in 20.0..200.0f64,
    ) {
        let s = gaussian(SpectrumKind::Emission, 400.0, 800.0, 201, 600.0, fwhm);
        let a = s.scaled(scale).unwrap().integrate();
        let b = scale * s.integrate();
        prop_assert!((a - b).abs() <= 1e-12 * b.abs());
    }

    #[test]
    fn peak_normalization_hits_exactly_one(
        center in 450.0..750.0f64,
        fwhm in 20.0..200.0f64,
        amp in 1e-6..1e6f64,
    ) {
        let s = gaussian(SpectrumKind::Absorption, 400.0, 800.0, 201, center, fwhm)
            .scaled(amp)
            .unwrap();
        let n = s.normalize_peak().unwrap();
        let (_, peak_value) = n.peak();
        prop_assert_eq!(peak_value, 1.0);
    }

    #[test]
    fn mirroring_a_symmetric_band_is_idempotent(fwhm in 30.0..150.0f64) {
        let s = gaussian(SpectrumKind::SpectralPowerDensity, 800.0, 1200.0, 161, 1000.0, fwhm);
        let once = s.mirror_about_center(1000.0).unwrap();
        let twice = once.mirror_about_center(1000.0).unwrap();
        prop_assert_eq!(once.len(), twice.len());
        for (a, b) in once.values().iter().zip(twice.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs() + 1e-300);
        }
    }

    #[test]
    fn classical_signal_is_exactly_homogeneous_of_degree_two(exp2 in -18i32..=18) {
        // Power-of-two rescaling commutes with every rounding step, so the
        // quadratic model scales bitwise exactly.
        let cfg = config();
        let src = ExcitationSource::monochromatic(1060.0, 1.0, 1e-3).unwrap();
        let c = (exp2 as f64).exp2();
        let base = c2pef_signal(&cfg, &src).unwrap();
        let scaled = c2pef_signal(&cfg, &src.with_power(1e-3 * c).unwrap()).unwrap();
        prop_assert_eq!(scaled, c * c * base);
    }

    #[test]
    fn hot_band_signal_is_exactly_homogeneous_of_degree_one(
        exp2 in -18i32..=18,
        lambda_nm in 900.0..1200.0f64,
    ) {
        let cfg = config();
        let src = ExcitationSource::monochromatic(lambda_nm, 1.0, 1e-3).unwrap();
        let c = (exp2 as f64).exp2();
        let base = hba_signal(&cfg, &src).unwrap();
        let scaled = hba_signal(&cfg, &src.with_power(1e-3 * c).unwrap()).unwrap();
        prop_assert_eq!(scaled, c * base);
        prop_assert!(base > 0.0);
    }

    #[test]
    fn photon_flux_is_linear_in_power(
        power in 1e-9..1.0f64,
        scale in 1e-6..1e6f64,
        lambda_nm in 400.0..2000.0f64,
    ) {
        let area = BeamGeometry::new(55.0, 57.0).unwrap().area_cm2();
        let a = photon_flux_cm2_s(power * scale, lambda_nm, area).unwrap();
        let b = scale * photon_flux_cm2_s(power, lambda_nm, area).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn lumped_model_slope_stays_between_one_and_two(
        phi in 1e18..1e24f64,
        log_sigma in -30.0..-24.0f64,
    ) {
        let cfg = config();
        let sigma_hba = 10f64.powf(log_sigma);
        let h = 1e-3;
        let lo = total_signal(&cfg, phi * (1.0 - h), sigma_hba).unwrap();
        let mid = total_signal(&cfg, phi, sigma_hba).unwrap();
        let hi = total_signal(&cfg, phi * (1.0 + h), sigma_hba).unwrap();
        prop_assert!(lo < mid && mid < hi, "rate must grow with flux");
        let slope = (hi.ln() - lo.ln()) / ((1.0 + h) / (1.0 - h)).ln();
        prop_assert!((1.0 - 1e-6..=2.0 + 1e-6).contains(&slope), "slope {slope}");
    }

    #[test]
    fn hot_band_cross_section_is_positive_bounded_and_thermal(
        lambda_nm in 700.0..1400.0f64,
        t_k in 200.0..400.0f64,
    ) {
        let d = dye();
        let nu = wavelength_to_frequency(lambda_nm).unwrap();
        let sigma = hba_cross_section(nu, t_k, &d).unwrap();
        prop_assert!(sigma > 0.0);
        // The mirrored absorbance never exceeds the band peak, so the shape
        // weight is bounded by 1 / A(crossing).
        let a_cross = d
            .absorption()
            .value_at(frequency_to_wavelength(d.nu_max_hz()).unwrap())
            .unwrap();
        prop_assert!(sigma <= d.sigma_max_cm2() / a_cross * (1.0 + 1e-12));
        // Hotter samples populate the vibrational levels more strongly.
        let hotter = hba_cross_section(nu, t_k + 5.0, &d).unwrap();
        prop_assert!(hotter > sigma);
    }

    #[test]
    fn constrained_amplitude_fit_never_goes_negative(
        seed_rates in prop::collection::vec(0.0..1e4f64, 8),
        with_errors in any::<bool>(),
    ) {
        let phi = geomspace(2e20, 4e21, 8);
        let errs: Vec<f64> = seed_rates
            .iter()
            .map(|&r| if with_errors { (r + 1.0).sqrt() } else { 0.0 })
            .collect();
        let s = flux_series(&phi, &seed_rates, &errs);
        let fit = fit_linear_quadratic(&s).unwrap();
        prop_assert!(fit.a >= 0.0);
        prop_assert!(fit.b >= 0.0);
        for name in ["linear_coefficient", "quadratic_coefficient"] {
            let p = fit.report.param(name).unwrap();
            if p.at_bound {
                prop_assert_eq!(p.value, 0.0);
                prop_assert_eq!(p.sigma, 0.0);
            }
        }
    }

    #[test]
    fn seeded_simulation_is_reproducible_and_indexed_by_point(seed in any::<u64>()) {
        let cfg = config();
        let src = ExcitationSource::monochromatic(1060.0, 1.0, 1e-3).unwrap();
        let powers = [1e-3, 2e-3, 4e-3, 8e-3];
        let run = |p: &[f64]| {
            simulate_power_series(
                &cfg,
                &src,
                Mechanism::ClassicalTwoPhoton,
                SweepKind::PumpPower,
                p,
                10.0,
                4.0,
                Some(seed),
            )
            .unwrap()
        };
        let a = run(&powers);
        let b = run(&powers);
        for (pa, pb) in a.points().iter().zip(b.points()) {
            prop_assert_eq!(pa.rate_cps, pb.rate_cps);
            prop_assert_eq!(pa.rate_err_cps, pb.rate_err_cps);
        }
        // Each point's draw depends only on (seed, index, mean): changing a
        // middle power leaves the other points' draws untouched.
        let c = run(&[1e-3, 3e-3, 4e-3, 8e-3]);
        prop_assert_eq!(a.points()[0].rate_cps, c.points()[0].rate_cps);
        prop_assert_eq!(a.points()[2].rate_cps, c.points()[2].rate_cps);
        prop_assert_eq!(a.points()[3].rate_cps, c.points()[3].rate_cps);
    }

    #[test]
    fn pair_signal_trades_rate_against_transmission(alpha in 1e-4..1.0f64) {
        let cfg = config();
        let rate = 1e11;
        let a = e2pa_signal_toy(&cfg, alpha * rate, 1e-22, 1.0).unwrap();
        let b = e2pa_signal_toy(&cfg, rate, 1e-22, alpha.sqrt()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }

    #[test]
    fn fitted_power_law_slope_is_scale_invariant(
        slope in 0.5..2.5f64,
        log_amp in -3.0..3.0f64,
        log_scale in -3.0..3.0f64,
    ) {
        let xs = geomspace(1e-3, 1e-1, 9);
        let amp = 10f64.powf(log_amp);
        let rates: Vec<f64> = xs.iter().map(|&x| amp * x.powf(slope)).collect();
        let pts = |x: &[f64]| -> PowerSeries {
            let p: Vec<SeriesPoint> = x
                .iter()
                .zip(&rates)
                .map(|(&x, &r)| SeriesPoint {
                    x,
                    rate_cps: r,
                    rate_err_cps: 0.0,
                    dwell_s: 1.0,
                    clamped: false,
                })
                .collect();
            PowerSeries::new(p, SweepKind::PumpPower, SeriesAxis::Power).unwrap()
        };
        let f1 = fit_loglog_slope(&pts(&xs)).unwrap();
        prop_assert!((f1.param("slope").unwrap().value - slope).abs() <= 1e-9);

        let scale = 10f64.powf(log_scale);
        let xs2: Vec<f64> = xs.iter().map(|&x| scale * x).collect();
        let f2 = fit_loglog_slope(&pts(&xs2)).unwrap();
        prop_assert!(
            (f1.param("slope").unwrap().value - f2.param("slope").unwrap().value).abs() <= 1e-10
        );
    }
}

/// Sample moments of the simulated counts match the Poisson law they claim
/// to follow: 500 independent draws of one sweep point are checked against
/// the exact mean at the 4-sigma level, and the sample variance against
/// `Var(s^2) ~ (mu + 2 mu^2) / n`.
#[test]
fn simulated_counts_match_poisson_moments() {
    let cfg = config();
    let src = ExcitationSource::monochromatic(1060.0, 1.0, 1e-3).unwrap();
    let dwell = 10.0;
    let background = 4.0;
    let expected = c2pef_signal(&cfg, &src).unwrap();
    let mu = (expected + background) * dwell;

    let n = 500usize;
    let counts: Vec<f64> = (0..n)
        .map(|seed| {
            let s = simulate_power_series(
                &cfg,
                &src,
                Mechanism::ClassicalTwoPhoton,
                SweepKind::PumpPower,
                &[1e-3],
                dwell,
                background,
                Some(seed as u64),
            )
            .unwrap();
            let pt = &s.points()[0];
            assert!(!pt.clamped);
            (pt.rate_cps + background) * dwell
        })
        .collect();

    let mean = counts.iter().sum::<f64>() / n as f64;
    let var = counts.iter().map(|&c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1) as f64;

    let mean_tol = 4.0 * (mu / n as f64).sqrt();
    assert!(
        (mean - mu).abs() <= mean_tol,
        "sample mean {mean} vs {mu} (tolerance {mean_tol})"
    );
    let var_tol = 4.0 * ((mu + 2.0 * mu * mu) / n as f64).sqrt();
    assert!(
        (var - mu).abs() <= var_tol,
        "sample variance {var} vs {mu} (tolerance {var_tol})"
    );
}

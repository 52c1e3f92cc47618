//! Values frozen from independent reference computations (a separate
//! numpy/scipy implementation and direct formula evaluation), plus Monte
//! Carlo checks of statistical claims.

use num_complex::Complex64;

use jcs_track::experiments::{self, ExperimentId, ExperimentSpec};
use jcs_track::rng;
use jcs_track::scenario::{self, path_snr, PathLabel, ScenarioConfig};
use jcs_track::signalmodel::{steering_vector_2d, steering_vector_roll, CfrRecord};
use jcs_track::subspace::{
    covariance_from_sliding_window, covariance_from_snapshots, estimate_aoa_2d, estimate_frequency,
    estimate_roll, frequency_pseudospectrum, frequency_steering, noise_subspace,
    FrequencyEstimator,
};
use jcs_track::tracking::{
    self, gyro_angle_rmse, imu_position_rmse, recalibrated_angle_rmse, MonteCarlo,
};

const MG: f64 = 1e-3 * scenario::STANDARD_GRAVITY;

#[test]
fn link_budget_matches_reference() {
    let cfg = ScenarioConfig::default();
    let snr = |l| path_snr(&scenario::path(l, &cfg), &cfg).unwrap();
    assert!((snr(PathLabel::Ap1Hmd) - 35.970_990_454_024_9).abs() < 1e-10);
    assert!((snr(PathLabel::Ap2Hmd) - 35.970_990_454_024_9).abs() < 1e-10);
    assert!((snr(PathLabel::Ap1Ris1Hmd) - 34.801_537_605_665_13).abs() < 1e-10);
    assert!((snr(PathLabel::Ap1Ris2Hmd) - 28.366_765_619_792_773).abs() < 1e-10);
}

fn perturbed_tone(f: f64, k: usize) -> Vec<Complex64> {
    (0..k)
        .map(|i| {
            let i = i as f64;
            Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * f * i)
                + Complex64::from_polar(0.05, 0.7 * i * i)
        })
        .collect()
}

#[test]
fn frequency_estimates_match_reference_implementation() {
    // Reference: explicit FB covariance, full eigh, bounded scalar minimization.
    for (k, f, expected) in [
        (64, 0.0123, 0.012_342_888_549_398_945),
        (400, -0.0731, -0.073_099_059_803_271_03),
        (417, 0.004, 0.003_999_238_861_820_641),
    ] {
        let got = estimate_frequency(&CfrRecord::scalar(perturbed_tone(f, k), None), None).unwrap();
        assert!(
            (got - expected).abs() < 1e-8,
            "K = {k}: {got} vs {expected}"
        );
    }
}

#[test]
fn angle_estimates_match_reference_implementation() {
    let idx = |i: usize| i as f64;
    let mut h = steering_vector_2d(37.3, 121.7, 4, 4);
    for (i, z) in h.iter_mut().enumerate() {
        *z += Complex64::from_polar(0.05, 1.3 * idx(i) * idx(i) + 0.2);
    }
    let est = estimate_aoa_2d(&[h], 4, 4).unwrap();
    assert!((est.theta - 37.578_708_82).abs() < 1e-5, "{est:?}");
    assert!((est.phi - 121.685_990_86).abs() < 1e-5, "{est:?}");

    let mut r = steering_vector_roll(-23.4, 4, 4);
    for (i, z) in r.iter_mut().enumerate() {
        *z += Complex64::from_polar(0.05, 0.9 * idx(i) * idx(i));
    }
    let g = estimate_roll(&[r], 4, 4).unwrap();
    assert!((g + 23.089_282_081_443_75).abs() < 1e-6, "{g}");
}

#[test]
fn white_noise_covariance_tends_to_scaled_identity() {
    let mut r = rng::seeded(17);
    let var = 0.3;
    let y: Vec<Complex64> = (0..10_000)
        .map(|_| rng::complex_gaussian(&mut r, var))
        .collect();
    let cov = covariance_from_sliding_window(&y, 8).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let target = if i == j { var } else { 0.0 };
            assert!(
                (cov.matrix()[(i, j)] - Complex64::new(target, 0.0)).norm() < 0.03,
                "({i}, {j})"
            );
        }
    }
    let snaps: Vec<Vec<Complex64>> = (0..10_000)
        .map(|_| (0..6).map(|_| rng::complex_gaussian(&mut r, var)).collect())
        .collect();
    let cov = covariance_from_snapshots(&snaps).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let target = if i == j { var } else { 0.0 };
            assert!((cov.matrix()[(i, j)] - Complex64::new(target, 0.0)).norm() < 0.03);
        }
    }
}

fn noisy_tone(f: f64, k: usize, snr_db: f64, seed: u64) -> Vec<Complex64> {
    let mut r = rng::seeded(seed);
    let var = 10f64.powf(-snr_db / 10.0);
    frequency_steering(f, k)
        .into_iter()
        .map(|z| z + rng::complex_gaussian(&mut r, var))
        .collect()
}

#[test]
fn noise_subspace_separates_true_and_false_frequencies() {
    let (k, m, f) = (200, 100, 0.02);
    for seed in 0..20 {
        let y = noisy_tone(f, k, 30.0, seed);
        let ns = noise_subspace(&covariance_from_sliding_window(&y, m).unwrap(), 1).unwrap();
        let at_true = ns.projection_norm(&frequency_steering(f, m)).unwrap();
        let bin = 1.0 / (8 * k) as f64;
        for off in [-40.0, -3.0, 3.0, 40.0] {
            let at_false = ns
                .projection_norm(&frequency_steering(f + off * bin, m))
                .unwrap();
            assert!(
                at_true < 0.2 * at_false,
                "seed {seed}, offset {off}: {at_true} vs {at_false}"
            );
        }
    }
}

#[test]
fn spectrum_peak_dominates_median() {
    let (k, m, f) = (200, 100, -0.031);
    let grid: Vec<f64> = (0..1600).map(|i| -0.5 + i as f64 / 1600.0).collect();
    for seed in 0..10 {
        let y = noisy_tone(f, k, 30.0, seed);
        let spec = frequency_pseudospectrum(&y, m, &grid).unwrap();
        let ns = noise_subspace(&covariance_from_sliding_window(&y, m).unwrap(), 1).unwrap();
        let peak = 1.0 / ns.quadratic_form(&frequency_steering(f, m)).unwrap();
        let mut sorted = spec.values.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert!(peak >= 1e3 * median, "seed {seed}: {peak} vs {median}");
    }
}

#[test]
fn frequency_error_falls_with_snr() {
    let (k, f) = (100, 0.0137);
    let rmse = |snr: f64| {
        let sq: f64 = (0..200)
            .map(|s| {
                let e = FrequencyEstimator::default()
                    .estimate(&noisy_tone(f, k, snr, 1000 + s))
                    .unwrap()
                    - f;
                e * e
            })
            .sum();
        (sq / 200.0).sqrt()
    };
    let levels: Vec<f64> = [10.0, 20.0, 30.0, 40.0].into_iter().map(rmse).collect();
    for w in levels.windows(2) {
        assert!(w[1] < w[0], "{levels:?}");
    }
}

#[test]
fn imu_closed_form_matches_frame_rate_integration() {
    // 1000 realizations integrated at the 120 Hz frame rate, no sub-steps.
    let t = 1.0 / 120.0;
    let sigma_a = 2.0 * MG;
    let mc = MonteCarlo {
        trials: 1000,
        seed: 5,
        substeps: 1,
    };
    let sim = tracking::imu_position_monte_carlo(sigma_a, t, &[1.0], &mc)
        .unwrap()
        .rmse()[0];
    let closed = imu_position_rmse(sigma_a, t, 1.0).unwrap();
    assert!((closed - 1.790_5e-3).abs() < 1e-6, "{closed}");
    assert!((sim / closed - 1.0).abs() < 0.05, "{sim} vs {closed}");
}

#[test]
fn angle_closed_forms_match_monte_carlo() {
    let t = 1.0 / 120.0;
    let grid = tracking::log_grid(1.0, 3600.0, 20).unwrap();
    let mc = MonteCarlo {
        trials: 1000,
        seed: 9,
        substeps: 1,
    };
    let (s0, sg, tb) = (0.4421, 0.0807, 0.1024);
    let gyro = tracking::gyro_angle_monte_carlo(sg, t, &grid, &mc)
        .unwrap()
        .rmse();
    let recal = tracking::recalibrated_angle_monte_carlo(s0, sg, t, tb, &grid, &mc)
        .unwrap()
        .rmse();
    for (i, &tt) in grid.iter().enumerate() {
        let g = gyro_angle_rmse(sg, t, tt).unwrap();
        let r = recalibrated_angle_rmse(s0, sg, t, tb, tt).unwrap();
        assert!((gyro[i] / g - 1.0).abs() < 0.05, "gyro at {tt}");
        assert!((recal[i] / r - 1.0).abs() < 0.05, "recal at {tt}");
    }
}

#[test]
fn roll_accuracy_is_comparable_to_elevation_azimuth() {
    let cfg = ScenarioConfig::default();
    let spec = ExperimentSpec {
        trials: Some(200),
        ..ExperimentSpec::new(ExperimentId::Sigma0)
    };
    let result = experiments::run(&cfg, &spec).unwrap();
    let sigma0 = result.headline("sigma0_deg").unwrap();
    let roll = result.headline("roll_rmse_deg").unwrap();
    assert!(
        roll > sigma0 / 4.0 && roll < sigma0 * 4.0,
        "{roll} vs {sigma0}"
    );
    let sweep = result.series("sweep").unwrap().ys();
    assert!(sweep.windows(2).all(|w| w[1] < w[0]), "{sweep:?}");
}

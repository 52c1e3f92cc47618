//! Monte Carlo drivers for every table and figure, plus result serialization.
//!
//! Each run returns a [`ResultSet`]: named series of `(x, y, y_err)` points,
//! headline scalars, and the metadata needed to reproduce it. Trials draw
//! from per-trial streams and are merged by index, so output is identical
//! whatever the thread count.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::render_config;
use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::{self, build_scenario, path_snr, PathLabel, ScenarioConfig, ScenarioVariant};
use crate::signalmodel::{
    apply_codebook_with, invert_codebook, steering_vector_2d, steering_vector_roll, synth_cfr_with,
    BeamCodebook, VelocityTrace,
};
use crate::subspace::{estimate_aoa_2d, estimate_roll, FrequencyEstimator};
use crate::tracking::{
    self, crossover_time, gyro_angle_rmse, imu_position_rmse, jcs_position_rmse, log_grid,
    recalibrated_angle_bound, recalibrated_angle_rmse, AccelProfile, ErrorCurve, ImuSpec,
    MonteCarlo, ProfileLabel, TrialErrors,
};

/// SNR of the observation-time study, dB.
pub const FIG3_SNR_DB: f64 = 30.0;
/// Acceleration stds of the observation-time study, m/s^2.
pub const FIG3_ACCELERATIONS: [f64; 4] = [0.0, 10.0, 20.0, 40.0];
/// Bootstrap resamples for every error bar.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
/// Trials behind each simulated per-axis velocity std feeding position curves.
pub const VELOCITY_TRIALS: usize = 500;
/// Elevation range of random AoA test sources, degrees.
pub const AOA_ELEVATION_RANGE: (f64, f64) = (20.0, 70.0);
/// Roll range of random test sources, degrees.
pub const ROLL_RANGE: (f64, f64) = (-60.0, 60.0);
/// Path SNRs of the AoA accuracy sweep, dB.
pub const SIGMA0_SWEEP_DB: [f64; 6] = [20.0, 24.0, 28.0, 32.0, 36.0, 40.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    Table2,
    Fig3,
    Table3,
    Sigma0,
    Fig4,
    Fig5,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Table2,
        ExperimentId::Fig3,
        ExperimentId::Table3,
        ExperimentId::Sigma0,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Table2 => "table2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Table3 => "table3",
            ExperimentId::Sigma0 => "sigma0",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentId::Table2 => "worst-case SNR of each propagation path",
            ExperimentId::Fig3 => "velocity RMSE vs observation time at 30 dB",
            ExperimentId::Table3 => "speed RMSE per path and motion profile at one display frame",
            ExperimentId::Sigma0 => {
                "2D AoA RMSE through codebook inversion, plus SNR sweep and roll"
            }
            ExperimentId::Fig4 => "position error vs time, radio vs accelerometer dead reckoning",
            ExperimentId::Fig5 => "angle error vs time, recalibrated AoA vs gyroscope",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            ExperimentId::Table2 => 1,
            ExperimentId::Fig3 => 100,
            ExperimentId::Table3 => 500,
            ExperimentId::Sigma0 => 500,
            ExperimentId::Fig4 | ExperimentId::Fig5 => 1000,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownExperiment(s.to_string()))
    }
}

/// What to run and how.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    /// `None` uses the experiment's default trial count.
    pub trials: Option<usize>,
    pub seed: u64,
    pub variant: ScenarioVariant,
    /// `None` runs both profiles where the experiment depends on one.
    pub profile: Option<ProfileLabel>,
    /// Per-axis velocity stds in m/s; `None` simulates them.
    pub sigma_v: Option<[f64; 3]>,
    /// AoA recalibration error, degrees.
    pub sigma0: f64,
    /// Gyroscope noise per sample, degrees; `None` derives it from `sigma0`.
    pub sigma_g: Option<f64>,
    /// Antenna-domain snapshots per beam training.
    pub aoa_snapshots: usize,
}

impl ExperimentSpec {
    pub fn new(id: ExperimentId) -> Self {
        Self {
            id,
            trials: None,
            seed: 1,
            variant: ScenarioVariant::S1,
            profile: None,
            sigma_v: None,
            sigma0: tracking::SIGMA0_DEFAULT,
            sigma_g: None,
            aoa_snapshots: 1,
        }
    }

    pub fn trial_count(&self) -> usize {
        self.trials.unwrap_or_else(|| self.id.default_trials())
    }

    /// File stem shared by the CSV and its sidecar.
    pub fn output_stem(&self) -> String {
        match self.id {
            ExperimentId::Fig4 => {
                let profile = self
                    .profile
                    .map_or_else(|| "all".to_string(), |p| p.to_string());
                format!("fig4_{profile}_{}", self.variant)
            }
            id => id.name().to_string(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trial_count() == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if self.aoa_snapshots == 0 {
            return Err(Error::Config("need at least one AoA snapshot".into()));
        }
        if self.sigma0.is_nan() || self.sigma0 <= 0.0 {
            return Err(Error::Config(format!(
                "sigma0 must be positive, got {}",
                self.sigma0
            )));
        }
        if let Some(g) = self.sigma_g {
            if g.is_nan() || g <= 0.0 {
                return Err(Error::Config(format!("sigma_g must be positive, got {g}")));
            }
        }
        if let Some(sv) = self.sigma_v {
            if sv.iter().any(|s| s.is_nan() || *s <= 0.0) {
                return Err(Error::Config(format!(
                    "velocity stds must be positive, got {sv:?}"
                )));
            }
        }
        if self.profile == Some(ProfileLabel::Custom) {
            return Err(Error::Config(
                "experiments run the P1 and P2 profiles only".into(),
            ));
        }
        Ok(())
    }

    fn profiles(&self) -> Vec<ProfileLabel> {
        match self.profile {
            Some(p) => vec![p],
            None => vec![ProfileLabel::P1, ProfileLabel::P2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub y_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
}

impl Series {
    fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            points: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, y: f64, y_err: Option<f64>) {
        self.points.push(Point { x, y, y_err });
    }

    fn from_values(name: impl Into<String>, x: &[f64], y: &[f64], err: Option<&[f64]>) -> Self {
        let points = x
            .iter()
            .zip(y)
            .enumerate()
            .map(|(i, (&x, &y))| Point {
                x,
                y,
                y_err: err.map(|e| e[i]),
            })
            .collect();
        Self {
            name: name.into(),
            points,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.y).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Headline {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub id: ExperimentId,
    pub seed: u64,
    pub trials: usize,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    pub metadata: Metadata,
    pub series: Vec<Series>,
    pub headline: Vec<Headline>,
}

impl ResultSet {
    pub fn series(&self, name: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.name == name)
    }

    pub fn headline(&self, name: &str) -> Option<f64> {
        self.headline
            .iter()
            .find(|h| h.name == name)
            .map(|h| h.value)
    }

    fn add_headline(&mut self, name: impl Into<String>, value: f64) {
        self.headline.push(Headline {
            name: name.into(),
            value,
        });
    }

    /// `series,x,y,y_err` rows; `y_err` is empty where not estimated.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "series,x,y,y_err")?;
        for s in &self.series {
            for p in &s.points {
                match p.y_err {
                    Some(e) => writeln!(out, "{},{},{},{}", s.name, p.x, p.y, e)?,
                    None => writeln!(out, "{},{},{},", s.name, p.x, p.y)?,
                }
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Domain(e.to_string()))
    }
}

/// Hex SHA-256 of the configuration text and every spec field that affects
/// the numbers.
pub fn config_hash(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> String {
    let mut hasher = Sha256::new();
    hasher.update(render_config(cfg).as_bytes());
    hasher.update(
        format!(
            "id={} seed={} trials={} variant={} profile={:?} sigma_v={:?} sigma0={} sigma_g={:?} snapshots={}",
            spec.id,
            spec.seed,
            spec.trial_count(),
            spec.variant,
            spec.profile,
            spec.sigma_v,
            spec.sigma0,
            spec.sigma_g,
            spec.aoa_snapshots
        )
        .as_bytes(),
    );
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Stable 64-bit tag for a sub-experiment label (FNV-1a).
fn tag(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

fn parallel_trials<T, F>(seed: u64, label: &str, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut rng::SimRng) -> Result<T> + Sync,
{
    let t = tag(label);
    (0..trials as u64)
        .into_par_iter()
        .map(|i| f(&mut rng::trial_stream(seed, t, i)))
        .collect()
}

/// Std of the bootstrapped RMSE for each column of `squared` (`[trial][column]`).
pub fn bootstrap_rmse_std(
    squared: &[Vec<f64>],
    resamples: usize,
    seed: u64,
    label: &str,
) -> Vec<f64> {
    let n = squared.len();
    let cols = squared.first().map_or(0, Vec::len);
    if n == 0 || resamples < 2 {
        return vec![0.0; cols];
    }
    let data = DMatrix::from_fn(n, cols, |i, j| squared[i][j]);
    let mut rng = rng::stream(rng::splitmix64(seed ^ tag(label)), 0xb007);
    let mut counts = DMatrix::<f64>::zeros(resamples, n);
    for b in 0..resamples {
        for _ in 0..n {
            counts[(b, rng.random_range(0..n))] += 1.0;
        }
    }
    let sums = counts * data;
    (0..cols)
        .map(|j| {
            let vals: Vec<f64> = (0..resamples)
                .map(|b| (sums[(b, j)] / n as f64).sqrt())
                .collect();
            let mean = vals.iter().sum::<f64>() / resamples as f64;
            (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64).sqrt()
        })
        .collect()
}

fn rmse_with_error(errors: &[f64], seed: u64, label: &str) -> (f64, f64) {
    let squared: Vec<Vec<f64>> = errors.iter().map(|e| vec![e * e]).collect();
    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt();
    (
        rmse,
        bootstrap_rmse_std(&squared, BOOTSTRAP_RESAMPLES, seed, label)[0],
    )
}

/// Packets per observation of duration `time`.
pub fn packets_for(cfg: &ScenarioConfig, time: f64) -> usize {
    (time * cfg.packet_rate).round() as usize
}

/// Observation times of the T sweep: seven log-spaced points, 1 ms to 51.8 ms.
pub fn fig3_times() -> Vec<f64> {
    (0..7)
        .map(|i| 1e-3 * 10f64.powf(12.0 / 7.0 * i as f64 / 6.0))
        .collect()
}

/// Velocity estimation error (estimate minus window mean) for one random
/// acceleration per trial.
pub fn velocity_errors(
    cfg: &ScenarioConfig,
    snr_db: f64,
    sigma_bar_a: f64,
    packets: usize,
    trials: usize,
    seed: u64,
    label: &str,
) -> Result<Vec<f64>> {
    let estimator = FrequencyEstimator::default();
    parallel_trials(seed, label, trials, |r| {
        let a = rng::gaussian(r, sigma_bar_a);
        let trace = VelocityTrace::accelerating(a, packets, cfg.packet_rate)?;
        let record = synth_cfr_with(
            &trace,
            Complex64::new(1.0, 0.0),
            cfg.carrier_freq,
            Some(snr_db),
            r,
        );
        let f = estimator.estimate(record.samples())?;
        Ok(tracking::velocity_from_frequency(f, cfg.carrier_freq, cfg.packet_rate)? - trace.mean())
    })
}

fn finish(cfg: &ScenarioConfig, spec: &ExperimentSpec, series: Vec<Series>) -> ResultSet {
    ResultSet {
        metadata: Metadata {
            id: spec.id,
            seed: spec.seed,
            trials: spec.trial_count(),
            config_hash: config_hash(cfg, spec),
        },
        series,
        headline: Vec::new(),
    }
}

pub fn run(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    cfg.validate()?;
    spec.validate()?;
    match spec.id {
        ExperimentId::Table2 => run_table2(cfg, spec),
        ExperimentId::Fig3 => run_fig3(cfg, spec),
        ExperimentId::Table3 => run_table3(cfg, spec),
        ExperimentId::Sigma0 => run_sigma0(cfg, spec),
        ExperimentId::Fig4 => run_fig4(cfg, spec),
        ExperimentId::Fig5 => run_fig5(cfg, spec),
    }
}

/// Series per path, x = total length (m), y = SNR (dB).
pub fn run_table2(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    let mut series = Vec::new();
    let mut heads = Vec::new();
    for p in scenario::reference_paths(cfg) {
        let snr = path_snr(&p, cfg)?;
        let mut s = Series::new(p.label.to_string());
        s.push(p.total_length(), snr, None);
        series.push(s);
        heads.push((format!("{} snr_db", p.label), snr));
    }
    let mut out = finish(cfg, spec, series);
    for (n, v) in heads {
        out.add_headline(n, v);
    }
    Ok(out)
}

/// Series per acceleration std, x = observation time (s), y = velocity RMSE (m/s).
pub fn run_fig3(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    let trials = spec.trial_count();
    let times = fig3_times();
    let mut series = Vec::new();
    for &sa in &FIG3_ACCELERATIONS {
        let name = format!("sigma_a={sa}");
        let mut s = Series::new(name.clone());
        for &t in &times {
            let label = format!("fig3/{sa}/{t}");
            let k = packets_for(cfg, t);
            let errors = velocity_errors(cfg, FIG3_SNR_DB, sa, k, trials, spec.seed, &label)?;
            let (rmse, err) = rmse_with_error(&errors, spec.seed, &label);
            s.push(k as f64 / cfg.packet_rate, rmse, Some(err));
        }
        series.push(s);
    }
    let mut out = finish(cfg, spec, series);
    let picks = [(0.0, 0usize), (0.0, 6), (40.0, 4)];
    for (sa, i) in picks {
        let s = out.series(&format!("sigma_a={sa}")).map(|s| s.points[i]);
        if let Some(p) = s {
            out.add_headline(format!("rmse sigma_a={sa} T={:.4}", p.x), p.y);
        }
    }
    Ok(out)
}

struct VelocityStat {
    rmse: f64,
    err: f64,
}

fn simulate_velocity_std(
    cfg: &ScenarioConfig,
    snr_db: f64,
    profile: AccelProfile,
    trials: usize,
    seed: u64,
    label: &str,
) -> Result<VelocityStat> {
    let k = packets_for(cfg, cfg.observation_time());
    let errors = velocity_errors(cfg, snr_db, profile.sigma_bar_a, k, trials, seed, label)?;
    let (rmse, err) = rmse_with_error(&errors, seed, label);
    Ok(VelocityStat { rmse, err })
}

/// Series per path, x = acceleration std (m/s^2), y = speed RMSE (m/s), at
/// one display frame.
pub fn run_table3(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    let trials = spec.trial_count();
    let mut series = Vec::new();
    let mut heads = Vec::new();
    for p in scenario::reference_paths(cfg) {
        let snr = path_snr(&p, cfg)?;
        let mut s = Series::new(p.label.to_string());
        for label in [ProfileLabel::P1, ProfileLabel::P2] {
            let profile = AccelProfile::from_label(label)?;
            let stat = simulate_velocity_std(
                cfg,
                snr,
                profile,
                trials,
                spec.seed,
                &velocity_tag(p.label, label),
            )?;
            s.push(profile.sigma_bar_a, stat.rmse, Some(stat.err));
            heads.push((format!("{}/{label} rmse_m_s", p.label), stat.rmse));
        }
        series.push(s);
    }
    let mut out = finish(cfg, spec, series);
    for (n, v) in heads {
        out.add_headline(n, v);
    }
    Ok(out)
}

fn velocity_tag(path: PathLabel, profile: ProfileLabel) -> String {
    format!("velocity/{path}/{profile}")
}

/// Per-antenna SNR before array gain, dB.
pub fn element_snr(path_snr_db: f64, cfg: &ScenarioConfig) -> f64 {
    path_snr_db - 10.0 * (cfg.num_antennas() as f64).log10()
}

fn beam_training_snapshots<R: Rng + ?Sized>(
    truth: &[Complex64],
    codebook: &BeamCodebook,
    noise_sigma: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Vec<Complex64>>> {
    (0..count)
        .map(|_| {
            let beams = apply_codebook_with(truth, codebook, noise_sigma, rng)?;
            invert_codebook(&beams, codebook)
        })
        .collect()
}

fn wrap_degrees(d: f64) -> f64 {
    (d + 180.0).rem_euclid(360.0) - 180.0
}

/// Squared angular error (d theta^2 + d phi^2) of one beam training.
pub fn aoa_trial<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    path_snr_db: f64,
    snapshots: usize,
    rng: &mut R,
) -> Result<f64> {
    let (rows, cols) = (cfg.array_rows, cfg.array_cols);
    let theta = rng.random_range(AOA_ELEVATION_RANGE.0..AOA_ELEVATION_RANGE.1);
    let phi = rng.random_range(-180.0..180.0);
    let truth = steering_vector_2d(theta, phi, rows, cols);
    let codebook = BeamCodebook::dft(rows * cols);
    let sigma = 10f64.powf(-element_snr(path_snr_db, cfg) / 20.0);
    let snaps = beam_training_snapshots(&truth, &codebook, sigma, snapshots, rng)?;
    let est = estimate_aoa_2d(&snaps, rows, cols)?;
    Ok((est.theta - theta).powi(2) + wrap_degrees(est.phi - phi).powi(2))
}

/// Squared roll error of one beam training.
pub fn roll_trial<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    path_snr_db: f64,
    snapshots: usize,
    rng: &mut R,
) -> Result<f64> {
    let (rows, cols) = (cfg.array_rows, cfg.array_cols);
    let gamma = rng.random_range(ROLL_RANGE.0..ROLL_RANGE.1);
    let truth = steering_vector_roll(gamma, rows, cols);
    let codebook = BeamCodebook::dft(rows * cols);
    let sigma = 10f64.powf(-element_snr(path_snr_db, cfg) / 20.0);
    let snaps = beam_training_snapshots(&truth, &codebook, sigma, snapshots, rng)?;
    Ok((estimate_roll(&snaps, rows, cols)? - gamma).powi(2))
}

fn rmse_from_squared(squared: &[f64], seed: u64, label: &str) -> (f64, f64) {
    let rows: Vec<Vec<f64>> = squared.iter().map(|s| vec![*s]).collect();
    let rmse = (squared.iter().sum::<f64>() / squared.len() as f64).sqrt();
    (
        rmse,
        bootstrap_rmse_std(&rows, BOOTSTRAP_RESAMPLES, seed, label)[0],
    )
}

/// AoA RMSE (degrees) at the AP path SNR, an SNR sweep, and roll RMSE on the
/// roll path. Series `sigma0` and `roll` have x = path SNR (dB).
pub fn run_sigma0(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    let trials = spec.trial_count();
    let layout = build_scenario(spec.variant, cfg);
    let ap_snr = path_snr(&layout.orientation_path, cfg)?;
    let roll_snr = path_snr(&layout.roll_path, cfg)?;

    let run_aoa = |snr: f64, label: &str| -> Result<(f64, f64)> {
        let sq = parallel_trials(spec.seed, label, trials, |r| {
            aoa_trial(cfg, snr, spec.aoa_snapshots, r)
        })?;
        Ok(rmse_from_squared(&sq, spec.seed, label))
    };

    let (sigma0, sigma0_err) = run_aoa(ap_snr, "sigma0/main")?;
    let mut main = Series::new("sigma0");
    main.push(ap_snr, sigma0, Some(sigma0_err));

    let mut sweep = Series::new("sweep");
    for snr in SIGMA0_SWEEP_DB {
        let (r, e) = run_aoa(snr, &format!("sigma0/sweep/{snr}"))?;
        sweep.push(snr, r, Some(e));
    }

    let roll_sq = parallel_trials(spec.seed, "sigma0/roll", trials, |r| {
        roll_trial(cfg, roll_snr, spec.aoa_snapshots, r)
    })?;
    let (roll, roll_err) = rmse_from_squared(&roll_sq, spec.seed, "sigma0/roll");
    let mut roll_series = Series::new("roll");
    roll_series.push(roll_snr, roll, Some(roll_err));

    let mut out = finish(cfg, spec, vec![main, sweep, roll_series]);
    out.add_headline("sigma0_deg", sigma0);
    out.add_headline("roll_rmse_deg", roll);
    Ok(out)
}

/// Per-axis velocity stds for a scenario and profile: simulated on the
/// layout's velocity paths unless `spec.sigma_v` overrides them.
pub fn velocity_stds(
    cfg: &ScenarioConfig,
    spec: &ExperimentSpec,
    profile: ProfileLabel,
) -> Result<[f64; 3]> {
    if let Some(sv) = spec.sigma_v {
        return Ok(sv);
    }
    let layout = build_scenario(spec.variant, cfg);
    let accel = AccelProfile::from_label(profile)?;
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&layout.velocity_paths) {
        let snr = path_snr(p, cfg)?;
        // Same stream as table3 for the same path, so the numbers agree.
        *slot = simulate_velocity_std(
            cfg,
            snr,
            accel,
            VELOCITY_TRIALS,
            spec.seed,
            &velocity_tag(p.label, profile),
        )?
        .rmse;
    }
    Ok(out)
}

fn monte_carlo_series(name: &str, errors: &TrialErrors, seed: u64) -> Series {
    let rmse = errors.rmse();
    let err = bootstrap_rmse_std(&errors.squared, BOOTSTRAP_RESAMPLES, seed, name);
    Series::from_values(name, &errors.times, &rmse, Some(&err))
}

fn max_relative_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / y.abs())
        .fold(0.0, f64::max)
}

/// Time grid of the position error study: 200 points per decade, 10 ms to 10 s.
pub fn fig4_times() -> Vec<f64> {
    log_grid(0.01, 10.0, 200).expect("static grid")
}

/// Time grid of the angle error study: 200 points per decade, 1 s to 1 h.
pub fn fig5_times() -> Vec<f64> {
    log_grid(1.0, 3600.0, 200).expect("static grid")
}

/// Position error curves (m) per profile: closed forms and Monte Carlo for
/// radio and accelerometer tracking, with crossover headlines.
pub fn run_fig4(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    let times = fig4_times();
    let interval = cfg.observation_time();
    let mut series = Vec::new();
    let mut heads = Vec::new();
    for profile in spec.profiles() {
        let sv = velocity_stds(cfg, spec, profile)?;
        let imu = ImuSpec::for_profile(profile, interval)?;
        let mc = MonteCarlo {
            trials: spec.trial_count(),
            seed: rng::splitmix64(spec.seed ^ tag(&profile.to_string())),
            substeps: 16,
        };

        let jcs = ErrorCurve::from_law(&times, "jcs", |t| jcs_position_rmse(sv, interval, t))?;
        let acc = ErrorCurve::from_law(&times, "imu", |t| {
            imu_position_rmse(imu.accel_noise, interval, t)
        })?;
        let jcs_mc = tracking::jcs_position_monte_carlo(sv, interval, &times, &mc)?;
        let acc_mc = tracking::imu_position_monte_carlo(imu.accel_noise, interval, &times, &mc)?;
        let jcs_mc_curve = jcs_mc.curve("jcs_mc")?;
        let acc_mc_curve = acc_mc.curve("imu_mc")?;

        let cross = crossover_time(&jcs, &acc)?;
        let cross_mc = crossover_time(&jcs_mc_curve, &acc_mc_curve)?;
        let dev = max_relative_deviation(&jcs_mc_curve.rmse, &jcs.rmse)
            .max(max_relative_deviation(&acc_mc_curve.rmse, &acc.rmse));

        series.push(Series::from_values(
            format!("{profile}/jcs"),
            &times,
            &jcs.rmse,
            None,
        ));
        series.push(monte_carlo_series(
            &format!("{profile}/jcs_mc"),
            &jcs_mc,
            spec.seed,
        ));
        series.push(Series::from_values(
            format!("{profile}/imu"),
            &times,
            &acc.rmse,
            None,
        ));
        series.push(monte_carlo_series(
            &format!("{profile}/imu_mc"),
            &acc_mc,
            spec.seed,
        ));

        for (axis, s) in ["x", "y", "z"].iter().zip(sv) {
            heads.push((format!("{profile} sigma_v_{axis}_m_s"), s));
        }
        heads.push((format!("{profile} crossover_s"), cross.unwrap_or(f64::NAN)));
        heads.push((
            format!("{profile} crossover_mc_s"),
            cross_mc.unwrap_or(f64::NAN),
        ));
        heads.push((format!("{profile} max_mc_deviation"), dev));
    }
    let mut out = finish(cfg, spec, series);
    for (n, v) in heads {
        out.add_headline(n, v);
    }
    Ok(out)
}

/// Angle error curves (degrees): recalibrated AoA sawtooth and gyroscope
/// drift, closed forms and Monte Carlo.
pub fn run_fig5(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<ResultSet> {
    let times = fig5_times();
    let interval = cfg.observation_time();
    let tb = cfg.beam_training_interval;
    let s0 = spec.sigma0;
    let sg = spec.sigma_g.unwrap_or_else(|| {
        tracking::gyro_noise_for_crossover(s0, interval, tracking::GYRO_CROSSOVER_DEFAULT)
    });
    let mc = MonteCarlo {
        trials: spec.trial_count(),
        seed: rng::splitmix64(spec.seed ^ tag("fig5")),
        substeps: 1,
    };

    let recal = ErrorCurve::from_law(&times, "jcs", |t| {
        recalibrated_angle_rmse(s0, sg, interval, tb, t)
    })?;
    let gyro = ErrorCurve::from_law(&times, "gyro", |t| gyro_angle_rmse(sg, interval, t))?;
    let recal_mc = tracking::recalibrated_angle_monte_carlo(s0, sg, interval, tb, &times, &mc)?;
    let gyro_mc = tracking::gyro_angle_monte_carlo(sg, interval, &times, &mc)?;
    let cross = crossover_time(&recal, &gyro)?;
    let bound = recalibrated_angle_bound(s0, sg, interval, tb);
    let dev = max_relative_deviation(&recal_mc.rmse(), &recal.rmse)
        .max(max_relative_deviation(&gyro_mc.rmse(), &gyro.rmse));

    let mut out = finish(
        cfg,
        spec,
        vec![
            Series::from_values("jcs", &times, &recal.rmse, None),
            monte_carlo_series("jcs_mc", &recal_mc, spec.seed),
            Series::from_values("gyro", &times, &gyro.rmse, None),
            monte_carlo_series("gyro_mc", &gyro_mc, spec.seed),
        ],
    );
    out.add_headline("sigma_g_deg", sg);
    out.add_headline("bound_deg", bound);
    out.add_headline("crossover_s", cross.unwrap_or(f64::NAN));
    out.add_headline("max_mc_deviation", dev);
    Ok(out)
}

/// Paths written for one result.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputPaths {
    pub csv: PathBuf,
    pub json: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub id: ExperimentId,
    pub seed: u64,
    pub trials: usize,
    pub config_hash: String,
    pub wall_time_s: f64,
    pub spec: ExperimentSpec,
    pub csv: String,
    pub config: String,
    pub headline: Vec<Headline>,
}

/// Write `<stem>.csv` and `<stem>.json` into `dir`, then read both back and
/// check them against the in-memory result.
pub fn write_outputs(
    result: &ResultSet,
    cfg: &ScenarioConfig,
    spec: &ExperimentSpec,
    dir: &Path,
    wall_time_s: f64,
) -> Result<OutputPaths> {
    fs::create_dir_all(dir)?;
    let stem = spec.output_stem();
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    let csv_text = result.to_csv_string()?;
    fs::write(&csv, &csv_text)?;
    let sidecar = Sidecar {
        id: result.metadata.id,
        seed: result.metadata.seed,
        trials: result.metadata.trials,
        config_hash: result.metadata.config_hash.clone(),
        wall_time_s,
        spec: spec.clone(),
        csv: format!("{stem}.csv"),
        config: render_config(cfg),
        headline: result.headline.clone(),
    };
    fs::write(&json, serde_json::to_string_pretty(&sidecar)?)?;

    if fs::read_to_string(&csv)? != csv_text {
        return Err(Error::Domain(format!(
            "{} does not match the computed result",
            csv.display()
        )));
    }
    let back: Sidecar = serde_json::from_str(&fs::read_to_string(&json)?)?;
    if back.config_hash != result.metadata.config_hash {
        return Err(Error::Domain(format!(
            "{} has a stale config hash",
            json.display()
        )));
    }
    Ok(OutputPaths { csv, json })
}

//! Kinematics from estimates and error propagation over time.
//!
//! Closed-form RMSE laws for radio (velocity integrated once) and inertial
//! (acceleration integrated twice) position tracking, gyroscope angle drift,
//! and the sawtooth angle error of periodic AoA recalibration. Each law has
//! a Monte Carlo counterpart that integrates white sensor noise numerically.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scenario::{SPEED_OF_LIGHT, STANDARD_GRAVITY};

/// AoA recalibration error in degrees at the reference AP SNR.
pub const SIGMA0_DEFAULT: f64 = 0.4421;

/// Time at which gyroscope drift reaches `SIGMA0_DEFAULT`, seconds.
pub const GYRO_CROSSOVER_DEFAULT: f64 = 1200.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileLabel {
    P1,
    P2,
    Custom,
}

impl fmt::Display for ProfileLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileLabel::P1 => "P1",
            ProfileLabel::P2 => "P2",
            ProfileLabel::Custom => "custom",
        })
    }
}

impl FromStr for ProfileLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(ProfileLabel::P1),
            "P2" => Ok(ProfileLabel::P2),
            other => Err(Error::Config(format!(
                "unknown profile `{other}` (expected P1 or P2)"
            ))),
        }
    }
}

/// Motion intensity: std of the random acceleration drawn per observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccelProfile {
    pub sigma_bar_a: f64,
    pub label: ProfileLabel,
}

impl AccelProfile {
    pub const P1: AccelProfile = AccelProfile {
        sigma_bar_a: 10.0,
        label: ProfileLabel::P1,
    };
    pub const P2: AccelProfile = AccelProfile {
        sigma_bar_a: 40.0,
        label: ProfileLabel::P2,
    };

    pub fn custom(sigma_bar_a: f64) -> Result<Self> {
        if !(sigma_bar_a >= 0.0 && sigma_bar_a.is_finite()) {
            return Err(Error::Domain(format!(
                "acceleration std must be >= 0, got {sigma_bar_a}"
            )));
        }
        Ok(Self {
            sigma_bar_a,
            label: ProfileLabel::Custom,
        })
    }

    pub fn from_label(label: ProfileLabel) -> Result<Self> {
        match label {
            ProfileLabel::P1 => Ok(Self::P1),
            ProfileLabel::P2 => Ok(Self::P2),
            ProfileLabel::Custom => Err(Error::Domain(
                "custom profile needs an explicit value".into(),
            )),
        }
    }
}

/// Inertial sensor noise. `accel_noise` in m/s^2 and `gyro_noise` in degrees
/// are RMS per sample at interval `sample_interval`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSpec {
    pub accel_noise: f64,
    pub gyro_noise: f64,
    pub sample_interval: f64,
}

/// Gyroscope noise that makes drift reach `sigma0` after `crossover` seconds.
pub fn gyro_noise_for_crossover(sigma0: f64, sample_interval: f64, crossover: f64) -> f64 {
    sigma0 / (3.0 * sample_interval * crossover).sqrt()
}

impl ImuSpec {
    pub fn new(accel_noise: f64, gyro_noise: f64, sample_interval: f64) -> Result<Self> {
        for (name, v) in [
            ("accel_noise", accel_noise),
            ("gyro_noise", gyro_noise),
            ("sample_interval", sample_interval),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self {
            accel_noise,
            gyro_noise,
            sample_interval,
        })
    }

    /// Accelerometer noise of the range setting used with each profile:
    /// 2 mg for P1, 3 mg for P2.
    pub fn for_profile(label: ProfileLabel, sample_interval: f64) -> Result<Self> {
        let mg = match label {
            ProfileLabel::P1 => 2.0,
            ProfileLabel::P2 => 3.0,
            ProfileLabel::Custom => {
                return Err(Error::Domain("no IMU preset for a custom profile".into()))
            }
        };
        let gyro =
            gyro_noise_for_crossover(SIGMA0_DEFAULT, sample_interval, GYRO_CROSSOVER_DEFAULT);
        Self::new(mg * 1e-3 * STANDARD_GRAVITY, gyro, sample_interval)
    }
}

/// RMSE of one tracking method over elapsed time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub times: Vec<f64>,
    pub rmse: Vec<f64>,
    pub method: String,
}

impl ErrorCurve {
    pub fn new(times: Vec<f64>, rmse: Vec<f64>, method: impl Into<String>) -> Result<Self> {
        if times.len() != rmse.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                actual: rmse.len(),
            });
        }
        if let Some(bad) = rmse.iter().find(|v| v.is_nan() || **v < 0.0) {
            return Err(Error::Domain(format!(
                "RMSE values must be >= 0, got {bad}"
            )));
        }
        Ok(Self {
            times,
            rmse,
            method: method.into(),
        })
    }

    /// Evaluate `law` on every grid time.
    pub fn from_law<F: Fn(f64) -> Result<f64>>(
        times: &[f64],
        method: &str,
        law: F,
    ) -> Result<Self> {
        let rmse = times.iter().map(|&t| law(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times.to_vec(), rmse, method)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.rmse.windows(2).all(|w| w[1] >= w[0])
    }

    /// Rows of `time,rmse,method` with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "time,rmse,method")?;
        for (t, v) in self.times.iter().zip(&self.rmse) {
            writeln!(out, "{t},{v},{}", self.method)?;
        }
        Ok(())
    }
}

/// Per-axis velocity with the std of each component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityEstimate {
    pub velocity: [f64; 3],
    pub std: [f64; 3],
}

impl VelocityEstimate {
    pub fn new(velocity: [f64; 3], std: [f64; 3]) -> Result<Self> {
        if std.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Domain(format!(
                "velocity stds must be positive, got {std:?}"
            )));
        }
        Ok(Self { velocity, std })
    }
}

/// v = c f_d R_p / f0.
pub fn velocity_from_frequency(f_d: f64, carrier_freq: f64, packet_rate: f64) -> Result<f64> {
    if f_d.is_nan() || f_d.abs() >= 0.5 {
        return Err(Error::Domain(format!(
            "normalized frequency {f_d} outside (-0.5, 0.5)"
        )));
    }
    Ok(SPEED_OF_LIGHT * f_d * packet_rate / carrier_freq)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("elapsed time must be >= 0, got {t}")));
    }
    Ok(())
}

/// sqrt((sx^2 + sy^2 + sz^2) T t).
pub fn jcs_position_rmse(sigma_v: [f64; 3], interval: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    let total: f64 = sigma_v.iter().map(|s| s * s).sum();
    Ok((total * interval * t).sqrt())
}

/// sigma_a sqrt(T) t^(3/2).
pub fn imu_position_rmse(sigma_a: f64, interval: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok(sigma_a * interval.sqrt() * t.powf(1.5))
}

/// sqrt(3 T) sigma_g sqrt(t).
pub fn gyro_angle_rmse(sigma_g: f64, interval: f64, t: f64) -> Result<f64> {
    check_time(t)?;
    Ok((3.0 * interval).sqrt() * sigma_g * t.sqrt())
}

/// Start of the recalibration interval containing `t`. Times within 1e-9
/// (relative) of a boundary count as the start of the next interval.
fn interval_start(t: f64, training_interval: f64) -> f64 {
    let ratio = t / training_interval;
    let nearest = ratio.round();
    let k = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.floor()
    };
    k * training_interval
}

/// sqrt(sigma_0^2 + 3 sigma_g^2 T (t - k T_b)) for t in [k T_b, (k+1) T_b).
pub fn recalibrated_angle_rmse(
    sigma_0: f64,
    sigma_g: f64,
    interval: f64,
    training_interval: f64,
    t: f64,
) -> Result<f64> {
    check_time(t)?;
    if training_interval.is_nan() || training_interval <= 0.0 {
        return Err(Error::Domain(format!(
            "beam training interval must be positive, got {training_interval}"
        )));
    }
    let since = (t - interval_start(t, training_interval)).max(0.0);
    Ok((sigma_0 * sigma_0 + 3.0 * sigma_g * sigma_g * interval * since).sqrt())
}

/// Upper bound of the recalibrated curve.
pub fn recalibrated_angle_bound(
    sigma_0: f64,
    sigma_g: f64,
    interval: f64,
    training_interval: f64,
) -> f64 {
    (sigma_0 * sigma_0 + 3.0 * sigma_g * sigma_g * interval * training_interval).sqrt()
}

/// Earliest grid time from which `a` stays at or below `b`.
pub fn crossover_time(a: &ErrorCurve, b: &ErrorCurve) -> Result<Option<f64>> {
    if a.times.len() != b.times.len()
        || a.times
            .iter()
            .zip(&b.times)
            .any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0))
    {
        return Err(Error::GridMismatch);
    }
    let mut first = None;
    for i in (0..a.len()).rev() {
        if a.rmse[i] <= b.rmse[i] {
            first = Some(i);
        } else {
            break;
        }
    }
    Ok(first.map(|i| a.times[i]))
}

/// Logarithmic grid with `per_decade` points per decade over [start, stop].
pub fn log_grid(start: f64, stop: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && stop > start && per_decade > 0) {
        return Err(Error::Domain(format!(
            "bad log grid [{start}, {stop}] with {per_decade}/decade"
        )));
    }
    let decades = (stop / start).log10();
    let n = (decades * per_decade as f64).round() as usize;
    let (a, b) = (start.log10(), stop.log10());
    Ok((0..=n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / n as f64))
        .collect())
}

/// Shared Monte Carlo settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub trials: usize,
    pub seed: u64,
    /// Integration sub-steps per sample interval for double integration.
    pub substeps: usize,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            substeps: 16,
        }
    }
}

/// Per-trial squared errors, `[trial][grid point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialErrors {
    pub times: Vec<f64>,
    pub squared: Vec<Vec<f64>>,
}

impl TrialErrors {
    pub fn rmse(&self) -> Vec<f64> {
        let n = self.squared.len() as f64;
        (0..self.times.len())
            .map(|g| (self.squared.iter().map(|row| row[g]).sum::<f64>() / n).sqrt())
            .collect()
    }

    pub fn curve(&self, method: &str) -> Result<ErrorCurve> {
        ErrorCurve::new(self.times.clone(), self.rmse(), method)
    }
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain("empty time grid".into()));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
        return Err(Error::Domain(
            "time grid must be non-negative and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn run_trials<F>(mc: &MonteCarlo, tag: u64, times: &[f64], trial: F) -> Result<TrialErrors>
where
    F: Fn(&mut rng::SimRng) -> Vec<f64> + Sync,
{
    check_grid(times)?;
    if mc.trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let squared = (0..mc.trials as u64)
        .into_par_iter()
        .map(|i| trial(&mut rng::trial_stream(mc.seed, tag, i)))
        .collect();
    Ok(TrialErrors {
        times: times.to_vec(),
        squared,
    })
}

/// Random walk with diffusion `rate` per second and independent axes; the
/// squared norm is sampled at each grid time.
fn random_walk<R: rand::Rng + ?Sized>(rng: &mut R, rates: &[f64], times: &[f64]) -> Vec<f64> {
    let mut state = vec![0.0; rates.len()];
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let dt = t - prev;
            for (x, r) in state.iter_mut().zip(rates) {
                *x += rng::gaussian(rng, (r * dt).sqrt());
            }
            prev = t;
            state.iter().map(|x| x * x).sum()
        })
        .collect()
}

/// Position drift from white per-frame velocity errors: each axis has noise
/// density sigma^2 T and is integrated once.
pub fn jcs_position_monte_carlo(
    sigma_v: [f64; 3],
    interval: f64,
    times: &[f64],
    mc: &MonteCarlo,
) -> Result<TrialErrors> {
    let rates: Vec<f64> = sigma_v.iter().map(|s| s * s * interval).collect();
    run_trials(mc, 0x4a43_5350, times, |r| random_walk(r, &rates, times))
}

/// Gyroscope drift, three axes of density sigma_g^2 T integrated once.
pub fn gyro_angle_monte_carlo(
    sigma_g: f64,
    interval: f64,
    times: &[f64],
    mc: &MonteCarlo,
) -> Result<TrialErrors> {
    let rates = vec![sigma_g * sigma_g * interval; 3];
    run_trials(mc, 0x4759_524f, times, |r| random_walk(r, &rates, times))
}

/// Accelerometer dead reckoning: white acceleration noise of density
/// sigma_a^2 T per axis, integrated twice with the trapezoidal rule on
/// sub-steps of at most T / substeps.
pub fn imu_position_monte_carlo(
    sigma_a: f64,
    interval: f64,
    times: &[f64],
    mc: &MonteCarlo,
) -> Result<TrialErrors> {
    let density = sigma_a * sigma_a * interval;
    let h_max = interval / mc.substeps.max(1) as f64;
    run_trials(mc, 0x494d_5550, times, |r| {
        let mut vel = [0.0f64; 3];
        let mut pos = [0.0f64; 3];
        let mut prev = 0.0;
        times
            .iter()
            .map(|&t| {
                let span = t - prev;
                let steps = (span / h_max).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                if h > 0.0 {
                    let std = (density / h).sqrt();
                    for _ in 0..steps {
                        for axis in 0..3 {
                            let old = vel[axis];
                            vel[axis] += rng::gaussian(r, std) * h;
                            pos[axis] += 0.5 * (old + vel[axis]) * h;
                        }
                    }
                }
                prev = t;
                pos.iter().map(|x| x * x).sum()
            })
            .collect()
    })
}

/// Angle error with an AoA reset every `training_interval`: each reset draws
/// a fresh error of total variance sigma_0^2, then gyroscope noise
/// accumulates until the next reset.
pub fn recalibrated_angle_monte_carlo(
    sigma_0: f64,
    sigma_g: f64,
    interval: f64,
    training_interval: f64,
    times: &[f64],
    mc: &MonteCarlo,
) -> Result<TrialErrors> {
    if training_interval.is_nan() || training_interval <= 0.0 {
        return Err(Error::Domain(format!(
            "beam training interval must be positive, got {training_interval}"
        )));
    }
    let rate = sigma_g * sigma_g * interval;
    let reset_std = sigma_0 / 3f64.sqrt();
    run_trials(mc, 0x5245_4341, times, |r| {
        let mut state = [0.0f64; 3];
        let mut current: Option<f64> = None;
        let mut prev = 0.0;
        times
            .iter()
            .map(|&t| {
                let start = interval_start(t, training_interval);
                if current != Some(start) {
                    for x in state.iter_mut() {
                        *x = rng::gaussian(r, reset_std);
                    }
                    current = Some(start);
                    prev = start;
                }
                let dt = (t - prev).max(0.0);
                for x in state.iter_mut() {
                    *x += rng::gaussian(r, (rate * dt).sqrt());
                }
                prev = t;
                state.iter().map(|x| x * x).sum()
            })
            .collect()
    })
}

/// Slope of log(y) against log(x) by least squares.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain("need at least two matching points".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan() || *v <= 0.0) {
        return Err(Error::Domain("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

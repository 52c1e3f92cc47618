//! Room geometry, radio constants and the worst-case link budget.
//!
//! The room is a box with the HMD at its centre. AP1 hangs on the southern
//! wall (y = 0), AP2 or RIS2 on the eastern wall (x = room_x), and RIS1 on
//! the ceiling directly above the user. All three wall/ceiling nodes share
//! the device height except RIS1.
//!
//! Angles are degrees at every public boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Standard gravity, used for mg -> m/s^2 conversion.
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Full parameterization of the environment, radio and timing.
///
/// `Default` yields the reference indoor setup (60 GHz, 4x4 UPA, 4x4x2.8 m room).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub room_x: f64,
    pub room_y: f64,
    pub room_z: f64,
    /// Height of the HMD and of the wall-mounted APs/RIS, m.
    pub device_height: f64,
    /// Carrier frequency f0, Hz.
    pub carrier_freq: f64,
    /// Transmit power, dBm.
    pub tx_power: f64,
    /// Thermal noise power over the channel bandwidth, dBm.
    pub thermal_noise: f64,
    pub noise_figure: f64,
    /// PHY packet rate R_p, packets/s.
    pub packet_rate: f64,
    /// Display refresh rate, Hz. Sets the observation time T = 1/refresh_rate.
    pub refresh_rate: f64,
    /// Beam training interval T_b, s.
    pub beam_training_interval: f64,
    /// Movement bandwidth B_m, Hz.
    pub movement_bandwidth: f64,
    pub array_rows: usize,
    pub array_cols: usize,
    /// Half-power beamwidth of a single HMD antenna element, degrees.
    pub antenna_hpbw: f64,
    /// RIS gain, dB.
    pub ris_gain: f64,
    /// Worst-case azimuth misalignment of the horizontal arrays, degrees.
    pub worst_case_misalignment: f64,
    /// AP1 to RIS2 distance, m. Taken as a listed system parameter rather
    /// than from coordinates (which would give 2*sqrt(2) m).
    pub ap1_ris2_distance: f64,
    /// When set, the AP1-RIS1-HMD path reports this SNR instead of the
    /// geometric link budget.
    pub ris1_snr_override: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            room_x: 4.0,
            room_y: 4.0,
            room_z: 2.8,
            device_height: 1.8,
            carrier_freq: 60e9,
            tx_power: 24.0,
            thermal_noise: -82.0,
            noise_figure: 10.0,
            packet_rate: 5e4,
            refresh_rate: 120.0,
            beam_training_interval: 0.1024,
            movement_bandwidth: 30.0,
            array_rows: 4,
            array_cols: 4,
            antenna_hpbw: 120.0,
            ris_gain: 0.0,
            worst_case_misalignment: 60.0,
            ap1_ris2_distance: 2.8,
            ris1_snr_override: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("room_x", self.room_x),
            ("room_y", self.room_y),
            ("room_z", self.room_z),
            ("device_height", self.device_height),
            ("f0", self.carrier_freq),
            ("R_p", self.packet_rate),
            ("refresh_rate", self.refresh_rate),
            ("T_b", self.beam_training_interval),
            ("B_m", self.movement_bandwidth),
            ("HPBW", self.antenna_hpbw),
            ("d_AP1_RIS2", self.ap1_ris2_distance),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.packet_rate > self.refresh_rate && self.refresh_rate > self.movement_bandwidth) {
            return Err(Error::Config(format!(
                "rates must satisfy R_p > refresh_rate > B_m, got {} / {} / {}",
                self.packet_rate, self.refresh_rate, self.movement_bandwidth
            )));
        }
        if self.array_rows == 0 || self.array_cols == 0 {
            return Err(Error::Config("array dimensions must be at least 1".into()));
        }
        if self.device_height >= self.room_z {
            return Err(Error::Config(
                "device height must be below the ceiling".into(),
            ));
        }
        if self.worst_case_misalignment.abs() > self.antenna_hpbw / 2.0 {
            return Err(Error::Config(format!(
                "misalignment {} deg exceeds half the beamwidth",
                self.worst_case_misalignment
            )));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Observation time for one velocity estimate, s.
    pub fn observation_time(&self) -> f64 {
        1.0 / self.refresh_rate
    }

    pub fn num_antennas(&self) -> usize {
        self.array_rows * self.array_cols
    }

    pub fn hmd_position(&self) -> [f64; 3] {
        [self.room_x / 2.0, self.room_y / 2.0, self.device_height]
    }

    pub fn ap1_position(&self) -> [f64; 3] {
        [self.room_x / 2.0, 0.0, self.device_height]
    }

    /// East-wall node: AP2 in S1, RIS2 in S2.
    pub fn east_node_position(&self) -> [f64; 3] {
        [self.room_x, self.room_y / 2.0, self.device_height]
    }

    pub fn ris1_position(&self) -> [f64; 3] {
        [self.room_x / 2.0, self.room_y / 2.0, self.room_z]
    }
}

/// Motion statistics of XR users, imported as constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityConstants {
    /// deg/s
    pub gyro_rms: f64,
    pub gyro_max: f64,
    /// m/s^2
    pub accel_rms: f64,
    pub accel_max: f64,
}

impl Default for MobilityConstants {
    fn default() -> Self {
        Self {
            gyro_rms: 38.0,
            gyro_max: 261.0,
            accel_rms: 1.8,
            accel_max: 14.0,
        }
    }
}

impl MobilityConstants {
    /// Largest head rotation over one observation window, degrees.
    pub fn max_rotation_over(&self, observation_time: f64) -> f64 {
        self.gyro_max * observation_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PathLabel {
    Ap1Hmd,
    Ap2Hmd,
    Ap1Ris1Hmd,
    Ap1Ris2Hmd,
}

impl fmt::Display for PathLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathLabel::Ap1Hmd => "AP1-HMD",
            PathLabel::Ap2Hmd => "AP2-HMD",
            PathLabel::Ap1Ris1Hmd => "AP1-RIS1-HMD",
            PathLabel::Ap1Ris2Hmd => "AP1-RIS2-HMD",
        })
    }
}

/// One AP (or AP via RIS) to HMD propagation path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationPath {
    pub label: PathLabel,
    /// Meters, one entry per hop.
    pub segment_lengths: Vec<f64>,
    /// Worst-case array misalignment on this path, degrees.
    pub azimuth_offset: f64,
    pub uses_ris: bool,
    pub snr_override: Option<f64>,
}

impl PropagationPath {
    pub fn total_length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    fn validate(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.segment_lengths.is_empty()
            || self.segment_lengths.iter().any(|d| d.is_nan() || *d <= 0.0)
        {
            return Err(Error::Domain(format!(
                "{}: segment lengths must be positive",
                self.label
            )));
        }
        // The cosine pattern is only meaningful inside the half-power beam.
        if self.azimuth_offset.abs() > cfg.antenna_hpbw / 2.0 {
            return Err(Error::Domain(format!(
                "{}: azimuth offset {} deg outside the {} deg beam",
                self.label, self.azimuth_offset, cfg.antenna_hpbw
            )));
        }
        Ok(())
    }
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Receive gain of one UPA: cosine element pattern plus array gain, dB.
pub fn rx_gain(azimuth_offset: f64, rows: usize, cols: usize) -> Result<f64> {
    if rows == 0 || cols == 0 {
        return Err(Error::Domain(
            "array must have at least one row and column".into(),
        ));
    }
    let cos_phi = azimuth_offset.to_radians().cos();
    if !(azimuth_offset.abs() < 90.0 && cos_phi > 0.0) {
        return Err(Error::Domain(format!(
            "cos({azimuth_offset} deg) <= 0, gain undefined"
        )));
    }
    let antenna = 10.0 * (std::f64::consts::PI * cos_phi).log10();
    let array = 10.0 * ((rows * cols) as f64).log10();
    Ok(antenna + array)
}

/// Free-space path loss 20 log10(4 pi d / lambda), dB.
pub fn free_space_path_loss(distance: f64, carrier_freq: f64) -> Result<f64> {
    if distance.is_nan() || distance <= 0.0 {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    if carrier_freq.is_nan() || carrier_freq <= 0.0 {
        return Err(Error::Domain(format!(
            "carrier frequency must be positive, got {carrier_freq}"
        )));
    }
    let lambda = SPEED_OF_LIGHT / carrier_freq;
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance / lambda).log10())
}

/// Worst-case SNR of a path, dB.
pub fn path_snr(path: &PropagationPath, cfg: &ScenarioConfig) -> Result<f64> {
    path.validate(cfg)?;
    if let Some(snr) = path.snr_override {
        return Ok(snr);
    }
    let gain = rx_gain(path.azimuth_offset, cfg.array_rows, cfg.array_cols)?;
    let ris = if path.uses_ris { cfg.ris_gain } else { 0.0 };
    let loss = free_space_path_loss(path.total_length(), cfg.carrier_freq)?;
    Ok(cfg.tx_power + gain + ris - loss - cfg.thermal_noise - cfg.noise_figure)
}

/// Construct one of the four paths from the configured geometry.
pub fn path(label: PathLabel, cfg: &ScenarioConfig) -> PropagationPath {
    let hmd = cfg.hmd_position();
    let misaligned = cfg.worst_case_misalignment;
    match label {
        PathLabel::Ap1Hmd => PropagationPath {
            label,
            segment_lengths: vec![distance(cfg.ap1_position(), hmd)],
            azimuth_offset: misaligned,
            uses_ris: false,
            snr_override: None,
        },
        PathLabel::Ap2Hmd => PropagationPath {
            label,
            segment_lengths: vec![distance(cfg.east_node_position(), hmd)],
            azimuth_offset: misaligned,
            uses_ris: false,
            snr_override: None,
        },
        // The top-headband array faces RIS1 at boresight.
        PathLabel::Ap1Ris1Hmd => PropagationPath {
            label,
            segment_lengths: vec![
                distance(cfg.ap1_position(), cfg.ris1_position()),
                distance(cfg.ris1_position(), hmd),
            ],
            azimuth_offset: 0.0,
            uses_ris: true,
            snr_override: cfg.ris1_snr_override,
        },
        PathLabel::Ap1Ris2Hmd => PropagationPath {
            label,
            segment_lengths: vec![
                cfg.ap1_ris2_distance,
                distance(cfg.east_node_position(), hmd),
            ],
            azimuth_offset: misaligned,
            uses_ris: true,
            snr_override: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioVariant {
    /// Two APs and one RIS.
    S1,
    /// One AP and two RISs.
    S2,
}

impl fmt::Display for ScenarioVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScenarioVariant::S1 => "S1",
            ScenarioVariant::S2 => "S2",
        })
    }
}

impl FromStr for ScenarioVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "S1" => Ok(ScenarioVariant::S1),
            "S2" => Ok(ScenarioVariant::S2),
            other => Err(Error::Config(format!(
                "unknown scenario `{other}` (expected S1 or S2)"
            ))),
        }
    }
}

/// Which path feeds each velocity axis and each orientation estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioLayout {
    pub variant: ScenarioVariant,
    /// x, y, z velocity sources.
    pub velocity_paths: [PropagationPath; 3],
    /// Azimuth/elevation source.
    pub orientation_path: PropagationPath,
    pub roll_path: PropagationPath,
}

impl ScenarioLayout {
    pub fn velocity_snrs(&self, cfg: &ScenarioConfig) -> Result<[f64; 3]> {
        let [x, y, z] = &self.velocity_paths;
        Ok([path_snr(x, cfg)?, path_snr(y, cfg)?, path_snr(z, cfg)?])
    }
}

pub fn build_scenario(variant: ScenarioVariant, cfg: &ScenarioConfig) -> ScenarioLayout {
    let east = match variant {
        ScenarioVariant::S1 => PathLabel::Ap2Hmd,
        ScenarioVariant::S2 => PathLabel::Ap1Ris2Hmd,
    };
    ScenarioLayout {
        variant,
        velocity_paths: [
            path(PathLabel::Ap1Hmd, cfg),
            path(east, cfg),
            path(PathLabel::Ap1Ris1Hmd, cfg),
        ],
        orientation_path: path(PathLabel::Ap1Hmd, cfg),
        roll_path: path(east, cfg),
    }
}

/// The three distinct worst-case paths, in table order.
pub fn reference_paths(cfg: &ScenarioConfig) -> Vec<PropagationPath> {
    [
        PathLabel::Ap1Hmd,
        PathLabel::Ap1Ris1Hmd,
        PathLabel::Ap1Ris2Hmd,
    ]
    .into_iter()
    .map(|label| path(label, cfg))
    .collect()
}

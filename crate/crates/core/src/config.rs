//! Flat `key = value` configuration files.
//!
//! ```text
//! # 60 GHz reference room
//! f0   = 60e9
//! P_TX = 24
//! R_p  = 50000
//! ```
//!
//! Keys follow the usual symbol names of the system parameter table. Any
//! key that is missing keeps its default and is reported back so callers
//! can show which substitutions were made.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// Every recognised key with a short description and unit.
pub const KEYS: &[(&str, &str)] = &[
    ("room_x", "room length along x, m"),
    ("room_y", "room length along y, m"),
    ("room_z", "ceiling height, m"),
    ("height", "HMD / AP / RIS2 height, m"),
    ("f0", "carrier frequency, Hz"),
    ("P_TX", "transmit power, dBm"),
    ("P_N", "thermal noise power, dBm"),
    ("NF", "noise figure, dB"),
    ("R_p", "PHY packet rate, packets/s"),
    ("refresh_rate", "display refresh rate, Hz"),
    ("T_b", "beam training interval, s"),
    ("B_m", "movement bandwidth, Hz"),
    ("M", "array rows"),
    ("N", "array columns"),
    ("HPBW", "antenna half-power beamwidth, deg"),
    ("G_RIS", "RIS gain, dB"),
    ("phi_worst", "worst-case azimuth misalignment, deg"),
    ("d_AP1_RIS2", "AP1 to RIS2 distance, m"),
    (
        "snr_override_ris1",
        "forced SNR of the AP1-RIS1-HMD path, dB",
    ),
];

/// A key that was not present in the file and kept its default.
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultedKey {
    pub key: &'static str,
    pub value: String,
}

impl fmt::Display for DefaultedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} missing, using default {}", self.key, self.value)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub defaulted: Vec<DefaultedKey>,
}

fn format_default(key: &str, cfg: &ScenarioConfig) -> String {
    match key {
        "room_x" => format!("{} m", cfg.room_x),
        "room_y" => format!("{} m", cfg.room_y),
        "room_z" => format!("{} m", cfg.room_z),
        "height" => format!("{} m", cfg.device_height),
        "f0" => format!("{} GHz", cfg.carrier_freq / 1e9),
        "P_TX" => format!("{} dBm", cfg.tx_power),
        "P_N" => format!("{} dBm", cfg.thermal_noise),
        "NF" => format!("{} dB", cfg.noise_figure),
        "R_p" => format!("{} pkt/s", cfg.packet_rate),
        "refresh_rate" => format!("{} Hz", cfg.refresh_rate),
        "T_b" => format!("{} s", cfg.beam_training_interval),
        "B_m" => format!("{} Hz", cfg.movement_bandwidth),
        "M" => cfg.array_rows.to_string(),
        "N" => cfg.array_cols.to_string(),
        "HPBW" => format!("{} deg", cfg.antenna_hpbw),
        "G_RIS" => format!("{} dB", cfg.ris_gain),
        "phi_worst" => format!("{} deg", cfg.worst_case_misalignment),
        "d_AP1_RIS2" => format!("{} m", cfg.ap1_ris2_distance),
        "snr_override_ris1" => match cfg.ris1_snr_override {
            Some(v) => format!("{v} dB"),
            None => "none (geometric link budget)".into(),
        },
        _ => String::new(),
    }
}

fn parse_f64(line: usize, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| Error::ConfigParse {
        line,
        message: format!("`{key}` expects a number, got `{raw}`"),
    })
}

fn parse_count(line: usize, key: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| Error::ConfigParse {
        line,
        message: format!("`{key}` expects a positive integer, got `{raw}`"),
    })
}

fn apply(cfg: &mut ScenarioConfig, line: usize, key: &str, raw: &str) -> Result<()> {
    match key {
        "room_x" => cfg.room_x = parse_f64(line, key, raw)?,
        "room_y" => cfg.room_y = parse_f64(line, key, raw)?,
        "room_z" => cfg.room_z = parse_f64(line, key, raw)?,
        "height" => cfg.device_height = parse_f64(line, key, raw)?,
        "f0" => cfg.carrier_freq = parse_f64(line, key, raw)?,
        "P_TX" => cfg.tx_power = parse_f64(line, key, raw)?,
        "P_N" => cfg.thermal_noise = parse_f64(line, key, raw)?,
        "NF" => cfg.noise_figure = parse_f64(line, key, raw)?,
        "R_p" => cfg.packet_rate = parse_f64(line, key, raw)?,
        "refresh_rate" => cfg.refresh_rate = parse_f64(line, key, raw)?,
        "T_b" => cfg.beam_training_interval = parse_f64(line, key, raw)?,
        "B_m" => cfg.movement_bandwidth = parse_f64(line, key, raw)?,
        "M" => cfg.array_rows = parse_count(line, key, raw)?,
        "N" => cfg.array_cols = parse_count(line, key, raw)?,
        "HPBW" => cfg.antenna_hpbw = parse_f64(line, key, raw)?,
        "G_RIS" => cfg.ris_gain = parse_f64(line, key, raw)?,
        "phi_worst" => cfg.worst_case_misalignment = parse_f64(line, key, raw)?,
        "d_AP1_RIS2" => cfg.ap1_ris2_distance = parse_f64(line, key, raw)?,
        "snr_override_ris1" => {
            cfg.ris1_snr_override = match raw {
                "none" | "" => None,
                _ => Some(parse_f64(line, key, raw)?),
            }
        }
        _ => {
            return Err(Error::ConfigParse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
    }
    Ok(())
}

/// Parse configuration text. The result is validated.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut seen: Vec<&'static str> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: line_no,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let value = value.trim();
        let canonical = KEYS
            .iter()
            .map(|(k, _)| *k)
            .find(|k| *k == key)
            .ok_or_else(|| Error::ConfigParse {
                line: line_no,
                message: format!("unknown key `{key}`"),
            })?;
        if seen.contains(&canonical) {
            return Err(Error::ConfigParse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        apply(&mut cfg, line_no, canonical, value)?;
        seen.push(canonical);
    }
    cfg.validate()?;
    let defaulted = KEYS
        .iter()
        .filter(|(k, _)| !seen.contains(k))
        .map(|(k, _)| DefaultedKey {
            key: k,
            value: format_default(k, &cfg),
        })
        .collect();
    Ok(LoadedConfig {
        config: cfg,
        defaulted,
    })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

/// Render a configuration in the same format `parse_config` reads.
pub fn render_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: String| out.push_str(&format!("{key} = {value}\n"));
    push("room_x", cfg.room_x.to_string());
    push("room_y", cfg.room_y.to_string());
    push("room_z", cfg.room_z.to_string());
    push("height", cfg.device_height.to_string());
    push("f0", cfg.carrier_freq.to_string());
    push("P_TX", cfg.tx_power.to_string());
    push("P_N", cfg.thermal_noise.to_string());
    push("NF", cfg.noise_figure.to_string());
    push("R_p", cfg.packet_rate.to_string());
    push("refresh_rate", cfg.refresh_rate.to_string());
    push("T_b", cfg.beam_training_interval.to_string());
    push("B_m", cfg.movement_bandwidth.to_string());
    push("M", cfg.array_rows.to_string());
    push("N", cfg.array_cols.to_string());
    push("HPBW", cfg.antenna_hpbw.to_string());
    push("G_RIS", cfg.ris_gain.to_string());
    push("phi_worst", cfg.worst_case_misalignment.to_string());
    push("d_AP1_RIS2", cfg.ap1_ris2_distance.to_string());
    push(
        "snr_override_ris1",
        cfg.ris1_snr_override
            .map_or_else(|| "none".to_string(), |v| v.to_string()),
    );
    out
}

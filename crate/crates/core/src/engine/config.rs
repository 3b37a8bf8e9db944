//! Experiment configuration: a flat `key = value` text format.
//!
//! The format is deliberately primitive so that sweep-generated files diff
//! cleanly. Every key is listed in [`CONFIG_KEYS`]; unknown keys are schema
//! errors. `#` starts a comment, blank lines are ignored.

use std::path::Path;

use glam::DVec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sensor::{DeploymentModel, SensorModel};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown config key: {0}")]
    UnknownKey(String),
    #[error("bad value for {key}: {msg}")]
    BadValue { key: String, msg: String },
    #[error("missing required config key: {0}")]
    MissingKey(&'static str),
    #[error("duration must be positive")]
    InvalidDuration,
    #[error("tick interval must be positive")]
    InvalidTick,
    #[error("max speed must be positive")]
    InvalidSpeed,
    #[error("bus drop probability must lie in [0, 1]")]
    InvalidDropProbability,
    #[error("transport=udp requires an explicit net.broadcast_addr (there is no default)")]
    MissingBroadcastAddr,
    #[error("deterministic mode requires transport=bus")]
    DeterministicNeedsBus,
    #[error("invalid sensor model: {0}")]
    Sensor(#[from] crate::sensor::SensorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    WallClock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Children act only on beacons from an already-localized anchor,
    /// producing a level-by-level top-down wave.
    Cascade,
    /// Children act on every anchor beacon.
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransportKind {
    Bus,
    Udp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusParams {
    pub latency_us_min: u64,
    pub latency_us_max: u64,
    pub drop_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetParams {
    pub bind_addr: String,
    /// No default on purpose: an unscoped UDP broadcast floods the segment.
    pub broadcast_addr: Option<String>,
    pub port: u16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Path to the plan JSON file.
    pub plan: String,
    pub mode: Mode,
    pub policy: Policy,
    pub duration_s: f64,
    pub tick_interval_ms: u64,
    /// Maximum drone speed in m/s; corrections are clamped to
    /// `max_speed × tick_interval` per tick.
    pub max_speed: f64,
    pub seed: u64,
    pub out_dir: String,
    pub deploy: DeploymentModel,
    pub sensor: SensorModel,
    pub transport: TransportKind,
    pub bus: BusParams,
    pub net: NetParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            plan: String::new(),
            mode: Mode::Deterministic,
            policy: Policy::Continuous,
            duration_s: 60.0,
            tick_interval_ms: 100,
            max_speed: 1.0,
            seed: 0,
            out_dir: String::new(),
            deploy: DeploymentModel {
                dispatcher: DVec3::ZERO,
                alpha_deg: 10.0,
            },
            sensor: SensorModel::default(),
            transport: TransportKind::Bus,
            bus: BusParams {
                latency_us_min: 0,
                latency_us_max: 0,
                drop_probability: 0.0,
            },
            net: NetParams {
                bind_addr: "0.0.0.0".to_string(),
                broadcast_addr: None,
                port: 7400,
            },
        }
    }
}

/// Every key the config schema knows, in canonical file order.
pub const CONFIG_KEYS: &[&str] = &[
    "plan",
    "mode",
    "policy",
    "duration_s",
    "tick_interval_ms",
    "max_speed",
    "seed",
    "out_dir",
    "deploy.dispatcher",
    "deploy.alpha_deg",
    "sensor.range_blind",
    "sensor.range_sweet_max",
    "sensor.range_max",
    "sensor.err_sweet",
    "sensor.err_decay_slope",
    "transport",
    "bus.latency_us_min",
    "bus.latency_us_max",
    "bus.drop_probability",
    "net.bind_addr",
    "net.broadcast_addr",
    "net.port",
];

impl ExperimentConfig {
    pub fn from_str_cfg(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Parse {
                    line: lineno + 1,
                    msg: format!("expected `key = value`, got {raw:?}"),
                });
            };
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_str_cfg(&std::fs::read_to_string(path)?)
    }

    /// Applies one `key = value` pair; the schema entry point for both the
    /// parser and sweep overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |msg: &str| ConfigError::BadValue {
            key: key.to_string(),
            msg: msg.to_string(),
        };
        match key {
            "plan" => self.plan = value.to_string(),
            "mode" => {
                self.mode = match value {
                    "deterministic" => Mode::Deterministic,
                    "wallclock" => Mode::WallClock,
                    _ => return Err(bad("expected deterministic | wallclock")),
                }
            }
            "policy" => {
                self.policy = match value {
                    "cascade" => Policy::Cascade,
                    "continuous" => Policy::Continuous,
                    _ => return Err(bad("expected cascade | continuous")),
                }
            }
            "duration_s" => self.duration_s = parse_num(key, value)?,
            "tick_interval_ms" => self.tick_interval_ms = parse_num(key, value)?,
            "max_speed" => self.max_speed = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out_dir" => self.out_dir = value.to_string(),
            "deploy.dispatcher" => self.deploy.dispatcher = parse_vec3(key, value)?,
            "deploy.alpha_deg" => self.deploy.alpha_deg = parse_num(key, value)?,
            "sensor.range_blind" => self.sensor.range_blind = parse_num(key, value)?,
            "sensor.range_sweet_max" => self.sensor.range_sweet_max = parse_num(key, value)?,
            "sensor.range_max" => self.sensor.range_max = parse_num(key, value)?,
            "sensor.err_sweet" => self.sensor.err_sweet = parse_num(key, value)?,
            "sensor.err_decay_slope" => self.sensor.err_decay_slope = parse_num(key, value)?,
            "transport" => {
                self.transport = match value {
                    "bus" => TransportKind::Bus,
                    "udp" => TransportKind::Udp,
                    _ => return Err(bad("expected bus | udp")),
                }
            }
            "bus.latency_us_min" => self.bus.latency_us_min = parse_num(key, value)?,
            "bus.latency_us_max" => self.bus.latency_us_max = parse_num(key, value)?,
            "bus.drop_probability" => self.bus.drop_probability = parse_num(key, value)?,
            "net.bind_addr" => self.net.bind_addr = value.to_string(),
            "net.broadcast_addr" => {
                self.net.broadcast_addr = if value.is_empty() {
                    None
                } else {
                    Some(value.to_string())
                }
            }
            "net.port" => self.net.port = parse_num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Reads a key back in its file representation.
    pub fn get(&self, key: &str) -> Option<String> {
        let v = match key {
            "plan" => self.plan.clone(),
            "mode" => match self.mode {
                Mode::Deterministic => "deterministic".into(),
                Mode::WallClock => "wallclock".into(),
            },
            "policy" => match self.policy {
                Policy::Cascade => "cascade".into(),
                Policy::Continuous => "continuous".into(),
            },
            "duration_s" => trim_float(self.duration_s),
            "tick_interval_ms" => self.tick_interval_ms.to_string(),
            "max_speed" => trim_float(self.max_speed),
            "seed" => self.seed.to_string(),
            "out_dir" => self.out_dir.clone(),
            "deploy.dispatcher" => format!(
                "{},{},{}",
                trim_float(self.deploy.dispatcher.x),
                trim_float(self.deploy.dispatcher.y),
                trim_float(self.deploy.dispatcher.z)
            ),
            "deploy.alpha_deg" => trim_float(self.deploy.alpha_deg),
            "sensor.range_blind" => trim_float(self.sensor.range_blind),
            "sensor.range_sweet_max" => trim_float(self.sensor.range_sweet_max),
            "sensor.range_max" => trim_float(self.sensor.range_max),
            "sensor.err_sweet" => trim_float(self.sensor.err_sweet),
            "sensor.err_decay_slope" => trim_float(self.sensor.err_decay_slope),
            "transport" => match self.transport {
                TransportKind::Bus => "bus".into(),
                TransportKind::Udp => "udp".into(),
            },
            "bus.latency_us_min" => self.bus.latency_us_min.to_string(),
            "bus.latency_us_max" => self.bus.latency_us_max.to_string(),
            "bus.drop_probability" => trim_float(self.bus.drop_probability),
            "net.bind_addr" => self.net.bind_addr.clone(),
            "net.broadcast_addr" => self.net.broadcast_addr.clone().unwrap_or_default(),
            "net.port" => self.net.port.to_string(),
            _ => return None,
        };
        Some(v)
    }

    /// Canonical file rendering: every key, fixed order.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in CONFIG_KEYS {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&self.get(key).expect("all schema keys are gettable"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_config_string())?;
        Ok(())
    }

    /// Value-level validation; path existence is checked by the run itself.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.duration_s <= 0.0 {
            return Err(ConfigError::InvalidDuration);
        }
        if self.tick_interval_ms == 0 {
            return Err(ConfigError::InvalidTick);
        }
        if self.max_speed <= 0.0 {
            return Err(ConfigError::InvalidSpeed);
        }
        if !(0.0..=1.0).contains(&self.bus.drop_probability) {
            return Err(ConfigError::InvalidDropProbability);
        }
        self.sensor.validate()?;
        if self.transport == TransportKind::Udp {
            if self.mode == Mode::Deterministic {
                return Err(ConfigError::DeterministicNeedsBus);
            }
            if self.net.broadcast_addr.is_none() {
                return Err(ConfigError::MissingBroadcastAddr);
            }
        }
        Ok(())
    }

    pub fn tick_us(&self) -> u64 {
        self.tick_interval_ms * 1000
    }

    pub fn duration_us(&self) -> u64 {
        (self.duration_s * 1e6).round() as u64
    }

    pub fn tick_seconds(&self) -> f64 {
        self.tick_interval_ms as f64 / 1000.0
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        msg: format!("cannot parse {value:?}"),
    })
}

fn parse_vec3(key: &str, value: &str) -> Result<DVec3, ConfigError> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(ConfigError::BadValue {
            key: key.to_string(),
            msg: "expected x,y,z".to_string(),
        });
    }
    Ok(DVec3::new(
        parse_num(key, parts[0])?,
        parse_num(key, parts[1])?,
        parse_num(key, parts[2])?,
    ))
}

/// Shortest decimal rendering that still parses back exactly.
fn trim_float(x: f64) -> String {
    let s = format!("{x}");
    debug_assert_eq!(s.parse::<f64>().unwrap(), x);
    s
}

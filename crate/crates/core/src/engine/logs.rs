//! Run logs: per-drone trajectories and message records plus the manifest.
//!
//! On disk a results directory holds `fls_<id>_trajectory.csv` (header
//! `t,x,y,z`), `fls_<id>_messages.csv` (header `t,dir,kind,peer,bytes`),
//! `orchestrator_messages.csv`, `manifest.json`, and a copy of the plan. A
//! run is produced once and analyzed many times, so everything round-trips.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use glam::DVec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::ExperimentConfig;
use crate::fmt::{secs_us, sig9};
use crate::protocol::MessageKind;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("results directory {0} has no manifest.json (incomplete run)")]
    IncompleteRun(String),
    #[error("log parse error in {file} line {line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t_us: u64,
    pub position: DVec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Sent,
    Received,
}

impl Direction {
    fn name(&self) -> &'static str {
        match self {
            Direction::Sent => "sent",
            Direction::Received => "received",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "sent" => Some(Direction::Sent),
            "received" => Some(Direction::Received),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageRecord {
    pub t_us: u64,
    pub direction: Direction,
    pub kind: MessageKind,
    /// The message's sender id: the counterpart for received records, the
    /// logging drone itself for sent records.
    pub peer: u32,
    pub bytes: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub messages_sent: u64,
    pub messages_received: u64,
    pub messages_dropped: u64,
    pub malformed_frames: u64,
    pub corrections_applied: u64,
    pub ticks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub fls_count: usize,
    pub bright_count: usize,
    pub dark_count: usize,
    pub counters: Counters,
    pub wall_time_s: f64,
    pub failed: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLogs {
    pub manifest: RunManifest,
    pub trajectories: BTreeMap<u32, Vec<TrajectorySample>>,
    pub messages: BTreeMap<u32, Vec<MessageRecord>>,
    pub orchestrator_messages: Vec<MessageRecord>,
}

impl RunLogs {
    pub fn final_position(&self, fls_id: u32) -> Option<DVec3> {
        self.trajectories.get(&fls_id)?.last().map(|s| s.position)
    }

    /// Most recent logged position at or before `t_us`.
    pub fn position_at(&self, fls_id: u32, t_us: u64) -> Option<DVec3> {
        let traj = self.trajectories.get(&fls_id)?;
        let idx = traj.partition_point(|s| s.t_us <= t_us);
        if idx == 0 {
            None
        } else {
            Some(traj[idx - 1].position)
        }
    }

    pub fn save(&self, dir: &Path) -> Result<(), LogError> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest)? + "\n",
        )?;
        for (&id, traj) in &self.trajectories {
            let mut csv = String::from("t,x,y,z\n");
            for s in traj {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    secs_us(s.t_us),
                    sig9(s.position.x),
                    sig9(s.position.y),
                    sig9(s.position.z)
                );
            }
            std::fs::write(dir.join(format!("fls_{id}_trajectory.csv")), csv)?;
        }
        for (&id, records) in &self.messages {
            std::fs::write(
                dir.join(format!("fls_{id}_messages.csv")),
                message_csv(records),
            )?;
        }
        std::fs::write(
            dir.join("orchestrator_messages.csv"),
            message_csv(&self.orchestrator_messages),
        )?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, LogError> {
        let manifest_path = dir.join("manifest.json");
        if !manifest_path.exists() {
            return Err(LogError::IncompleteRun(dir.display().to_string()));
        }
        let manifest: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;

        let mut trajectories = BTreeMap::new();
        let mut messages = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
                continue;
            };
            if let Some(id) = parse_fls_file(name, "_trajectory.csv") {
                trajectories.insert(id, load_trajectory(&path)?);
            } else if let Some(id) = parse_fls_file(name, "_messages.csv") {
                messages.insert(id, load_messages(&path)?);
            }
        }
        let orch_path = dir.join("orchestrator_messages.csv");
        let orchestrator_messages = if orch_path.exists() {
            load_messages(&orch_path)?
        } else {
            Vec::new()
        };
        Ok(Self {
            manifest,
            trajectories,
            messages,
            orchestrator_messages,
        })
    }
}

fn parse_fls_file(name: &str, suffix: &str) -> Option<u32> {
    name.strip_prefix("fls_")?.strip_suffix(suffix)?.parse().ok()
}

fn message_csv(records: &[MessageRecord]) -> String {
    let mut csv = String::from("t,dir,kind,peer,bytes\n");
    for r in records {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            secs_us(r.t_us),
            r.direction.name(),
            r.kind.name(),
            r.peer,
            r.bytes
        );
    }
    csv
}

fn parse_t_us(field: &str) -> Option<u64> {
    let secs: f64 = field.parse().ok()?;
    Some((secs * 1e6).round() as u64)
}

fn load_trajectory(path: &Path) -> Result<Vec<TrajectorySample>, LogError> {
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, msg: &str| LogError::Parse {
        file: path.display().to_string(),
        line,
        msg: msg.to_string(),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(err(i + 1, "expected t,x,y,z"));
        }
        let t_us = parse_t_us(fields[0]).ok_or_else(|| err(i + 1, "bad timestamp"))?;
        let coord = |s: &str| s.parse::<f64>().ok();
        let (Some(x), Some(y), Some(z)) = (coord(fields[1]), coord(fields[2]), coord(fields[3]))
        else {
            return Err(err(i + 1, "bad coordinate"));
        };
        out.push(TrajectorySample {
            t_us,
            position: DVec3::new(x, y, z),
        });
    }
    Ok(out)
}

fn load_messages(path: &Path) -> Result<Vec<MessageRecord>, LogError> {
    let text = std::fs::read_to_string(path)?;
    let err = |line: usize, msg: &str| LogError::Parse {
        file: path.display().to_string(),
        line,
        msg: msg.to_string(),
    };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(err(i + 1, "expected t,dir,kind,peer,bytes"));
        }
        let t_us = parse_t_us(fields[0]).ok_or_else(|| err(i + 1, "bad timestamp"))?;
        let direction = Direction::parse(fields[1]).ok_or_else(|| err(i + 1, "bad direction"))?;
        let kind = parse_kind(fields[2]).ok_or_else(|| err(i + 1, "bad kind"))?;
        let peer = fields[3].parse().map_err(|_| err(i + 1, "bad peer"))?;
        let bytes = fields[4].parse().map_err(|_| err(i + 1, "bad bytes"))?;
        out.push(MessageRecord {
            t_us,
            direction,
            kind,
            peer,
            bytes,
        });
    }
    Ok(out)
}

fn parse_kind(s: &str) -> Option<MessageKind> {
    match s {
        "anchor_beacon" => Some(MessageKind::AnchorBeacon),
        "location_update" => Some(MessageKind::LocationUpdate),
        "correction" => Some(MessageKind::Correction),
        "terminate" => Some(MessageKind::Terminate),
        _ => None,
    }
}

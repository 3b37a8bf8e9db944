//! Online decentralized localization.
//!
//! Every drone is deployed by dead reckoning (so the initial formation is a
//! distorted copy of the shape) and then runs the same state machine: each
//! tick it broadcasts an anchor beacon, and whenever it holds a fresh beacon
//! from its own anchor it measures the relative offset with the camera model
//! and moves by `desired_rel − measured_rel`, clamped to its maximum speed.
//! Drones with no anchor are the formation datum: they are placed exactly,
//! start localized, and never move.
//!
//! Two execution modes share that state machine. The deterministic mode is a
//! single-threaded event loop over simulated time with the seeded bus, and
//! reproduces byte-identical logs for a fixed seed. The wall-clock mode runs
//! one worker thread per drone against real time (bus or UDP transport) and
//! intentionally keeps the scheduling nondeterminism of a real deployment.

pub mod config;
pub mod logs;
mod workers;

use std::collections::HashMap;
use std::path::Path;
use std::time::Instant;

use glam::DVec3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::planner::{load_plan, save_plan, validate_plan, FlsAssignment, Plan, PlanError};
use crate::protocol::{
    BusConfig, BusEndpoint, Message, MessageKind, SharedBus, Transport, TransportError,
    ORCHESTRATOR_ID,
};
use crate::sensor::{dead_reckon, measure_relative, SensorError, SensorModel};

pub use config::{ConfigError, ExperimentConfig, Mode, Policy, TransportKind};
pub use logs::{Counters, Direction, LogError, MessageRecord, RunLogs, RunManifest, TrajectorySample};

/// Distinguishes the bus rng stream from the per-drone streams, which use
/// `seed ^ fls_id` (fls ids never exceed u32).
const BUS_SEED_TAG: u64 = 0x0B05 << 32;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Latest beacon seen from the anchor: its reported position (present only
/// when the anchor considers itself localized) and the arrival time.
#[derive(Debug, Clone, Copy)]
struct AnchorReport {
    position: Option<DVec3>,
    #[allow(dead_code)] // kept for log analysis / debugging parity
    timestamp_us: u64,
}

/// Per-drone runtime state shared by both execution modes.
struct FlsRuntime {
    assignment: FlsAssignment,
    /// `gt(self) − gt(anchor)`; absent for the datum drone.
    desired_rel: Option<DVec3>,
    localized: bool,
    /// Latest unconsumed beacon from this drone's anchor.
    anchor_last_seen: Option<AnchorReport>,
    terminated: bool,
    rng: ChaCha8Rng,
    corrections: u64,
    traj: Vec<TrajectorySample>,
    msgs: Vec<MessageRecord>,
}

impl FlsRuntime {
    /// Records relevant messages (from the anchor, from children, or a
    /// terminate) and keeps the freshest anchor beacon for the next step.
    fn process_inbox(&mut self, inbox: Vec<(Message, u64)>) {
        for (msg, arrival_us) in inbox {
            let from_anchor = Some(msg.sender_id) == self.assignment.anchor_id;
            let relevant = from_anchor
                || msg.kind == MessageKind::Terminate
                || self
                    .assignment
                    .children_ids
                    .binary_search(&msg.sender_id)
                    .is_ok();
            if !relevant {
                continue;
            }
            self.msgs.push(MessageRecord {
                t_us: arrival_us,
                direction: Direction::Received,
                kind: msg.kind,
                peer: msg.sender_id,
                bytes: msg.encoded_len(),
            });
            if msg.kind == MessageKind::Terminate {
                self.terminated = true;
            }
            if from_anchor && msg.kind == MessageKind::AnchorBeacon {
                self.anchor_last_seen = Some(AnchorReport {
                    position: msg.vectors().first().copied(),
                    timestamp_us: arrival_us,
                });
            }
        }
    }

    /// Consumes the pending beacon and, policy permitting, measures the
    /// anchor and computes the clamped correction. Returns the new position.
    /// A blind or out-of-range measurement simply skips the tick.
    fn try_correct(
        &mut self,
        my_pos: DVec3,
        anchor_pos: DVec3,
        sensor: &SensorModel,
        policy: Policy,
        max_step: f64,
    ) -> Option<DVec3> {
        let report = self.anchor_last_seen.take()?;
        if policy == Policy::Cascade && report.position.is_none() {
            // The anchor has not localized yet; wait for the wave.
            return None;
        }
        let desired_rel = self.desired_rel?;
        let true_rel = my_pos - anchor_pos;
        let measured_rel = measure_relative(true_rel, sensor, &mut self.rng)?;
        self.localized = true;
        self.corrections += 1;
        let mut delta = desired_rel - measured_rel;
        let len = delta.length();
        if len > max_step {
            delta *= max_step / len;
        }
        Some(my_pos + delta)
    }

    fn record_sent(&mut self, msg: &Message) {
        self.msgs.push(MessageRecord {
            t_us: msg.timestamp_us,
            direction: Direction::Sent,
            kind: msg.kind,
            peer: msg.sender_id,
            bytes: msg.encoded_len(),
        });
    }
}

/// Builds the per-drone runtimes: datum drones (no anchor) are placed
/// exactly at ground truth and start localized; everything else arrives via
/// dead reckoning with the configured angular error.
fn deploy(
    cfg: &ExperimentConfig,
    assignments: &[FlsAssignment],
) -> Result<(Vec<FlsRuntime>, Vec<DVec3>), EngineError> {
    let mut flss = Vec::with_capacity(assignments.len());
    let mut positions = Vec::with_capacity(assignments.len());
    let index: HashMap<u32, usize> = assignments
        .iter()
        .enumerate()
        .map(|(i, a)| (a.fls_id, i))
        .collect();

    for a in assignments {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ a.fls_id as u64);
        let is_root = a.anchor_id.is_none();
        let position = if is_root {
            a.ground_truth_location
        } else {
            dead_reckon(a.ground_truth_location, &cfg.deploy, &mut rng)?
        };
        let desired_rel = a.anchor_id.map(|anchor| {
            let anchor_gt = assignments[index[&anchor]].ground_truth_location;
            a.ground_truth_location - anchor_gt
        });
        positions.push(position);
        flss.push(FlsRuntime {
            assignment: a.clone(),
            desired_rel,
            localized: is_root,
            anchor_last_seen: None,
            terminated: false,
            rng,
            corrections: 0,
            traj: vec![TrajectorySample {
                t_us: 0,
                position,
            }],
            msgs: Vec::new(),
        });
    }
    Ok((flss, positions))
}

/// Deterministic simulation state: a global event loop over simulated time,
/// processing drones in id order each tick with bus-transport deliveries.
pub struct World {
    cfg: ExperimentConfig,
    flss: Vec<FlsRuntime>,
    positions: Vec<DVec3>,
    anchor_idx: Vec<Option<usize>>,
    bus: SharedBus,
    endpoints: Vec<BusEndpoint>,
    orchestrator_msgs: Vec<MessageRecord>,
    now_us: u64,
    ticks: u64,
    bright_count: usize,
}

impl World {
    pub fn new(cfg: ExperimentConfig, plan: &Plan) -> Result<Self, EngineError> {
        cfg.validate()?;
        if cfg.mode != Mode::Deterministic {
            // The world stepper is the deterministic substrate; wall-clock
            // runs go through `run_with_plan`.
            return Err(ConfigError::BadValue {
                key: "mode".into(),
                msg: "the world stepper runs deterministic mode only".into(),
            }
            .into());
        }
        validate_plan(plan)?;

        let mut assignments = plan.assignments.clone();
        assignments.sort_by_key(|a| a.fls_id);
        let index: HashMap<u32, usize> = assignments
            .iter()
            .enumerate()
            .map(|(i, a)| (a.fls_id, i))
            .collect();
        let anchor_idx = assignments
            .iter()
            .map(|a| a.anchor_id.map(|id| index[&id]))
            .collect();

        let bus = SharedBus::new(BusConfig {
            latency_us: (cfg.bus.latency_us_min, cfg.bus.latency_us_max),
            drop_probability: cfg.bus.drop_probability,
            seed: cfg.seed ^ BUS_SEED_TAG,
        })?;
        let endpoints = assignments.iter().map(|a| bus.endpoint(a.fls_id)).collect();

        let bright_count = assignments.iter().filter(|a| !a.is_dark).count();
        let (flss, positions) = deploy(&cfg, &assignments)?;
        Ok(Self {
            cfg,
            flss,
            positions,
            anchor_idx,
            bus,
            endpoints,
            orchestrator_msgs: Vec::new(),
            now_us: 0,
            ticks: 0,
            bright_count,
        })
    }

    pub fn now_us(&self) -> u64 {
        self.now_us
    }

    pub fn positions(&self) -> &[DVec3] {
        &self.positions
    }

    pub fn assignments(&self) -> impl Iterator<Item = &FlsAssignment> {
        self.flss.iter().map(|f| &f.assignment)
    }

    /// Current positions of the bright drones only (the set the distance
    /// metrics compare against the shape).
    pub fn bright_positions(&self) -> Vec<DVec3> {
        self.flss
            .iter()
            .zip(&self.positions)
            .filter(|(f, _)| !f.assignment.is_dark)
            .map(|(_, &p)| p)
            .collect()
    }

    pub fn localized_count(&self) -> usize {
        self.flss.iter().filter(|f| f.localized).count()
    }

    /// Advances simulated time by one tick: drain + correct in id order,
    /// then broadcast in id order. Messages sent this tick are drained no
    /// earlier than the next tick.
    #[allow(clippy::needless_range_loop)] // index walks several parallel vecs
    pub fn step_tick(&mut self) -> Result<(), EngineError> {
        self.now_us += self.cfg.tick_us();
        self.ticks += 1;
        let now = self.now_us;
        let max_step = self.cfg.max_speed * self.cfg.tick_seconds();

        let mut updates: Vec<Option<Message>> = vec![None; self.flss.len()];
        for i in 0..self.flss.len() {
            let inbox = self.endpoints[i].drain(now);
            let fls = &mut self.flss[i];
            fls.process_inbox(inbox);
            if let Some(anchor_idx) = self.anchor_idx[i] {
                let anchor_pos = self.positions[anchor_idx];
                let my_pos = self.positions[i];
                if let Some(new_pos) =
                    fls.try_correct(my_pos, anchor_pos, &self.cfg.sensor, self.cfg.policy, max_step)
                {
                    self.positions[i] = new_pos;
                    updates[i] = Some(Message::location_update(
                        fls.assignment.fls_id,
                        fls.assignment.swarm_id,
                        now,
                        new_pos,
                    ));
                }
            }
            fls.traj.push(TrajectorySample {
                t_us: now,
                position: self.positions[i],
            });
        }

        for i in 0..self.flss.len() {
            if let Some(update) = updates[i].take() {
                self.endpoints[i].broadcast(&update, now)?;
                self.flss[i].record_sent(&update);
            }
            let fls = &self.flss[i];
            let beacon = Message::beacon(
                fls.assignment.fls_id,
                fls.assignment.swarm_id,
                now,
                fls.localized.then_some(self.positions[i]),
            );
            self.endpoints[i].broadcast(&beacon, now)?;
            self.flss[i].record_sent(&beacon);
        }
        Ok(())
    }

    /// Runs the configured duration, then broadcasts the orchestrator's
    /// terminate signal and lets every drone log it.
    pub fn run_to_end(&mut self) -> Result<(), EngineError> {
        let total_ticks = self.cfg.duration_us() / self.cfg.tick_us();
        for _ in 0..total_ticks {
            self.step_tick()?;
        }
        let t_end = self.cfg.duration_us();
        let terminate = Message::terminate(t_end);
        self.bus.inject_control(&terminate, t_end);
        self.orchestrator_msgs.push(MessageRecord {
            t_us: t_end,
            direction: Direction::Sent,
            kind: MessageKind::Terminate,
            peer: ORCHESTRATOR_ID,
            bytes: terminate.encoded_len(),
        });
        for i in 0..self.flss.len() {
            let inbox = self.endpoints[i].drain(t_end);
            self.flss[i].process_inbox(inbox);
        }
        Ok(())
    }

    fn into_logs(self, wall_time_s: f64) -> RunLogs {
        let mut counters = Counters {
            messages_dropped: self.bus.dropped(),
            ticks: self.ticks,
            ..Counters::default()
        };
        let fls_count = self.flss.len();
        let mut trajectories = std::collections::BTreeMap::new();
        let mut messages = std::collections::BTreeMap::new();
        for fls in self.flss {
            counters.corrections_applied += fls.corrections;
            counters.messages_sent += fls
                .msgs
                .iter()
                .filter(|m| m.direction == Direction::Sent)
                .count() as u64;
            counters.messages_received += fls
                .msgs
                .iter()
                .filter(|m| m.direction == Direction::Received)
                .count() as u64;
            trajectories.insert(fls.assignment.fls_id, fls.traj);
            messages.insert(fls.assignment.fls_id, fls.msgs);
        }
        counters.messages_sent += self.orchestrator_msgs.len() as u64;
        RunLogs {
            manifest: RunManifest {
                config: self.cfg,
                fls_count,
                bright_count: self.bright_count,
                dark_count: fls_count - self.bright_count,
                counters,
                wall_time_s,
                failed: false,
                failure: None,
            },
            trajectories,
            messages,
            orchestrator_messages: self.orchestrator_msgs,
        }
    }
}

/// Loads the plan named by the config and builds the initial world state.
pub fn init_experiment(cfg: &ExperimentConfig) -> Result<World, EngineError> {
    if cfg.plan.is_empty() {
        return Err(ConfigError::MissingKey("plan").into());
    }
    let plan = load_plan(Path::new(&cfg.plan))?;
    World::new(cfg.clone(), &plan)
}

/// Executes a run entirely in memory (nothing is written to disk).
pub fn run_with_plan(cfg: &ExperimentConfig, plan: &Plan) -> Result<RunLogs, EngineError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Deterministic => {
            let started = Instant::now();
            let mut world = World::new(cfg.clone(), plan)?;
            world.run_to_end()?;
            Ok(world.into_logs(started.elapsed().as_secs_f64()))
        }
        Mode::WallClock => workers::run_wallclock(cfg, plan),
    }
}

/// Full run: loads the plan, executes, and flushes logs plus a plan copy to
/// the output directory.
pub fn run(cfg: &ExperimentConfig) -> Result<RunLogs, EngineError> {
    if cfg.plan.is_empty() {
        return Err(ConfigError::MissingKey("plan").into());
    }
    if cfg.out_dir.is_empty() {
        return Err(ConfigError::MissingKey("out_dir").into());
    }
    let plan = load_plan(Path::new(&cfg.plan))?;
    let logs = run_with_plan(cfg, &plan)?;
    let out = Path::new(&cfg.out_dir);
    logs.save(out)?;
    save_plan(&plan, &out.join("plan.json"))?;
    Ok(logs)
}

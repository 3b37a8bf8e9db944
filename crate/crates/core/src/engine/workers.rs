//! Wall-clock execution: one worker thread per drone against real time.
//!
//! This mode reproduces the scheduling nondeterminism of a real multi-process
//! deployment, so it is exempt from the byte-identity guarantees of the
//! deterministic loop. Workers share only the transport and the position
//! oracle; the orchestrator signals termination with a Terminate broadcast
//! plus a hard deadline, and a worker panic marks the run failed in the
//! manifest instead of tearing the whole experiment down.

use std::collections::BTreeMap;
use std::net::{IpAddr, SocketAddr};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use glam::DVec3;

use super::config::{ExperimentConfig, Policy, TransportKind};
use super::logs::{Counters, Direction, MessageRecord, RunLogs, RunManifest, TrajectorySample};
use super::{deploy, EngineError, FlsRuntime};
use crate::planner::Plan;
use crate::protocol::{
    BusConfig, Message, MessageKind, SharedBus, Transport, UdpTransport, ORCHESTRATOR_ID,
};
use crate::sensor::SensorModel;

/// Workers get this long past the nominal duration before giving up on the
/// terminate broadcast.
const GRACE: Duration = Duration::from_secs(2);

struct WorkerOutput {
    fls_id: u32,
    traj: Vec<TrajectorySample>,
    msgs: Vec<MessageRecord>,
    corrections: u64,
    malformed: u64,
}

#[allow(clippy::too_many_arguments)]
fn worker_loop(
    idx: usize,
    mut fls: FlsRuntime,
    start_pos: DVec3,
    anchor_idx: Option<usize>,
    positions: Arc<Vec<Mutex<DVec3>>>,
    mut transport: Box<dyn Transport>,
    sensor: SensorModel,
    policy: Policy,
    max_step: f64,
    tick: Duration,
    deadline_us: u64,
    started: Instant,
) -> WorkerOutput {
    let mut my_pos = start_pos;
    let mut next_tick = tick;
    loop {
        let elapsed = started.elapsed();
        if elapsed < next_tick {
            std::thread::sleep(next_tick - elapsed);
        }
        let now_us = started.elapsed().as_micros() as u64;

        fls.process_inbox(transport.drain(now_us));
        if !fls.terminated {
            if let Some(anchor_idx) = anchor_idx {
                let anchor_pos = *positions[anchor_idx].lock().unwrap();
                if let Some(new_pos) =
                    fls.try_correct(my_pos, anchor_pos, &sensor, policy, max_step)
                {
                    my_pos = new_pos;
                    *positions[idx].lock().unwrap() = new_pos;
                    let update = Message::location_update(
                        fls.assignment.fls_id,
                        fls.assignment.swarm_id,
                        now_us,
                        new_pos,
                    );
                    let _ = transport.broadcast(&update, now_us);
                    fls.record_sent(&update);
                }
            }
            fls.traj.push(TrajectorySample {
                t_us: now_us,
                position: my_pos,
            });
            let beacon = Message::beacon(
                fls.assignment.fls_id,
                fls.assignment.swarm_id,
                now_us,
                fls.localized.then_some(my_pos),
            );
            let _ = transport.broadcast(&beacon, now_us);
            fls.record_sent(&beacon);
        }

        if fls.terminated || now_us >= deadline_us {
            break;
        }
        next_tick += tick;
    }
    WorkerOutput {
        fls_id: fls.assignment.fls_id,
        traj: fls.traj,
        msgs: fls.msgs,
        corrections: fls.corrections,
        malformed: transport.malformed_frames(),
    }
}

pub(super) fn run_wallclock(cfg: &ExperimentConfig, plan: &Plan) -> Result<RunLogs, EngineError> {
    let mut assignments = plan.assignments.clone();
    assignments.sort_by_key(|a| a.fls_id);
    let n = assignments.len();
    let index: std::collections::HashMap<u32, usize> = assignments
        .iter()
        .enumerate()
        .map(|(i, a)| (a.fls_id, i))
        .collect();
    let anchor_idx: Vec<Option<usize>> = assignments
        .iter()
        .map(|a| a.anchor_id.map(|id| index[&id]))
        .collect();
    let bright_count = assignments.iter().filter(|a| !a.is_dark).count();

    let (flss, start_positions) = deploy(cfg, &assignments)?;
    let positions: Arc<Vec<Mutex<DVec3>>> =
        Arc::new(start_positions.iter().map(|&p| Mutex::new(p)).collect());

    // Transport per drone, plus one for the orchestrator's terminate.
    let bus = SharedBus::new(BusConfig {
        latency_us: (cfg.bus.latency_us_min, cfg.bus.latency_us_max),
        drop_probability: cfg.bus.drop_probability,
        seed: cfg.seed ^ super::BUS_SEED_TAG,
    })?;
    let mut transports: Vec<Box<dyn Transport>> = Vec::with_capacity(n);
    match cfg.transport {
        TransportKind::Bus => {
            for a in &assignments {
                transports.push(Box::new(bus.endpoint(a.fls_id)));
            }
        }
        TransportKind::Udp => {
            // Each in-process drone binds base port + index and fans out to
            // its peers; on a LAN with one drone per host the same scheme
            // holds with the configured broadcast address.
            let bind: IpAddr = cfg.net.bind_addr.parse().map_err(|_| {
                super::ConfigError::BadValue {
                    key: "net.bind_addr".into(),
                    msg: format!("not an ip address: {}", cfg.net.bind_addr),
                }
            })?;
            let target: IpAddr = cfg
                .net
                .broadcast_addr
                .as_deref()
                .ok_or(super::ConfigError::MissingBroadcastAddr)?
                .parse()
                .map_err(|_| super::ConfigError::BadValue {
                    key: "net.broadcast_addr".into(),
                    msg: "not an ip address".into(),
                })?;
            let port_of = |i: usize| cfg.net.port + i as u16;
            for (i, a) in assignments.iter().enumerate() {
                let peers: Vec<SocketAddr> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| SocketAddr::new(target, port_of(j)))
                    .collect();
                transports.push(Box::new(UdpTransport::fanout_transport(
                    bind,
                    port_of(i),
                    peers,
                    a.fls_id,
                )?));
            }
        }
    }

    let started = Instant::now();
    let duration = Duration::from_secs_f64(cfg.duration_s);
    let deadline_us = (duration + GRACE).as_micros() as u64;
    let tick = Duration::from_millis(cfg.tick_interval_ms);
    let max_step = cfg.max_speed * cfg.tick_seconds();

    let mut handles = Vec::with_capacity(n);
    for (i, (fls, transport)) in flss.into_iter().zip(transports).enumerate() {
        let positions = Arc::clone(&positions);
        let start_pos = *positions[i].lock().unwrap();
        let anchor = anchor_idx[i];
        let sensor = cfg.sensor;
        let policy = cfg.policy;
        let handle = std::thread::Builder::new()
            .name(format!("fls-{}", fls.assignment.fls_id))
            .spawn(move || {
                worker_loop(
                    i, fls, start_pos, anchor, positions, transport, sensor, policy, max_step,
                    tick, deadline_us, started,
                )
            })
            .expect("spawn worker thread");
        handles.push(handle);
    }

    // Orchestrator: enforce the duration, then signal termination.
    std::thread::sleep(duration);
    let t_end = started.elapsed().as_micros() as u64;
    let terminate = Message::terminate(t_end);
    let mut orchestrator_messages = Vec::new();
    match cfg.transport {
        TransportKind::Bus => bus.inject_control(&terminate, t_end),
        TransportKind::Udp => {
            let bind: IpAddr = cfg.net.bind_addr.parse().expect("validated above");
            let target: IpAddr = cfg
                .net
                .broadcast_addr
                .as_deref()
                .expect("validated above")
                .parse()
                .expect("validated above");
            let peers: Vec<SocketAddr> = (0..n)
                .map(|j| SocketAddr::new(target, cfg.net.port + j as u16))
                .collect();
            let mut orch = UdpTransport::fanout_transport(
                bind,
                cfg.net.port + n as u16,
                peers,
                ORCHESTRATOR_ID,
            )?;
            let _ = orch.broadcast(&terminate, t_end);
        }
    }
    orchestrator_messages.push(MessageRecord {
        t_us: t_end,
        direction: Direction::Sent,
        kind: MessageKind::Terminate,
        peer: ORCHESTRATOR_ID,
        bytes: terminate.encoded_len(),
    });

    let mut counters = Counters {
        ticks: (cfg.duration_us() / cfg.tick_us()),
        messages_sent: orchestrator_messages.len() as u64,
        ..Counters::default()
    };
    let mut trajectories = BTreeMap::new();
    let mut messages = BTreeMap::new();
    let mut failed = false;
    let mut failure = None;
    for handle in handles {
        match handle.join() {
            Ok(out) => {
                counters.corrections_applied += out.corrections;
                counters.malformed_frames += out.malformed;
                counters.messages_sent += out
                    .msgs
                    .iter()
                    .filter(|m| m.direction == Direction::Sent)
                    .count() as u64;
                counters.messages_received += out
                    .msgs
                    .iter()
                    .filter(|m| m.direction == Direction::Received)
                    .count() as u64;
                trajectories.insert(out.fls_id, out.traj);
                messages.insert(out.fls_id, out.msgs);
            }
            Err(panic) => {
                failed = true;
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "worker panicked".to_string());
                failure = Some(msg);
            }
        }
    }
    counters.messages_dropped = bus.dropped();

    Ok(RunLogs {
        manifest: RunManifest {
            config: cfg.clone(),
            fls_count: n,
            bright_count,
            dark_count: n - bright_count,
            counters,
            wall_time_s: started.elapsed().as_secs_f64(),
            failed,
            failure,
        },
        trajectories,
        messages,
        orchestrator_messages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Mode;
    use crate::mesh::grid_point_cloud;
    use crate::planner::{plan as make_plan, FlsSpec};

    fn small_plan() -> Plan {
        let cloud = grid_point_cloud(2, 2, 0.5);
        make_plan(
            &cloud,
            FlsSpec {
                radius: 0.02,
                range_min: 0.05,
                range_max: 0.6,
            },
            4,
            0,
            "grid",
        )
        .unwrap()
    }

    fn wallclock_cfg() -> ExperimentConfig {
        let mut cfg = ExperimentConfig {
            mode: Mode::WallClock,
            duration_s: 1.0,
            tick_interval_ms: 50,
            max_speed: 5.0,
            seed: 3,
            ..ExperimentConfig::default()
        };
        cfg.deploy.dispatcher = DVec3::new(0.25, 0.25, -5.0);
        cfg
    }

    #[test]
    fn wallclock_bus_run_completes_and_converges() {
        let plan = small_plan();
        let logs = crate::engine::run_with_plan(&wallclock_cfg(), &plan).unwrap();
        assert!(!logs.manifest.failed);
        assert_eq!(logs.trajectories.len(), 4);
        // Every drone logged at least the initial sample plus some ticks and
        // saw the terminate.
        for traj in logs.trajectories.values() {
            assert!(traj.len() > 2);
            assert!(traj.windows(2).all(|w| w[0].t_us < w[1].t_us));
        }
        let gt: Vec<DVec3> = plan
            .assignments
            .iter()
            .map(|a| a.ground_truth_location)
            .collect();
        let initial: Vec<DVec3> = (0..4)
            .map(|id| logs.trajectories[&id][0].position)
            .collect();
        let final_pos: Vec<DVec3> = (0..4)
            .map(|id| logs.final_position(id).unwrap())
            .collect();
        let h = |pts: &Vec<DVec3>| crate::metrics::hausdorff(pts, &gt).unwrap();
        assert!(h(&final_pos) < h(&initial));
    }

    #[test]
    fn wallclock_udp_run_on_loopback() {
        let plan = small_plan();
        let mut cfg = wallclock_cfg();
        cfg.transport = TransportKind::Udp;
        cfg.net.bind_addr = "127.0.0.1".into();
        cfg.net.broadcast_addr = Some("127.0.0.1".into());
        cfg.net.port = 47800;
        let logs = crate::engine::run_with_plan(&cfg, &plan).unwrap();
        assert!(!logs.manifest.failed);
        assert_eq!(logs.manifest.counters.malformed_frames, 0);
        assert!(logs.manifest.counters.messages_received > 0);
    }
}

//! Acceptance suite: the project's exit criteria, one test per criterion,
//! each printing a PASS/FAIL line (run with `--nocapture` to see them).
//!
//! 1. Convergence headline: 4×4 grid, 10° deployment error, dispatcher 10 m
//!    below the formation, default sensor — Hausdorff below 1 cm within 10
//!    simulated seconds and staying below for the rest of a 60 s run, on at
//!    least 18 of 20 seeds, each run under 60 s wall time.
//! 2. Planner speed: a 1,400-point Poisson cloud planned with G=25 in under
//!    2 s, globally connected, every anchor edge inside the camera range.
//! 3. Determinism: identical config+seed ⇒ byte-identical trajectory logs,
//!    message logs and plan files.
//! 4. Metric oracle equivalence: Hausdorff/Chamfer match a naive all-pairs
//!    brute force to 1e-12 on 200 random pairs; identity and symmetry exact.
//! 5. Dead-reckoning bound: 10,000 draws at α=10° stay within the angular
//!    bound, preserve distance to 1e-9, and the max chord approaches
//!    2d·sin(α/2) within 2%.
//! 6. Sensor blind range: no measurement below 0.05 m, measurement at
//!    exactly 0.05 m.
//! 7. Exact convergence: zero noise, zero loss, cascade policy on a depth-4
//!    chain — every drone within 1e-6 m of its desired relative offset.
//! 8. Scale check: wall-clock mode with 100 drones completes a 30 s run,
//!    improves the Hausdorff distance, and writes fully decodable logs.

use std::time::Instant;

use glam::DVec3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use swarmloc_core::engine::{
    run, run_with_plan, ExperimentConfig, Mode, Policy, RunLogs,
};
use swarmloc_core::mesh::{grid_point_cloud, poisson_disk_sample, PointCloud, TriangleMesh};
use swarmloc_core::metrics::{chamfer, hausdorff, metrics_series};
use swarmloc_core::planner::{plan, save_plan, FlsSpec, Plan};
use swarmloc_core::sensor::{
    dead_reckon, measure_relative, DeploymentModel, SensorModel,
};

const CONVERGENCE_THRESHOLD_M: f64 = 0.01;
const CONVERGENCE_DEADLINE_S: f64 = 10.0;
const CONVERGENCE_MIN_SEEDS: usize = 18;
const PLANNER_BUDGET_S: f64 = 2.0;
const METRIC_ORACLE_TOL: f64 = 1e-12;
const CHORD_APPROACH_FRACTION: f64 = 0.98;
const EXACT_CONVERGENCE_TOL_M: f64 = 1e-6;

fn report(criterion: &str, pass: bool, detail: &str) -> bool {
    println!(
        "acceptance {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn default_spec() -> FlsSpec {
    FlsSpec {
        radius: 0.02,
        range_min: 0.05,
        range_max: 0.6,
    }
}

fn grid_plan(rows: usize, cols: usize, spacing: f64) -> (PointCloud, Plan) {
    let cloud = grid_point_cloud(rows, cols, spacing);
    let plan = plan(&cloud, default_spec(), rows * cols, 0, "grid").unwrap();
    (cloud, plan)
}

#[test]
fn criterion_1_convergence_headline() {
    let (cloud, plan) = grid_plan(4, 4, 0.5);
    let mut passing_seeds = 0;
    let mut worst_wall = 0.0f64;
    let mut monotone_all = true;
    for seed in 0..20u64 {
        let mut cfg = ExperimentConfig {
            duration_s: 60.0,
            tick_interval_ms: 5,
            max_speed: 0.25,
            policy: Policy::Continuous,
            seed,
            ..ExperimentConfig::default()
        };
        cfg.deploy.alpha_deg = 10.0;
        cfg.deploy.dispatcher = DVec3::new(0.75, 0.75, -10.0);

        let started = Instant::now();
        let logs = run_with_plan(&cfg, &plan).unwrap();
        let wall = started.elapsed().as_secs_f64();
        worst_wall = worst_wall.max(wall);

        let series = metrics_series(&logs, &cloud, 0.5).unwrap();
        let crossing = series
            .samples
            .iter()
            .find(|s| s.hausdorff < CONVERGENCE_THRESHOLD_M)
            .map(|s| s.t_s);
        let ok = match crossing {
            Some(t) if t <= CONVERGENCE_DEADLINE_S => series
                .samples
                .iter()
                .filter(|s| s.t_s >= t)
                .all(|s| s.hausdorff < CONVERGENCE_THRESHOLD_M),
            _ => false,
        };
        if ok {
            passing_seeds += 1;
        }
        monotone_all &=
            series.final_sample().unwrap().hausdorff < series.samples[0].hausdorff;
    }

    let pass =
        passing_seeds >= CONVERGENCE_MIN_SEEDS && worst_wall < 60.0 && monotone_all;
    let detail = format!(
        "{passing_seeds}/20 seeds below {CONVERGENCE_THRESHOLD_M} m within \
         {CONVERGENCE_DEADLINE_S} s and staying below; final < initial on all seeds: \
         {monotone_all}; worst wall time {worst_wall:.1} s"
    );
    assert!(report("1 (convergence headline)", pass, &detail), "{detail}");
}

/// 2 m × 2 m × 2 m cube (24 m² of surface), enough room for 1,400
/// well-separated samples above the 0.05 m blind range.
fn cube_mesh(side: f64) -> TriangleMesh {
    let s = side;
    let v = vec![
        DVec3::new(0.0, 0.0, 0.0),
        DVec3::new(s, 0.0, 0.0),
        DVec3::new(s, s, 0.0),
        DVec3::new(0.0, s, 0.0),
        DVec3::new(0.0, 0.0, s),
        DVec3::new(s, 0.0, s),
        DVec3::new(s, s, s),
        DVec3::new(0.0, s, s),
    ];
    let f = vec![
        [0, 1, 2],
        [0, 2, 3],
        [4, 6, 5],
        [4, 7, 6],
        [0, 5, 1],
        [0, 4, 5],
        [1, 6, 2],
        [1, 5, 6],
        [2, 7, 3],
        [2, 6, 7],
        [3, 4, 0],
        [3, 7, 4],
    ];
    TriangleMesh::new(v, f).unwrap()
}

#[test]
fn criterion_2_planner_speed_and_connectivity() {
    let mesh = cube_mesh(2.0);
    let cloud = poisson_disk_sample(&mesh, 1400, 11).unwrap();
    let spec = FlsSpec {
        radius: 0.02,
        range_min: 0.05,
        range_max: 3.0,
    };

    let started = Instant::now();
    let planned = plan(&cloud, spec, 25, 11, "cube").unwrap();
    let elapsed = started.elapsed().as_secs_f64();

    // Global anchor graph connected: exactly one root and every anchor
    // chain reaches it.
    let index: std::collections::HashMap<u32, usize> = planned
        .assignments
        .iter()
        .enumerate()
        .map(|(i, a)| (a.fls_id, i))
        .collect();
    let roots: Vec<u32> = planned
        .assignments
        .iter()
        .filter(|a| a.anchor_id.is_none())
        .map(|a| a.fls_id)
        .collect();
    let mut connected = roots.len() == 1;
    let mut edges_in_range = true;
    for a in &planned.assignments {
        let mut cur = a;
        let mut steps = 0;
        while let Some(anchor) = cur.anchor_id {
            let anchor = &planned.assignments[index[&anchor]];
            let edge = cur
                .ground_truth_location
                .distance(anchor.ground_truth_location);
            if !(spec.range_min - 1e-9..=spec.range_max + 1e-9).contains(&edge) {
                edges_in_range = false;
            }
            cur = anchor;
            steps += 1;
            if steps > planned.assignments.len() {
                connected = false;
                break;
            }
        }
        if cur.fls_id != roots[0] {
            connected = false;
        }
    }

    let pass = elapsed < PLANNER_BUDGET_S && connected && edges_in_range;
    let detail = format!(
        "planned {} bright + {} dark drones in {elapsed:.3} s (budget {PLANNER_BUDGET_S} s); \
         connected: {connected}; all edges within [{}, {}] m: {edges_in_range}",
        planned.bright_count(),
        planned.dark_count(),
        spec.range_min,
        spec.range_max
    );
    assert!(report("2 (planner speed)", pass, &detail), "{detail}");
}

#[test]
fn criterion_3_byte_identical_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (_, plan) = grid_plan(4, 4, 0.5);
    let plan_path = dir.path().join("plan.json");
    save_plan(&plan, &plan_path).unwrap();

    let run_once = |out: &std::path::Path| {
        let mut cfg = ExperimentConfig {
            plan: plan_path.display().to_string(),
            out_dir: out.display().to_string(),
            duration_s: 2.0,
            tick_interval_ms: 20,
            max_speed: 0.5,
            seed: 1234,
            ..ExperimentConfig::default()
        };
        cfg.deploy.dispatcher = DVec3::new(0.75, 0.75, -10.0);
        run(&cfg).unwrap();
    };
    let r1 = dir.path().join("r1");
    let r2 = dir.path().join("r2");
    run_once(&r1);
    run_once(&r2);

    let mut names: Vec<String> = std::fs::read_dir(&r1)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json") // records wall time
        .collect();
    names.sort();
    let mut identical = true;
    for name in &names {
        if std::fs::read(r1.join(name)).unwrap() != std::fs::read(r2.join(name)).unwrap() {
            identical = false;
            println!("  differs: {name}");
        }
    }
    let pass = identical && names.len() > 30;
    let detail = format!("{} files byte-compared, identical: {identical}", names.len());
    assert!(report("3 (determinism)", pass, &detail), "{detail}");
}

fn naive_directed(a: &[DVec3], b: &[DVec3]) -> f64 {
    let mut worst = 0.0f64;
    for p in a {
        let mut nearest = f64::INFINITY;
        for q in b {
            let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2)).sqrt();
            if d < nearest {
                nearest = d;
            }
        }
        if nearest > worst {
            worst = nearest;
        }
    }
    worst
}

fn naive_hausdorff(a: &[DVec3], b: &[DVec3]) -> f64 {
    naive_directed(a, b).max(naive_directed(b, a))
}

fn naive_chamfer(a: &[DVec3], b: &[DVec3]) -> f64 {
    let mean = |from: &[DVec3], to: &[DVec3]| {
        let mut total = 0.0;
        for p in from {
            let mut nearest = f64::INFINITY;
            for q in to {
                let d =
                    ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2)).sqrt();
                if d < nearest {
                    nearest = d;
                }
            }
            total += nearest;
        }
        total / from.len() as f64
    };
    0.5 * (mean(a, b) + mean(b, a))
}

#[test]
fn criterion_4_metric_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let random_set = |rng: &mut ChaCha8Rng| {
        let n = rng.random_range(1..=64);
        (0..n)
            .map(|_| {
                DVec3::new(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                )
            })
            .collect::<Vec<_>>()
    };

    let mut max_h_err = 0.0f64;
    let mut max_c_err = 0.0f64;
    let mut symmetric = true;
    let mut identity = true;
    for _ in 0..200 {
        let a = random_set(&mut rng);
        let b = random_set(&mut rng);
        let h = hausdorff(&a, &b).unwrap();
        let c = chamfer(&a, &b).unwrap();
        max_h_err = max_h_err.max((h - naive_hausdorff(&a, &b)).abs());
        max_c_err = max_c_err.max((c - naive_chamfer(&a, &b)).abs());
        symmetric &= h == hausdorff(&b, &a).unwrap();
        symmetric &= c == chamfer(&b, &a).unwrap();
        identity &= hausdorff(&a, &a).unwrap() == 0.0;
    }

    let pass = max_h_err <= METRIC_ORACLE_TOL
        && max_c_err <= METRIC_ORACLE_TOL
        && symmetric
        && identity;
    let detail = format!(
        "200 pairs: max |hausdorff − oracle| {max_h_err:.2e}, max |chamfer − oracle| \
         {max_c_err:.2e} (tol {METRIC_ORACLE_TOL:.0e}); symmetric: {symmetric}; \
         hausdorff(A,A)=0: {identity}"
    );
    assert!(report("4 (metric oracle)", pass, &detail), "{detail}");
}

#[test]
fn criterion_5_dead_reckoning_bound() {
    let dep = DeploymentModel {
        dispatcher: DVec3::ZERO,
        alpha_deg: 10.0,
    };
    let target = DVec3::new(0.0, 0.0, 10.0);
    let chord_bound = 2.0 * 10.0 * (5.0f64).to_radians().sin();

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut max_angle = 0.0f64;
    let mut max_chord = 0.0f64;
    let mut max_dist_err = 0.0f64;
    for _ in 0..10_000 {
        let arrival = dead_reckon(target, &dep, &mut rng).unwrap();
        let cos = target.dot(arrival) / (target.length() * arrival.length());
        max_angle = max_angle.max(cos.clamp(-1.0, 1.0).acos().to_degrees());
        max_chord = max_chord.max(arrival.distance(target));
        max_dist_err = max_dist_err.max((arrival.length() - 10.0).abs() / 10.0);
    }

    let pass = max_angle <= 10.0 + 1e-9
        && max_dist_err < 1e-9
        && max_chord <= chord_bound + 1e-9
        && max_chord >= chord_bound * CHORD_APPROACH_FRACTION;
    let detail = format!(
        "max angle {max_angle:.4}° (≤ 10°); max relative distance error {max_dist_err:.1e} \
         (< 1e-9); max chord {max_chord:.4} m vs bound {chord_bound:.4} m \
         (within {:.0}%)",
        (1.0 - CHORD_APPROACH_FRACTION) * 100.0
    );
    assert!(report("5 (dead reckoning)", pass, &detail), "{detail}");
}

#[test]
fn criterion_6_sensor_blind_range() {
    let model = SensorModel::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut none_below = true;
    for k in 1..50 {
        let d = 0.05 * k as f64 / 50.0; // strictly below 0.05
        none_below &= measure_relative(DVec3::new(d, 0.0, 0.0), &model, &mut rng).is_none();
    }
    let at_boundary =
        measure_relative(DVec3::new(0.05, 0.0, 0.0), &model, &mut rng).is_some();

    let pass = none_below && at_boundary;
    let detail = format!(
        "no detection below 0.05 m: {none_below}; detection at exactly 0.05 m: {at_boundary}"
    );
    assert!(report("6 (blind range)", pass, &detail), "{detail}");
}

#[test]
fn criterion_7_exact_convergence_oracle() {
    // Depth-4 chain of 5 drones, randomly displaced by dead reckoning.
    let cloud = PointCloud {
        points: (0..5).map(|i| DVec3::new(0.3 * i as f64, 0.0, 0.0)).collect(),
    };
    let chain_plan = plan(
        &cloud,
        FlsSpec {
            radius: 0.02,
            range_min: 0.05,
            range_max: 0.6,
        },
        5,
        0,
        "chain",
    )
    .unwrap();
    // It really is a depth-4 chain.
    assert_eq!(chain_plan.assignments[4].anchor_id, Some(3));

    let mut cfg = ExperimentConfig {
        duration_s: 2.0,
        tick_interval_ms: 100,
        max_speed: 50.0,
        policy: Policy::Cascade,
        seed: 77,
        ..ExperimentConfig::default()
    };
    cfg.deploy.alpha_deg = 15.0;
    cfg.deploy.dispatcher = DVec3::new(0.6, 0.0, -5.0);
    cfg.sensor.err_sweet = 0.0;
    cfg.sensor.err_decay_slope = 0.0;
    cfg.sensor.range_max = 20.0;
    let logs = run_with_plan(&cfg, &chain_plan).unwrap();

    let mut max_rel_err = 0.0f64;
    for a in &chain_plan.assignments {
        let Some(anchor_id) = a.anchor_id else {
            continue;
        };
        let anchor = &chain_plan.assignments[anchor_id as usize];
        let desired = a.ground_truth_location - anchor.ground_truth_location;
        let rel = logs.final_position(a.fls_id).unwrap()
            - logs.final_position(anchor_id).unwrap();
        max_rel_err = max_rel_err.max((rel - desired).length());
    }

    let pass = max_rel_err < EXACT_CONVERGENCE_TOL_M;
    let detail = format!(
        "max relative-offset error {max_rel_err:.2e} m (< {EXACT_CONVERGENCE_TOL_M:.0e})"
    );
    assert!(report("7 (exact convergence)", pass, &detail), "{detail}");
}

#[test]
fn criterion_8_wallclock_scale_check() {
    let cloud = grid_point_cloud(10, 10, 0.5);
    let scale_plan = plan(&cloud, default_spec(), 25, 0, "grid 10x10").unwrap();

    let mut cfg = ExperimentConfig {
        mode: Mode::WallClock,
        duration_s: 30.0,
        tick_interval_ms: 100,
        max_speed: 0.5,
        seed: 8,
        ..ExperimentConfig::default()
    };
    cfg.deploy.alpha_deg = 10.0;
    cfg.deploy.dispatcher = DVec3::new(2.25, 2.25, -10.0);
    let logs = run_with_plan(&cfg, &scale_plan).unwrap();
    let completed = !logs.manifest.failed && logs.trajectories.len() == 100;

    let gt: Vec<DVec3> = cloud.points.clone();
    let initial: Vec<DVec3> = (0..100)
        .map(|id| logs.trajectories[&id][0].position)
        .collect();
    let final_pos: Vec<DVec3> = (0..100).map(|id| logs.final_position(id).unwrap()).collect();
    let h_initial = hausdorff(&initial, &gt).unwrap();
    let h_final = hausdorff(&final_pos, &gt).unwrap();

    // Decodability: everything survives a disk round trip (the loader
    // rejects any unparseable record) and no frame was malformed.
    let dir = tempfile::tempdir().unwrap();
    logs.save(dir.path()).unwrap();
    let reloaded = RunLogs::load(dir.path());
    let decodable =
        reloaded.is_ok() && logs.manifest.counters.malformed_frames == 0;
    let record_count: usize = logs.messages.values().map(Vec::len).sum();

    let pass = completed && h_final < h_initial && decodable;
    let detail = format!(
        "100 drones, 30 s wall-clock run completed: {completed}; hausdorff {h_initial:.3} m \
         → {h_final:.3} m; {record_count} message records all decodable: {decodable}"
    );
    assert!(report("8 (wall-clock scale)", pass, &detail), "{detail}");
}

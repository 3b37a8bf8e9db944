//! Hausdorff and Chamfer distances between the live formation and the
//! ground-truth point cloud, as scalars and as time series over run logs.
//!
//! Both metrics are correspondence-free: they compare the formation to the
//! cloud as shapes, not drone-by-drone. Chamfer is the symmetric average of
//! the two directed mean nearest-neighbor distances, kept unsquared so both
//! metrics share units (meters). Lower is better; zero means the sets
//! coincide.

use std::fmt::Write as _;
use std::path::Path;

use glam::DVec3;
use thiserror::Error;

use crate::engine::RunLogs;
use crate::fmt::sig9;
use crate::mesh::PointCloud;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("distance over an empty point set")]
    EmptySet,
    #[error("bright drone {0} has no trajectory samples")]
    MissingFls(u32),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// `max over a∈A of min over b∈B` of Euclidean distance.
pub fn directed_hausdorff(a: &[DVec3], b: &[DVec3]) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut worst = 0.0f64;
    for &p in a {
        let nearest = b
            .iter()
            .map(|&q| p.distance(q))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    Ok(worst)
}

/// Symmetric Hausdorff distance: the larger of the two directed values.
pub fn hausdorff(a: &[DVec3], b: &[DVec3]) -> Result<f64, MetricsError> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

/// Symmetric Chamfer distance:
/// `0.5·(mean_a min_b ‖a−b‖ + mean_b min_a ‖a−b‖)`.
pub fn chamfer(a: &[DVec3], b: &[DVec3]) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mean_nn = |from: &[DVec3], to: &[DVec3]| -> f64 {
        let total: f64 = from
            .iter()
            .map(|&p| {
                to.iter()
                    .map(|&q| p.distance(q))
                    .fold(f64::INFINITY, f64::min)
            })
            .sum();
        total / from.len() as f64
    };
    Ok(0.5 * (mean_nn(a, b) + mean_nn(b, a)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsSample {
    pub t_s: f64,
    pub hausdorff: f64,
    pub chamfer: f64,
}

/// Time series of both metrics, sampled at a fixed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsSeries {
    pub samples: Vec<MetricsSample>,
}

impl MetricsSeries {
    pub fn final_sample(&self) -> Option<&MetricsSample> {
        self.samples.last()
    }

    /// CSV with header `t,hausdorff,chamfer`, 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,hausdorff,chamfer\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{}",
                crate::fmt::secs_us((s.t_s * 1e6).round() as u64),
                sig9(s.hausdorff),
                sig9(s.chamfer)
            );
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), MetricsError> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Computes the metric series from run logs against the ground-truth cloud.
///
/// At each sample time `t = k·interval` the formation is the most recent
/// logged position of every bright drone at or before `t`. Bright drones are
/// exactly ids `0..cloud.len()`; dark relays have higher ids and are
/// excluded, since they illuminate no point of the shape.
pub fn metrics_series(
    logs: &RunLogs,
    ground_truth: &PointCloud,
    interval_s: f64,
) -> Result<MetricsSeries, MetricsError> {
    assert!(interval_s > 0.0, "interval must be positive");
    let bright_ids: Vec<u32> = (0..ground_truth.len() as u32).collect();
    for &id in &bright_ids {
        if logs.trajectories.get(&id).is_none_or(|t| t.is_empty()) {
            return Err(MetricsError::MissingFls(id));
        }
    }

    let duration_us = logs.manifest.config.duration_us();
    let interval_us = (interval_s * 1e6).round() as u64;
    let mut samples = Vec::new();
    for k in 0.. {
        let t_us = k * interval_us;
        if t_us > duration_us {
            break;
        }
        let formation: Vec<DVec3> = bright_ids
            .iter()
            .map(|&id| {
                logs.position_at(id, t_us)
                    .expect("initial sample at t=0 covers every time")
            })
            .collect();
        samples.push(MetricsSample {
            t_s: t_us as f64 / 1e6,
            hausdorff: hausdorff(&formation, &ground_truth.points)?,
            chamfer: chamfer(&formation, &ground_truth.points)?,
        });
    }
    Ok(MetricsSeries { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::grid_point_cloud;
    use glam::DQuat;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(raw: &[(f64, f64, f64)]) -> Vec<DVec3> {
        raw.iter().map(|&(x, y, z)| DVec3::new(x, y, z)).collect()
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let a = grid_point_cloud(4, 4, 0.5).points;
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        assert_eq!(chamfer(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn single_pair_distances() {
        let a = pts(&[(0.0, 0.0, 0.0)]);
        let b = pts(&[(1.0, 0.0, 0.0)]);
        assert!((directed_hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!((hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!((chamfer(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn translated_grid_directed_distance() {
        let a = grid_point_cloud(4, 4, 0.5).points;
        let b: Vec<DVec3> = a.iter().map(|&p| p + DVec3::new(0.02, 0.0, 0.0)).collect();
        // Brute-force check by construction: every nearest neighbor is the
        // translated copy of the same point.
        assert!((directed_hausdorff(&a, &b).unwrap() - 0.02).abs() < 1e-12);
        assert!((hausdorff(&a, &b).unwrap() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_sets_take_the_larger_direction() {
        let a = pts(&[(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]);
        let b = pts(&[(0.0, 0.0, 0.0)]);
        assert_eq!(directed_hausdorff(&b, &a).unwrap(), 0.0);
        assert!((directed_hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        assert!((hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chamfer_single_displacement() {
        // 16-point grid with one point nudged 0.16: both directed means are
        // 0.16/16, so chamfer is 0.01 (nearest neighbors unchanged because
        // the nudge is below half the grid spacing).
        let a = grid_point_cloud(4, 4, 0.5).points;
        let mut b = a.clone();
        b[5] += DVec3::new(0.16, 0.0, 0.0);
        assert!((chamfer(&a, &b).unwrap() - 0.01).abs() < 1e-12);
    }

    #[test]
    fn empty_set_is_an_error() {
        let a = pts(&[(0.0, 0.0, 0.0)]);
        assert!(matches!(hausdorff(&a, &[]), Err(MetricsError::EmptySet)));
        assert!(matches!(chamfer(&[], &a), Err(MetricsError::EmptySet)));
    }

    fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Vec<DVec3> {
        (0..n)
            .map(|_| {
                DVec3::new(
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                    rng.random_range(-2.0..2.0),
                )
            })
            .collect()
    }

    #[test]
    fn symmetry_over_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let na = rng.random_range(1..20);
            let a = random_set(&mut rng, na);
            let nb = rng.random_range(1..20);
            let b = random_set(&mut rng, nb);
            assert_eq!(hausdorff(&a, &b).unwrap(), hausdorff(&b, &a).unwrap());
            assert_eq!(chamfer(&a, &b).unwrap(), chamfer(&b, &a).unwrap());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn chamfer_never_exceeds_hausdorff(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let na = rng.random_range(1..24);
            let a = random_set(&mut rng, na);
            let nb = rng.random_range(1..24);
            let b = random_set(&mut rng, nb);
            let h = hausdorff(&a, &b).unwrap();
            let c = chamfer(&a, &b).unwrap();
            prop_assert!(c <= h + 1e-12, "chamfer {c} > hausdorff {h}");
            prop_assert!(c >= 0.0 && h >= 0.0);
        }

        #[test]
        fn metrics_rigid_invariant(
            seed in any::<u64>(),
            angle in 0.0..std::f64::consts::TAU,
            tx in -10.0f64..10.0,
            ty in -10.0f64..10.0,
            tz in -10.0f64..10.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let na = rng.random_range(1..16);
            let a = random_set(&mut rng, na);
            let nb = rng.random_range(1..16);
            let b = random_set(&mut rng, nb);
            let rot = DQuat::from_axis_angle(DVec3::new(0.3, -0.5, 0.81).normalize(), angle);
            let t = DVec3::new(tx, ty, tz);
            let move_all = |pts: &[DVec3]| -> Vec<DVec3> {
                pts.iter().map(|&p| rot * p + t).collect()
            };
            let h0 = hausdorff(&a, &b).unwrap();
            let h1 = hausdorff(&move_all(&a), &move_all(&b)).unwrap();
            prop_assert!((h0 - h1).abs() <= 1e-9 * (1.0 + h0));
            let c0 = chamfer(&a, &b).unwrap();
            let c1 = chamfer(&move_all(&a), &move_all(&b)).unwrap();
            prop_assert!((c0 - c1).abs() <= 1e-9 * (1.0 + c0));
        }
    }

    mod series {
        use super::*;
        use crate::engine::{run_with_plan, ExperimentConfig};
        use crate::planner::{plan as make_plan, FlsSpec};

        fn grid_run(alpha: f64, duration_s: f64) -> (crate::engine::RunLogs, PointCloud) {
            let cloud = grid_point_cloud(4, 4, 0.5);
            let plan = make_plan(
                &cloud,
                FlsSpec {
                    radius: 0.02,
                    range_min: 0.05,
                    range_max: 0.6,
                },
                16,
                0,
                "grid",
            )
            .unwrap();
            let mut cfg = ExperimentConfig {
                duration_s,
                tick_interval_ms: 100,
                max_speed: 2.0,
                seed: 9,
                ..ExperimentConfig::default()
            };
            cfg.deploy.alpha_deg = alpha;
            cfg.deploy.dispatcher = DVec3::new(0.75, 0.75, -10.0);
            if alpha == 0.0 {
                // The noiseless reference case: exact deployment and exact
                // measurements.
                cfg.sensor.err_sweet = 0.0;
                cfg.sensor.err_decay_slope = 0.0;
            }
            let logs = run_with_plan(&cfg, &plan).unwrap();
            (logs, cloud)
        }

        #[test]
        fn noiseless_run_is_identically_zero() {
            let (logs, cloud) = grid_run(0.0, 1.0);
            let series = metrics_series(&logs, &cloud, 0.1).unwrap();
            assert_eq!(series.samples.len(), 11);
            for s in &series.samples {
                assert!(s.hausdorff < 1e-9, "t={} h={}", s.t_s, s.hausdorff);
                assert!(s.chamfer < 1e-9);
            }
        }

        #[test]
        fn eleven_samples_per_second_at_tenth_interval() {
            let (logs, cloud) = grid_run(10.0, 1.0);
            let series = metrics_series(&logs, &cloud, 0.1).unwrap();
            assert_eq!(series.samples.len(), 11);
            assert_eq!(series.samples[0].t_s, 0.0);
            assert!((series.samples[10].t_s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn converging_run_improves() {
            let (logs, cloud) = grid_run(10.0, 5.0);
            let series = metrics_series(&logs, &cloud, 0.5).unwrap();
            let first = series.samples.first().unwrap();
            let last = series.final_sample().unwrap();
            assert!(last.hausdorff <= first.hausdorff);
        }

        #[test]
        fn missing_bright_drone_is_an_error() {
            let (mut logs, cloud) = grid_run(10.0, 1.0);
            logs.trajectories.remove(&7);
            match metrics_series(&logs, &cloud, 0.5) {
                Err(MetricsError::MissingFls(7)) => {}
                other => panic!("expected MissingFls(7), got {other:?}"),
            }
        }

        #[test]
        fn csv_has_header_and_rows() {
            let (logs, cloud) = grid_run(10.0, 1.0);
            let series = metrics_series(&logs, &cloud, 0.5).unwrap();
            let csv = series.to_csv();
            assert!(csv.starts_with("t,hausdorff,chamfer\n"));
            assert_eq!(csv.lines().count(), 1 + series.samples.len());
        }
    }
}

//! Swarm localization toolkit.
//!
//! Two halves, mirroring how a light-show deployment actually runs:
//!
//! * **Offline planning** ([`mesh`], [`planner`]): turn a triangle mesh (or a
//!   synthetic grid) into a ground-truth point cloud, partition it into
//!   swarms, build sensor-range-constrained anchor trees, and insert dark
//!   relay drones wherever swarms would otherwise be out of camera range of
//!   each other.
//! * **Online localization** ([`sensor`], [`protocol`], [`engine`],
//!   [`metrics`]): deploy every drone with dead-reckoning error, then let each
//!   one continuously correct its position relative to its tree anchor using
//!   a noisy camera-range measurement model, while Hausdorff and Chamfer
//!   distances against the ground truth are tracked over time.
//!
//! The deterministic simulation mode reproduces bit-identical logs for a
//! fixed seed; the wall-clock mode runs one worker per drone and reproduces
//! the scheduling nondeterminism of a real multi-process deployment.

pub mod engine;
mod fmt;
pub mod mesh;
pub mod metrics;
pub mod planner;
pub mod protocol;
pub mod sensor;

/// 3D point / vector in meters. Re-exported so downstream crates do not need
/// a direct `glam` dependency.
pub use glam::DVec3;

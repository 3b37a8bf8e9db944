//! Camera-based relative-position sensing and dead-reckoning deployment.
//!
//! The positioning camera has three distance bands: a blind range where a
//! neighbor is not detected at all, a sweet range where detection is highly
//! accurate, and a decaying range where the error grows with distance. The
//! noise law is zero-mean gaussian per axis with a standard deviation
//! proportional to distance, growing linearly beyond the sweet range.
//!
//! Deployment is open-loop: a drone travels from the dispatcher toward its
//! target with a heading error of up to `alpha` degrees, which preserves the
//! travel distance but displaces the arrival point along a spherical cap.

use glam::{DQuat, DVec3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SensorError {
    #[error("invalid sensor model: {0}")]
    InvalidModel(&'static str),
    #[error("dead reckoning target coincides with the dispatcher")]
    DegenerateTravel,
}

/// Distance bands of the positioning camera.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeClass {
    Blind,
    Sweet,
    Decaying,
    OutOfRange,
}

/// Camera range bands and error parameters.
///
/// The defaults are configuration placeholders, except for the 50 mm blind
/// range which matches the measured wide-lens cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Below this distance a neighbor is not detected at all (meters).
    pub range_blind: f64,
    /// Upper end of the high-accuracy band (meters).
    pub range_sweet_max: f64,
    /// Maximum detection distance (meters).
    pub range_max: f64,
    /// Relative per-axis error std in the sweet band (fraction of distance).
    pub err_sweet: f64,
    /// Additional relative error per meter beyond the sweet range.
    pub err_decay_slope: f64,
}

impl Default for SensorModel {
    fn default() -> Self {
        Self {
            range_blind: 0.05,
            range_sweet_max: 0.5,
            range_max: 3.0,
            err_sweet: 0.005,
            err_decay_slope: 0.01,
        }
    }
}

impl SensorModel {
    pub fn validate(&self) -> Result<(), SensorError> {
        if !(self.range_blind >= 0.0 && self.range_blind < self.range_sweet_max) {
            return Err(SensorError::InvalidModel(
                "need 0 <= range_blind < range_sweet_max",
            ));
        }
        if self.range_sweet_max > self.range_max {
            return Err(SensorError::InvalidModel(
                "need range_sweet_max <= range_max",
            ));
        }
        if self.err_sweet < 0.0 || self.err_decay_slope < 0.0 {
            return Err(SensorError::InvalidModel("error parameters must be >= 0"));
        }
        Ok(())
    }

    /// Per-axis noise std at measurement distance `d`.
    pub fn sigma(&self, d: f64) -> f64 {
        d * (self.err_sweet + (d - self.range_sweet_max).max(0.0) * self.err_decay_slope)
    }
}

/// Dispatch point and maximum angular deployment error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentModel {
    /// Where drones take off from (meters).
    pub dispatcher: DVec3,
    /// Maximum heading error in degrees.
    pub alpha_deg: f64,
}

/// Band classification, partitioning `[0, ∞)`: blind is `d < range_blind`,
/// sweet is inclusive on both ends, decaying is `(sweet_max, range_max]`.
pub fn classify_range(d: f64, model: &SensorModel) -> RangeClass {
    debug_assert!(d >= 0.0);
    if d < model.range_blind {
        RangeClass::Blind
    } else if d <= model.range_sweet_max {
        RangeClass::Sweet
    } else if d <= model.range_max {
        RangeClass::Decaying
    } else {
        RangeClass::OutOfRange
    }
}

/// Simulates one camera measurement of a true relative vector.
///
/// Returns `None` when the distance falls in the blind or out-of-range band;
/// otherwise the true vector plus independent per-axis gaussian noise with
/// std [`SensorModel::sigma`].
pub fn measure_relative<R: Rng>(
    true_rel: DVec3,
    model: &SensorModel,
    rng: &mut R,
) -> Option<DVec3> {
    debug_assert!(true_rel.is_finite());
    let d = true_rel.length();
    match classify_range(d, model) {
        RangeClass::Blind | RangeClass::OutOfRange => None,
        RangeClass::Sweet | RangeClass::Decaying => {
            let sigma = model.sigma(d);
            if sigma == 0.0 {
                return Some(true_rel);
            }
            let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
            let noise = DVec3::new(
                normal.sample(rng),
                normal.sample(rng),
                normal.sample(rng),
            );
            Some(true_rel + noise)
        }
    }
}

/// Open-loop travel from the dispatcher to `target` with a random heading
/// error: the travel vector is rotated by an angle uniform in
/// `[0, alpha]` about an axis uniform on the circle perpendicular to it.
/// The travel distance is preserved exactly.
pub fn dead_reckon<R: Rng>(
    target: DVec3,
    dep: &DeploymentModel,
    rng: &mut R,
) -> Result<DVec3, SensorError> {
    let travel = target - dep.dispatcher;
    let dist = travel.length();
    if dist == 0.0 {
        return Err(SensorError::DegenerateTravel);
    }

    let theta = dep.alpha_deg.to_radians() * rng.random::<f64>();
    let phi = std::f64::consts::TAU * rng.random::<f64>();

    let dir = travel / dist;
    let (e1, e2) = perpendicular_basis(dir);
    let axis = phi.cos() * e1 + phi.sin() * e2;
    let arrival = dep.dispatcher + DQuat::from_axis_angle(axis, theta) * travel;
    Ok(arrival)
}

/// Deterministic orthonormal basis of the plane perpendicular to unit `dir`.
pub(crate) fn perpendicular_basis(dir: DVec3) -> (DVec3, DVec3) {
    let abs = dir.abs();
    // The coordinate axis least aligned with `dir` gives a stable cross
    // product.
    let pick = if abs.x <= abs.y && abs.x <= abs.z {
        DVec3::X
    } else if abs.y <= abs.z {
        DVec3::Y
    } else {
        DVec3::Z
    };
    let e1 = dir.cross(pick).normalize();
    let e2 = dir.cross(e1);
    (e1, e2)
}

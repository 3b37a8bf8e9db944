//! Shared numeric formatting for the CSV file formats.

/// Formats a coordinate/metric value with 9 significant digits.
///
/// All CSV outputs (point clouds, trajectories, metric series) use this so
/// that identical runs produce identical files.
pub(crate) fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Formats a timestamp in seconds with microsecond resolution.
pub(crate) fn secs_us(t_us: u64) -> String {
    format!("{:.6}", t_us as f64 / 1e6)
}

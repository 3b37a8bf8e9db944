//! Consolidated plot-ready export of a completed run: the metric series,
//! per-drone final errors, and message counts, as one CSV or JSON file with
//! identical numeric content either way.
//!
//! The CSV is a single tidy table with a `record` discriminator column
//! (`series` or `fls`); unused cells are empty. This keeps it loadable by
//! generic tools without a custom parser.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::CliError;
use swarmloc_core::engine::{Direction, RunLogs};
use swarmloc_core::metrics::{metrics_series, MetricsSample};
use swarmloc_core::planner::load_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(format!("unknown format {other:?}, expected csv | json")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlsExport {
    pub fls_id: u32,
    pub is_dark: bool,
    /// Distance from the drone's final logged position to its ground truth.
    pub final_error: f64,
    pub msgs_sent: u64,
    pub msgs_received: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExportData {
    pub series: Vec<MetricsSampleExport>,
    pub fls: Vec<FlsExport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsSampleExport {
    pub t: f64,
    pub hausdorff: f64,
    pub chamfer: f64,
}

impl From<&MetricsSample> for MetricsSampleExport {
    fn from(s: &MetricsSample) -> Self {
        Self {
            t: s.t_s,
            hausdorff: s.hausdorff,
            chamfer: s.chamfer,
        }
    }
}

/// Assembles the dataset from a results directory. Requires the manifest
/// (i.e. a completed run) and the plan copy the run wrote next to its logs.
pub fn build(results: &Path, interval_s: f64) -> Result<ExportData, CliError> {
    let logs = RunLogs::load(results)?;
    let plan = load_plan(&results.join("plan.json"))?;
    let series = metrics_series(&logs, &plan.bright_cloud(), interval_s)?;

    let mut fls = Vec::with_capacity(plan.assignments.len());
    for a in &plan.assignments {
        let final_error = logs
            .final_position(a.fls_id)
            .map(|p| p.distance(a.ground_truth_location))
            .unwrap_or(f64::NAN);
        let (sent, received) = logs
            .messages
            .get(&a.fls_id)
            .map(|records| {
                let sent = records
                    .iter()
                    .filter(|r| r.direction == Direction::Sent)
                    .count() as u64;
                (sent, records.len() as u64 - sent)
            })
            .unwrap_or((0, 0));
        fls.push(FlsExport {
            fls_id: a.fls_id,
            is_dark: a.is_dark,
            final_error,
            msgs_sent: sent,
            msgs_received: received,
        });
    }

    Ok(ExportData {
        series: series.samples.iter().map(Into::into).collect(),
        fls,
    })
}

pub fn to_csv(data: &ExportData) -> String {
    let mut out =
        String::from("record,t,fls_id,hausdorff,chamfer,final_error,msgs_sent,msgs_received\n");
    for s in &data.series {
        let _ = writeln!(out, "series,{},,{},{},,,", s.t, s.hausdorff, s.chamfer);
    }
    for f in &data.fls {
        let _ = writeln!(
            out,
            "fls,,{},,,{},{},{}",
            f.fls_id, f.final_error, f.msgs_sent, f.msgs_received
        );
    }
    out
}

pub fn to_json(data: &ExportData) -> String {
    serde_json::to_string_pretty(data).expect("export serialization cannot fail") + "\n"
}

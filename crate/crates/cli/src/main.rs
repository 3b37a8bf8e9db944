use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use swarmloc_cli::{
    cmd_export, cmd_metrics, cmd_plan, cmd_run, cmd_sweep, export::ExportFormat, PlanArgs,
    RunOverrides,
};

/// Swarm localization toolkit: plan drone formations for 3D shapes and
/// simulate the decentralized online localization protocol.
#[derive(Parser)]
#[command(name = "swarmloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a formation: point cloud, swarm trees and per-drone assignments.
    Plan {
        /// Mesh file (OBJ subset: v and f records).
        #[arg(long, conflicts_with = "grid")]
        mesh: Option<PathBuf>,
        /// Synthetic grid cloud, e.g. 4x4:0.5 (rows x cols : spacing).
        #[arg(long)]
        grid: Option<String>,
        /// Drone body radius in meters.
        #[arg(long)]
        radius: f64,
        /// Camera blind-range boundary in meters.
        #[arg(long = "min-range")]
        min_range: f64,
        /// Camera maximum detection range in meters.
        #[arg(long = "max-range")]
        max_range: f64,
        /// Approximate drones per swarm (G).
        #[arg(long = "swarm-size")]
        swarm_size: usize,
        /// Density multiplier for the required-drone formula (mesh case).
        #[arg(long, default_value_t = 1.0)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory for plan.json and cloud.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute the online localization experiment for a plan.
    Run {
        /// Experiment config file (flat key = value); flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Run duration in seconds.
        #[arg(long)]
        duration: Option<f64>,
        /// deterministic | wallclock
        #[arg(long)]
        mode: Option<String>,
        /// cascade | continuous
        #[arg(long)]
        policy: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Maximum dead-reckoning angular error in degrees.
        #[arg(long)]
        alpha: Option<f64>,
        /// Dispatcher position x,y,z in meters.
        #[arg(long)]
        dispatcher: Option<String>,
        /// Tick interval in milliseconds.
        #[arg(long = "tick-ms")]
        tick_ms: Option<u64>,
        /// Maximum drone speed in m/s.
        #[arg(long = "max-speed")]
        max_speed: Option<f64>,
        /// Results directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the Hausdorff/Chamfer time series for a completed run.
    Metrics {
        #[arg(long)]
        results: PathBuf,
        /// Ground-truth point cloud CSV (id,x,y,z).
        #[arg(long = "ground-truth")]
        ground_truth: PathBuf,
        /// Sampling interval in seconds.
        #[arg(long, default_value_t = 0.1)]
        interval: f64,
        /// Output CSV (default: <results>/metrics.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand a sweep template into one config file per combination.
    Sweep {
        #[arg(long)]
        template: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export a consolidated plot-ready dataset for a completed run.
    Export {
        #[arg(long)]
        results: PathBuf,
        /// csv | json
        #[arg(long, default_value = "csv")]
        format: ExportFormat,
        /// Metric series interval in seconds.
        #[arg(long, default_value_t = 1.0)]
        interval: f64,
        /// Output file (default: <results>/export.<format>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match cli.command {
        Command::Plan {
            mesh,
            grid,
            radius,
            min_range,
            max_range,
            swarm_size,
            density,
            seed,
            out,
        } => cmd_plan(&PlanArgs {
            mesh,
            grid,
            radius,
            min_range,
            max_range,
            swarm_size,
            density,
            seed,
            out,
        }),
        Command::Run {
            config,
            plan,
            duration,
            mode,
            policy,
            seed,
            alpha,
            dispatcher,
            tick_ms,
            max_speed,
            out,
        } => cmd_run(
            config.as_deref(),
            &RunOverrides {
                plan,
                duration,
                mode,
                policy,
                seed,
                alpha,
                dispatcher,
                tick_ms,
                max_speed,
                out,
            },
        ),
        Command::Metrics {
            results,
            ground_truth,
            interval,
            out,
        } => cmd_metrics(&results, &ground_truth, interval, out.as_deref()),
        Command::Sweep { template, out } => cmd_sweep(&template, &out),
        Command::Export {
            results,
            format,
            interval,
            out,
        } => cmd_export(&results, format, interval, out.as_deref()),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

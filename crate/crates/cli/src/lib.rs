//! Implementation of the `swarmloc` subcommands.
//!
//! Split from the binary so the sweep and export machinery has ordinary unit
//! tests; the binary itself only does argument parsing and exit-code
//! mapping.

pub mod export;
pub mod sweep;

use std::path::{Path, PathBuf};

use glam::DVec3;
use thiserror::Error;

use swarmloc_core::engine::{self, ConfigError, EngineError, ExperimentConfig, LogError, RunLogs};
use swarmloc_core::mesh::{
    grid_point_cloud, load_mesh, poisson_disk_sample, required_fls_count_with_density,
    surface_area, MeshError, PointCloud,
};
use swarmloc_core::metrics::{metrics_series, MetricsError};
use swarmloc_core::planner::{plan as build_plan, plan_summary, save_plan, FlsSpec, PlanError};

/// Exit codes: 0 success, 1 usage, 2 input/validation, 3 runtime failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Sweep(#[from] sweep::SweepError),
    #[error("run failed: {0}")]
    RunFailed(String),
    #[error(transparent)]
    Engine(EngineError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        // Configuration and plan problems are input errors even when they
        // surface inside the engine.
        match e {
            EngineError::Config(c) => CliError::Config(c),
            EngineError::Plan(p) => CliError::Plan(p),
            EngineError::Log(l) => CliError::Log(l),
            other => CliError::Engine(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Mesh(_)
            | CliError::Plan(_)
            | CliError::Config(_)
            | CliError::Metrics(_)
            | CliError::Log(_)
            | CliError::Sweep(_) => 2,
            CliError::RunFailed(_) | CliError::Engine(_) | CliError::Io(_) => 3,
        }
    }
}

/// `RxC:spacing` grid specification, e.g. `4x4:0.5`.
pub fn parse_grid_spec(spec: &str) -> Result<(usize, usize, f64), CliError> {
    let usage = || CliError::Usage(format!("bad grid spec {spec:?}, expected RxC:spacing"));
    let (dims, spacing) = spec.split_once(':').ok_or_else(usage)?;
    let (rows, cols) = dims.split_once(['x', 'X']).ok_or_else(usage)?;
    let rows: usize = rows.parse().map_err(|_| usage())?;
    let cols: usize = cols.parse().map_err(|_| usage())?;
    let spacing: f64 = spacing.parse().map_err(|_| usage())?;
    if rows == 0 || cols == 0 || spacing <= 0.0 {
        return Err(usage());
    }
    Ok((rows, cols, spacing))
}

pub fn parse_vec3_arg(s: &str) -> Result<DVec3, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Usage(format!("bad point {s:?}, expected x,y,z")));
    }
    let coord = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| CliError::Usage(format!("bad coordinate {p:?}")))
    };
    Ok(DVec3::new(
        coord(parts[0])?,
        coord(parts[1])?,
        coord(parts[2])?,
    ))
}

pub struct PlanArgs {
    pub mesh: Option<PathBuf>,
    pub grid: Option<String>,
    pub radius: f64,
    pub min_range: f64,
    pub max_range: f64,
    pub swarm_size: usize,
    pub density: f64,
    pub seed: u64,
    pub out: PathBuf,
}

/// `plan`: cloud generation + tree planning, writing `plan.json` and
/// `cloud.csv` into the output directory.
pub fn cmd_plan(args: &PlanArgs) -> Result<(), CliError> {
    let spec = FlsSpec {
        radius: args.radius,
        range_min: args.min_range,
        range_max: args.max_range,
    };

    let (cloud, source) = match (&args.mesh, &args.grid) {
        (Some(mesh_path), None) => {
            let mesh = load_mesh(mesh_path)?;
            if mesh.degenerate_dropped > 0 {
                eprintln!(
                    "warning: dropped {} degenerate faces",
                    mesh.degenerate_dropped
                );
            }
            let area = surface_area(&mesh);
            let count = required_fls_count_with_density(area, args.radius, args.density)?;
            println!("surface area: {area:.6} m^2");
            println!("required drones F: {count}");
            let cloud = poisson_disk_sample(&mesh, count, args.seed)?;
            (cloud, mesh_path.display().to_string())
        }
        (None, Some(grid)) => {
            let (rows, cols, spacing) = parse_grid_spec(grid)?;
            println!("required drones F: {}", rows * cols);
            (grid_point_cloud(rows, cols, spacing), format!("grid {grid}"))
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --mesh and --grid is required".into(),
            ))
        }
    };

    let plan = build_plan(&cloud, spec, args.swarm_size, args.seed, &source)?;
    std::fs::create_dir_all(&args.out)?;
    save_plan(&plan, &args.out.join("plan.json"))?;
    cloud.save_csv(&args.out.join("cloud.csv"))?;

    println!("groups nG: {}", plan.group_count);
    println!("bright drones: {}", plan.bright_count());
    println!("dark drones: {}", plan.dark_count());
    print!("{}", plan_summary(&plan));
    println!("wrote {}", args.out.join("plan.json").display());
    Ok(())
}

#[derive(Default)]
pub struct RunOverrides {
    pub plan: Option<PathBuf>,
    pub duration: Option<f64>,
    pub mode: Option<String>,
    pub policy: Option<String>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub dispatcher: Option<String>,
    pub tick_ms: Option<u64>,
    pub max_speed: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Builds the effective config: file (if any) first, flag overrides second.
pub fn effective_config(
    config_file: Option<&Path>,
    ov: &RunOverrides,
) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match config_file {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(plan) = &ov.plan {
        cfg.plan = plan.display().to_string();
    }
    if let Some(d) = ov.duration {
        cfg.duration_s = d;
    }
    if let Some(mode) = &ov.mode {
        cfg.set("mode", mode)?;
    }
    if let Some(policy) = &ov.policy {
        cfg.set("policy", policy)?;
    }
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(alpha) = ov.alpha {
        cfg.deploy.alpha_deg = alpha;
    }
    if let Some(d) = &ov.dispatcher {
        cfg.deploy.dispatcher = parse_vec3_arg(d)?;
    }
    if let Some(t) = ov.tick_ms {
        cfg.tick_interval_ms = t;
    }
    if let Some(v) = ov.max_speed {
        cfg.max_speed = v;
    }
    if let Some(out) = &ov.out {
        cfg.out_dir = out.display().to_string();
    }
    Ok(cfg)
}

/// `run`: execute the localization experiment and flush logs.
pub fn cmd_run(config_file: Option<&Path>, ov: &RunOverrides) -> Result<(), CliError> {
    let cfg = effective_config(config_file, ov)?;
    cfg.validate()?;
    let logs = engine::run(&cfg)?;
    let c = &logs.manifest.counters;
    println!(
        "run complete: {} drones, {} ticks, {} sent / {} received messages, {} corrections",
        logs.manifest.fls_count, c.ticks, c.messages_sent, c.messages_received,
        c.corrections_applied
    );
    println!("results in {}", cfg.out_dir);
    if logs.manifest.failed {
        return Err(CliError::RunFailed(
            logs.manifest
                .failure
                .unwrap_or_else(|| "unknown worker failure".into()),
        ));
    }
    Ok(())
}

/// `metrics`: Hausdorff/Chamfer series from a results directory.
pub fn cmd_metrics(
    results: &Path,
    ground_truth: &Path,
    interval_s: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let logs = RunLogs::load(results)?;
    let cloud = PointCloud::load_csv(ground_truth)?;
    let series = metrics_series(&logs, &cloud, interval_s)?;
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| results.join("metrics.csv"));
    series.save_csv(&out_path)?;
    if let Some(last) = series.final_sample() {
        println!(
            "final: t={:.3} s hausdorff={:.6} m chamfer={:.6} m",
            last.t_s, last.hausdorff, last.chamfer
        );
    }
    println!("wrote {}", out_path.display());
    Ok(())
}

/// `sweep`: one complete config file per cartesian combination.
pub fn cmd_sweep(template: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(template)?;
    let parsed = sweep::parse_template(&text)?;
    let configs = sweep::generate(&parsed)?;
    std::fs::create_dir_all(out)?;
    for (name, cfg) in &configs {
        std::fs::write(out.join(name), cfg.to_config_string())?;
    }
    println!("wrote {} config files to {}", configs.len(), out.display());
    Ok(())
}

/// `export`: consolidated plot-ready dataset.
pub fn cmd_export(
    results: &Path,
    format: export::ExportFormat,
    interval_s: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let data = export::build(results, interval_s)?;
    let (default_name, body) = match format {
        export::ExportFormat::Csv => ("export.csv", export::to_csv(&data)),
        export::ExportFormat::Json => ("export.json", export::to_json(&data)),
    };
    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| results.join(default_name));
    std::fs::write(&out_path, body)?;
    println!("wrote {}", out_path.display());
    Ok(())
}

//! Config-driven experiment runner: JSON config in, CSV curve plus run
//! manifest out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod presets;
pub mod table;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use table::{read_csv, Table};

/// Seed used when neither the config nor the caller supplies one.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub master_seed: u64,
    pub workers: usize,
    pub wall_time_seconds: f64,
    pub csv: PathBuf,
    pub rows: usize,
    /// Fully resolved config; running the manifest reproduces the CSV.
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub overrides: Vec<String>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub default_seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunReport {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub table: Table,
    pub manifest: Manifest,
}

/// `source` is a config path, a manifest path, or `preset:NAME`.
pub fn resolve_config(source: &str, options: &RunOptions) -> Result<ExperimentConfig> {
    let (mut value, stem) = if let Some(name) = source.strip_prefix("preset:") {
        let preset =
            presets::find(name).ok_or_else(|| CliError::config("preset", format!("unknown preset `{name}`")))?;
        (serde_json::to_value(&preset.config)?, name.to_string())
    } else {
        let path = Path::new(source);
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        (config::parse_value(&text)?, stem)
    };
    if is_manifest(&value) {
        value = value["config"].take();
    }
    for o in &options.overrides {
        config::apply_override(&mut value, o)?;
    }
    let mut cfg = config::from_value(value)?;
    if cfg.master_seed.is_none() {
        cfg.master_seed = Some(options.default_seed.unwrap_or(DEFAULT_SEED));
    }
    if let Some(out) = &options.out {
        cfg.output = Some(out.clone());
    }
    if cfg.output.is_none() {
        cfg.output = Some(PathBuf::from(format!("{stem}.csv")));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_manifest(v: &Value) -> bool {
    v.get("tool").is_some() && v.get("config").is_some_and(Value::is_object)
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

pub fn run(source: &str, options: &RunOptions) -> Result<RunReport> {
    let cfg = resolve_config(source, options)?;
    let workers = match options.workers {
        Some(0) => return Err(CliError::config("workers", "must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::config("workers", e.to_string()))?;
    let start = Instant::now();
    let table = pool.install(|| experiments::run_experiment(&cfg))?;
    let wall_time_seconds = start.elapsed().as_secs_f64();

    let csv_path = cfg.output.clone().expect("resolved output");
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(&csv_path, table.to_bytes()?).map_err(|e| CliError::io(&csv_path, e))?;

    let manifest = Manifest {
        tool: "boundedmac".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        master_seed: cfg.seed(),
        workers,
        wall_time_seconds,
        csv: csv_path.clone(),
        rows: table.rows.len(),
        config: cfg,
    };
    let manifest_path = manifest_path(&csv_path);
    let json = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(&manifest_path, json + "\n").map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(RunReport {
        csv_path,
        manifest_path,
        table,
        manifest,
    })
}

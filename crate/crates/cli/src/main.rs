use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use boundedmac_cli::{presets, CliError, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "boundedmac",
    version,
    about = "Bounded-transmission estimation and detection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file, a saved manifest, or `preset:NAME`.
    Run {
        config: String,
        /// Dotted-path override, e.g. `network.noise.kind=laplacian`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        workers: Option<usize>,
        /// CSV output path; the manifest is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed used when the config has no `master_seed`.
        #[arg(long, env = "BOUNDEDMAC_SEED")]
        seed: Option<u64>,
    },
    /// List built-in presets.
    Presets,
    /// Print a preset as an editable JSON config.
    ShowPreset { name: String },
}

fn real_main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run {
            config,
            set,
            workers,
            out,
            seed,
        } => {
            let options = RunOptions {
                overrides: set,
                workers,
                out,
                default_seed: seed,
            };
            let report = boundedmac_cli::run(&config, &options).with_context(|| format!("running {config}"))?;
            println!(
                "wrote {} rows to {} (manifest {}, {:.1}s)",
                report.table.rows.len(),
                report.csv_path.display(),
                report.manifest_path.display(),
                report.manifest.wall_time_seconds
            );
        }
        Command::Presets => print!("{}", presets::listing()),
        Command::ShowPreset { name } => {
            let preset =
                presets::find(&name).ok_or_else(|| CliError::config("preset", format!("unknown preset `{name}`")))?;
            println!("{}", serde_json::to_string_pretty(&preset.config)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(err.downcast_ref::<CliError>().map_or(1, CliError::exit_code))
        }
    }
}

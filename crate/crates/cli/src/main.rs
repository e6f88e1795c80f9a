//! `brain` — config-driven experiment harness.
//!
//! Subcommands:
//! - `run <config> [--seed N] [--out DIR] [--workers K]`: execute one
//!   experiment and write its CSV artifacts plus a manifest.
//! - `validate <config>`: parse and check a config without running it.
//! - `list-experiments`: print the experiment catalog.
//!
//! Exit codes: 0 on success, 1 when the config fails validation (including
//! parse errors), 2 on runtime errors (I/O, solver failures).
//!
//! Output directory precedence: `--out` flag, then the config's `out_dir`,
//! then `$BRAIN_OUT_DIR/<config-stem>`, then `runs/<config-stem>`.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Experiment, ExperimentConfig};

/// Environment variable holding the default output root.
const OUT_DIR_ENV: &str = "BRAIN_OUT_DIR";

#[derive(Parser)]
#[command(name = "brain", version, about = "Config-driven sampling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV artifacts.
    Run {
        /// Path to the experiment config (TOML).
        config: PathBuf,
        /// Run only this seed, replacing the config's seed list.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory, overriding the config and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent jobs (default: one per CPU).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse and check a config without running it.
    Validate {
        /// Path to the experiment config (TOML).
        config: PathBuf,
    },
    /// List the experiments the harness knows about.
    ListExperiments,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out, workers } => run(&config, seed, out, workers),
        Command::Validate { config } => validate(&config),
        Command::ListExperiments => {
            for exp in Experiment::ALL {
                println!("{:<22} {}", exp.name(), exp.describe());
            }
            ExitCode::SUCCESS
        }
    }
}

/// Load, apply CLI overrides, validate. On failure prints errors and returns
/// the validation exit code.
fn load_config(
    path: &Path,
    seed_override: Option<u64>,
    out_override: Option<&Path>,
) -> Result<ExperimentConfig, ExitCode> {
    let text = match std::fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(ExitCode::from(2));
        }
    };
    let mut cfg = match ExperimentConfig::from_str(&text) {
        Ok(cfg) => cfg,
        Err(e) => {
            // toml errors carry line/column context.
            eprintln!("error: {} failed to parse:\n{e}", path.display());
            return Err(ExitCode::from(1));
        }
    };
    if let Some(seed) = seed_override {
        cfg.seeds = vec![seed];
    }
    if let Some(out) = out_override {
        cfg.out_dir = Some(out.display().to_string());
    }
    let errors = cfg.validate();
    if !errors.is_empty() {
        for e in &errors {
            eprintln!("error: {e}");
        }
        eprintln!("{}: {} validation error(s)", path.display(), errors.len());
        return Err(ExitCode::from(1));
    }
    Ok(cfg)
}

fn run(
    path: &Path,
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> ExitCode {
    let cfg = match load_config(path, seed, out.as_deref()) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    let out_dir = resolve_out_dir(&cfg, path);

    let result = match workers {
        Some(k) => {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool,
                Err(e) => {
                    eprintln!("error: cannot build worker pool: {e}");
                    return ExitCode::from(2);
                }
            };
            pool.install(|| experiments::run(&cfg))
        }
        None => experiments::run(&cfg),
    };
    let artifacts = match result {
        Ok(artifacts) => artifacts,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };

    // The manifest must hash the exact text the run used, including CLI
    // overrides, so overridden reruns are distinguishable in the manifest.
    let config_text = match effective_config_text(path, seed, out.as_deref()) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match output::write_run(&out_dir, &artifacts, &config_text) {
        Ok(paths) => {
            println!(
                "{}: wrote {} file(s) to {}",
                cfg.experiment,
                paths.len(),
                out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// The config text the manifest hash covers: the file, plus a trailer line
/// per CLI override so `run --seed 7` hashes differently from the plain run.
fn effective_config_text(
    path: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
) -> anyhow::Result<String> {
    let mut text = std::fs::read_to_string(path)?;
    if let Some(seed) = seed {
        text.push_str(&format!("\n# override: seed = {seed}\n"));
    }
    if let Some(out) = out {
        text.push_str(&format!("\n# override: out = {}\n", out.display()));
    }
    Ok(text)
}

fn validate(path: &Path) -> ExitCode {
    match load_config(path, None, None) {
        Ok(cfg) => {
            println!(
                "ok: experiment \"{}\" with {} seed(s)",
                cfg.experiment,
                cfg.seeds.len()
            );
            ExitCode::SUCCESS
        }
        Err(code) => code,
    }
}

fn resolve_out_dir(cfg: &ExperimentConfig, config_path: &Path) -> PathBuf {
    if let Some(dir) = &cfg.out_dir {
        return PathBuf::from(dir);
    }
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment".to_string());
    match std::env::var_os(OUT_DIR_ENV) {
        Some(root) => PathBuf::from(root).join(stem),
        None => PathBuf::from("runs").join(stem),
    }
}

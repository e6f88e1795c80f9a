//! Magnetization-vs-temperature sweeps with a critical-temperature estimate
//! per noise level.
//!
//! `cw_sweep` trains the factorized model at every (sigma, T) grid point of
//! the fully connected model. `nn2d_sweep` does the same on the 2D lattice,
//! or — when `sweep.solver = "mcmc_aligned"` — replaces training with a
//! fixed-budget Metropolis melting curve started from the fully aligned
//! state, which is the conventional way to trace |M|(T) with a chain.

use anyhow::Context;
use rayon::prelude::*;

use brain_core::rng::derive_seed;
use brain_core::{
    metropolis_chain, temperature_sweep, NoisyOracle, SpinConfig, SweepOptions, SweepPoint,
    SweepTable,
};

use crate::config::{ExperimentConfig, SweepSolver};
use crate::output::{fmt_f64, seeds_label, Artifact, CsvBuilder};

use super::{brain_config, build_hamiltonian, mcmc_config, sigmas, temperatures};

pub fn run_cw(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    run_brain_sweep(cfg, "fully connected")
}

pub fn run_nn2d(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let solver = cfg
        .sweep
        .as_ref()
        .and_then(|s| s.solver)
        .unwrap_or(SweepSolver::Brain);
    match solver {
        SweepSolver::Brain => run_brain_sweep(cfg, "2D lattice"),
        SweepSolver::McmcAligned => run_aligned_mcmc_sweep(cfg),
    }
}

/// Train the model at every grid point, one sweep per seed, then aggregate.
fn run_brain_sweep(cfg: &ExperimentConfig, label: &str) -> anyhow::Result<Vec<Artifact>> {
    let hamiltonian = build_hamiltonian(cfg)?;
    let sigma_list = sigmas(cfg)?;
    let temps = temperatures(cfg)?;
    let brain_section = cfg.brain.as_ref().context("missing [brain]")?;
    let options = SweepOptions {
        measure_samples: brain_section.measure_samples,
        averaging_k: super::averaging_k(cfg),
        warm_start: false,
    };

    let per_seed: Vec<Vec<SweepPoint>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> anyhow::Result<Vec<SweepPoint>> {
            let template = brain_config(brain_section, 1.0, seed);
            Ok(temperature_sweep(&hamiltonian, &sigma_list, &temps, &template, options)?)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let table = SweepTable::aggregate(&per_seed)?;
    emit_sweep_artifacts(cfg, &table, label)
}

/// Metropolis melting curve: every (sigma, T, seed) point is an independent
/// fixed-budget chain started fully aligned; |M| is averaged over the
/// retained post-burn-in states.
fn run_aligned_mcmc_sweep(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let hamiltonian = build_hamiltonian(cfg)?;
    let shape = hamiltonian.shape().context("sweep needs a spin model")?;
    let sigma_list = sigmas(cfg)?;
    let temps = temperatures(cfg)?;
    let mcmc_section = cfg.mcmc.as_ref().context("missing [mcmc]")?;
    let averaging_k = super::averaging_k(cfg);

    let per_seed: Vec<Vec<SweepPoint>> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> anyhow::Result<Vec<SweepPoint>> {
            let mut points = Vec::with_capacity(sigma_list.len() * temps.len());
            for (si, &sigma) in sigma_list.iter().enumerate() {
                for (ti, &temperature) in temps.iter().enumerate() {
                    let point_seed = derive_seed(seed, &[si as u64, ti as u64]);
                    let mut oracle = NoisyOracle::with_averaging(
                        hamiltonian.clone(),
                        sigma,
                        point_seed,
                        averaging_k,
                    )?;
                    let chain_cfg = mcmc_config(mcmc_section, 1.0 / temperature, point_seed);
                    let init = SpinConfig::all_up(shape);
                    let (_, record) = metropolis_chain(&mut oracle, &chain_cfg, init)?;
                    let mags = record.abs_mag_series();
                    let abs_magnetization = mags.iter().sum::<f64>() / mags.len().max(1) as f64;
                    points.push(SweepPoint {
                        temperature,
                        sigma,
                        abs_magnetization,
                        evals: record.total_evals(),
                        converged: true,
                    });
                }
            }
            Ok(points)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let table = SweepTable::aggregate(&per_seed)?;
    emit_sweep_artifacts(cfg, &table, "2D lattice, aligned-start metropolis")
}

fn emit_sweep_artifacts(
    cfg: &ExperimentConfig,
    table: &SweepTable,
    label: &str,
) -> anyhow::Result<Vec<Artifact>> {
    let all_seeds = seeds_label(&cfg.seeds);
    let mut artifacts = Vec::new();

    let mut sweep = CsvBuilder::new(&[
        "sigma",
        "temperature",
        "abs_mag_mean",
        "abs_mag_std",
        "mean_evals",
        "seeds",
    ]);
    for row in table.rows() {
        sweep.row(&[
            fmt_f64(row.sigma),
            fmt_f64(row.temperature),
            fmt_f64(row.abs_mag_mean),
            fmt_f64(row.abs_mag_std),
            fmt_f64(row.cum_evals),
            row.seeds.to_string(),
        ]);
    }
    artifacts.push(Artifact::new("sweep.csv", sweep.into_bytes(), all_seeds.clone()));

    let mut tc = CsvBuilder::new(&["sigma", "tc_estimate"]);
    let mut summary = format!("magnetization sweep on the {label}\n");
    for sigma in table.sigmas() {
        match table.estimate_tc(sigma) {
            Ok(t) => {
                tc.row(&[fmt_f64(sigma), fmt_f64(t)]);
                summary.push_str(&format!("sigma={sigma}: Tc estimate {t:.4}\n"));
            }
            Err(e) => {
                summary.push_str(&format!("sigma={sigma}: Tc estimate unavailable ({e})\n"));
            }
        }
    }
    artifacts.push(Artifact::new("tc.csv", tc.into_bytes(), all_seeds.clone()));
    artifacts.push(Artifact::new("summary.txt", summary.into_bytes(), all_seeds));
    Ok(artifacts)
}

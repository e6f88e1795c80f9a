//! Single-axis ablations: oracle averaging depth for the Metropolis chain,
//! and batch size for training.

use anyhow::Context;
use rayon::prelude::*;

use brain_core::brain::init_bernoulli;
use brain_core::metrics::mean_and_std;
use brain_core::rng::{derive_seed, seeded_rng, stream};
use brain_core::{averaged_metropolis, train, NoisyOracle, SpinConfig, VariationalFamily};

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, seeds_label, Artifact, CsvBuilder};

use super::{brain_config, build_hamiltonian, mcmc_config, single_beta, single_sigma, tag, tail_mean};

/// Metropolis with k-fold averaged measurements, one run per (k, seed).
/// Same step budget for every k, so deeper averaging pays k-fold more
/// evaluations for its cleaner energies — exactly the trade the ablation is
/// probing.
pub fn run_noise(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let hamiltonian = build_hamiltonian(cfg)?;
    let shape = hamiltonian.shape().context("ablation needs a spin model")?;
    let sigma = single_sigma(cfg)?;
    let beta = single_beta(cfg)?;
    let mcmc_section = cfg.mcmc.as_ref().context("missing [mcmc]")?;
    let ks = cfg
        .ablation
        .as_ref()
        .and_then(|a| a.averaging_ks.clone())
        .context("missing ablation.averaging_ks")?;

    let jobs: Vec<(u32, u64)> = ks
        .iter()
        .flat_map(|&k| cfg.seeds.iter().map(move |&s| (k, s)))
        .collect();
    let rows: Vec<(u32, u64, f64, f64, u64)> = jobs
        .par_iter()
        .map(|&(k, seed)| -> anyhow::Result<(u32, u64, f64, f64, u64)> {
            let job_seed = derive_seed(seed, &[k as u64]);
            let mut oracle =
                NoisyOracle::with_averaging(hamiltonian.clone(), sigma, job_seed, k)?;
            let chain_cfg = mcmc_config(mcmc_section, beta, job_seed);
            let init =
                SpinConfig::random(shape, &mut seeded_rng(job_seed, &[stream::INIT, tag::MCMC]));
            let (_, record) = averaged_metropolis(&mut oracle, &chain_cfg, init)?;
            let mags = record.abs_mag_series();
            let final_mag = mags.last().copied().unwrap_or(f64::NAN);
            Ok((k, seed, final_mag, tail_mean(&mags), record.total_evals()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let all_seeds = seeds_label(&cfg.seeds);
    let mut results = CsvBuilder::new(&["averaging_k", "seed", "final_abs_mag", "tail_abs_mag", "evals"]);
    for (k, seed, final_mag, tail, evals) in &rows {
        results.row(&[
            k.to_string(),
            seed.to_string(),
            fmt_f64(*final_mag),
            fmt_f64(*tail),
            evals.to_string(),
        ]);
    }

    let mut aggregate = CsvBuilder::new(&["averaging_k", "tail_abs_mag_mean", "tail_abs_mag_std", "mean_evals"]);
    let mut summary = format!(
        "averaged-measurement metropolis at sigma={sigma}, beta={beta}, {} steps per run\n",
        mcmc_section.steps
    );
    for &k in &ks {
        let tails: Vec<f64> = rows.iter().filter(|r| r.0 == k).map(|r| r.3).collect();
        let evals: Vec<f64> = rows.iter().filter(|r| r.0 == k).map(|r| r.4 as f64).collect();
        let (mean, std) = mean_and_std(&tails);
        let (mean_evals, _) = mean_and_std(&evals);
        aggregate.row(&[k.to_string(), fmt_f64(mean), fmt_f64(std), fmt_f64(mean_evals)]);
        summary.push_str(&format!(
            "k={k}: settled |M| = {mean:.4} +/- {std:.4} at {mean_evals:.0} evals\n"
        ));
    }

    Ok(vec![
        Artifact::new("results.csv", results.into_bytes(), all_seeds.clone()),
        Artifact::new("aggregate.csv", aggregate.into_bytes(), all_seeds.clone()),
        Artifact::new("summary.txt", summary.into_bytes(), all_seeds),
    ])
}

/// Training quality vs. batch size, one run per (S, seed): the settled |M|
/// is measured over fresh draws from each trained field.
pub fn run_sample_size(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let hamiltonian = build_hamiltonian(cfg)?;
    let n = hamiltonian.size().context("ablation needs a spin model")?;
    let sigma = single_sigma(cfg)?;
    let beta = single_beta(cfg)?;
    let averaging_k = super::averaging_k(cfg);
    let brain_section = cfg.brain.as_ref().context("missing [brain]")?;
    let batch_sizes = cfg
        .ablation
        .as_ref()
        .and_then(|a| a.batch_sizes.clone())
        .context("missing ablation.batch_sizes")?;

    let jobs: Vec<(usize, u64)> = batch_sizes
        .iter()
        .flat_map(|&s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let rows: Vec<(usize, u64, f64, u64, bool)> = jobs
        .par_iter()
        .map(|&(batch, seed)| -> anyhow::Result<(usize, u64, f64, u64, bool)> {
            let job_seed = derive_seed(seed, &[batch as u64]);
            let mut brain_cfg = brain_config(brain_section, beta, job_seed);
            brain_cfg.batch_size = batch;
            let q0 = init_bernoulli(n, brain_cfg.init, job_seed)?;
            let mut oracle = NoisyOracle::with_averaging(
                hamiltonian.clone(),
                sigma,
                derive_seed(job_seed, &[tag::BRAIN]),
                averaging_k,
            )?;
            let (trained, record) = train(q0, &mut oracle, &brain_cfg)?;
            let mut measure_rng = seeded_rng(job_seed, &[stream::MEASURE]);
            let mut mag = 0.0;
            for _ in 0..brain_section.measure_samples {
                mag += trained.sample(&mut measure_rng).magnetization().abs();
            }
            mag /= brain_section.measure_samples as f64;
            Ok((batch, seed, mag, record.total_evals(), record.converged()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let all_seeds = seeds_label(&cfg.seeds);
    let mut results = CsvBuilder::new(&["batch_size", "seed", "abs_mag", "evals", "converged"]);
    for (batch, seed, mag, evals, converged) in &rows {
        results.row(&[
            batch.to_string(),
            seed.to_string(),
            fmt_f64(*mag),
            evals.to_string(),
            converged.to_string(),
        ]);
    }

    let mut aggregate = CsvBuilder::new(&["batch_size", "abs_mag_mean", "abs_mag_std", "mean_evals"]);
    let mut summary = format!("training quality vs. batch size at sigma={sigma}, beta={beta}\n");
    for &batch in &batch_sizes {
        let mags: Vec<f64> = rows.iter().filter(|r| r.0 == batch).map(|r| r.2).collect();
        let evals: Vec<f64> = rows.iter().filter(|r| r.0 == batch).map(|r| r.3 as f64).collect();
        let (mean, std) = mean_and_std(&mags);
        let (mean_evals, _) = mean_and_std(&evals);
        aggregate.row(&[batch.to_string(), fmt_f64(mean), fmt_f64(std), fmt_f64(mean_evals)]);
        summary.push_str(&format!(
            "S={batch}: measured |M| = {mean:.4} +/- {std:.4} at {mean_evals:.0} evals\n"
        ));
    }

    Ok(vec![
        Artifact::new("results.csv", results.into_bytes(), all_seeds.clone()),
        Artifact::new("aggregate.csv", aggregate.into_bytes(), all_seeds.clone()),
        Artifact::new("summary.txt", summary.into_bytes(), all_seeds),
    ])
}

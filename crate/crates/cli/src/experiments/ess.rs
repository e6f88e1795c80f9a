//! Sampling-efficiency comparison: normalized effective sample size of
//! trained-model draws vs. a Metropolis chain granted the same oracle budget.
//!
//! The trained model's ESS is the importance-sampling measure over fresh
//! draws (exact energies at analysis time). The chain's ESS comes from the
//! integrated autocorrelation time of its post-burn-in energy trace. The
//! chain's step budget is derived from the training run's oracle evaluation
//! count, so both methods spent the same number of oracle calls; the
//! `[mcmc]` section contributes burn-in fraction, thinning, and caching, but
//! its step count is ignored here.

use anyhow::Context;
use rayon::prelude::*;

use brain_core::brain::init_bernoulli;
use brain_core::metrics::{ess_autocorr, ess_for_samples};
use brain_core::rng::{derive_seed, seeded_rng, stream};
use brain_core::{metropolis_chain, train, McmcConfig, NoisyOracle, SpinConfig, VariationalFamily};

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, seeds_label, Artifact, CsvBuilder};

use super::{brain_config, build_hamiltonian, single_beta, single_sigma, tag};

struct SeedEss {
    seed: u64,
    brain_ess: f64,
    brain_evals: u64,
    brain_draws: usize,
    mcmc_ess: f64,
    mcmc_evals: u64,
    mcmc_samples: usize,
    ratio: f64,
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let hamiltonian = build_hamiltonian(cfg)?;
    let n = hamiltonian.size().context("ess comparison needs a spin model")?;
    let shape = hamiltonian.shape().context("ess comparison needs a spin model")?;
    let sigma = single_sigma(cfg)?;
    let beta = single_beta(cfg)?;
    let averaging_k = super::averaging_k(cfg);
    let brain_section = cfg.brain.as_ref().context("missing [brain]")?;
    let mcmc_section = cfg.mcmc.as_ref().context("missing [mcmc]")?;

    let results: Vec<SeedEss> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> anyhow::Result<SeedEss> {
            let brain_cfg = brain_config(brain_section, beta, seed);
            let q0 = init_bernoulli(n, brain_cfg.init, seed)?;
            let mut oracle = NoisyOracle::with_averaging(
                hamiltonian.clone(),
                sigma,
                derive_seed(seed, &[tag::BRAIN]),
                averaging_k,
            )?;
            let (trained, record) = train(q0, &mut oracle, &brain_cfg)?;
            let brain_evals = record.total_evals();

            let mut measure_rng = seeded_rng(seed, &[stream::MEASURE]);
            let draws: Vec<SpinConfig> = (0..brain_section.measure_samples)
                .map(|_| trained.sample(&mut measure_rng))
                .collect();
            let brain_ess = ess_for_samples(&trained, &hamiltonian, &draws, beta)?;

            // Grant the chain the same oracle budget. A plain chain spends
            // 2k calls per step; with energy caching, k per step plus the
            // initial read.
            let per_step = if mcmc_section.cache_current_energy { 1 } else { 2 };
            let steps =
                ((brain_evals / (per_step * averaging_k as u64)) as usize).max(100);
            let burn_in = steps / 5;
            let mut chain_cfg = McmcConfig::new(beta, steps, seed)
                .with_burn_in(burn_in)
                .with_thinning(mcmc_section.thinning as usize);
            if mcmc_section.cache_current_energy {
                chain_cfg = chain_cfg.with_cached_energy();
            }
            let mut chain_oracle = NoisyOracle::with_averaging(
                hamiltonian.clone(),
                sigma,
                derive_seed(seed, &[tag::MCMC]),
                averaging_k,
            )?;
            let init =
                SpinConfig::random(shape, &mut seeded_rng(seed, &[stream::INIT, tag::MCMC]));
            let (chain_samples, chain_record) =
                metropolis_chain(&mut chain_oracle, &chain_cfg, init)?;
            let energies: Vec<f64> = chain_samples
                .iter()
                .map(|s| hamiltonian.energy(s))
                .collect::<Result<_, _>>()?;
            let mcmc_ess = ess_autocorr(&energies)?;

            Ok(SeedEss {
                seed,
                brain_ess,
                brain_evals,
                brain_draws: draws.len(),
                mcmc_ess,
                mcmc_evals: chain_record.total_evals(),
                mcmc_samples: chain_samples.len(),
                ratio: brain_ess / mcmc_ess,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let all_seeds = seeds_label(&cfg.seeds);
    let mut csv = CsvBuilder::new(&["seed", "method", "normalized_ess", "evals", "samples"]);
    for r in &results {
        csv.row(&[
            r.seed.to_string(),
            "brain".into(),
            fmt_f64(r.brain_ess),
            r.brain_evals.to_string(),
            r.brain_draws.to_string(),
        ]);
        csv.row(&[
            r.seed.to_string(),
            "metropolis".into(),
            fmt_f64(r.mcmc_ess),
            r.mcmc_evals.to_string(),
            r.mcmc_samples.to_string(),
        ]);
    }

    let mut ratios: Vec<f64> = results.iter().map(|r| r.ratio).collect();
    ratios.sort_by(|a, b| a.total_cmp(b));
    let median = ratios[ratios.len() / 2];
    let mut summary = format!(
        "normalized effective sample size at beta={beta}, sigma={sigma} ({n} spins)\n"
    );
    for r in &results {
        summary.push_str(&format!(
            "seed {}: model {:.6} over {} draws ({} evals) vs chain {:.6} over {} samples \
             ({} evals); ratio {:.1}\n",
            r.seed,
            r.brain_ess,
            r.brain_draws,
            r.brain_evals,
            r.mcmc_ess,
            r.mcmc_samples,
            r.mcmc_evals,
            r.ratio
        ));
    }
    summary.push_str(&format!("median ESS ratio (model/chain): {median:.1}\n"));

    Ok(vec![
        Artifact::new("results.csv", csv.into_bytes(), all_seeds.clone()),
        Artifact::new("summary.txt", summary.into_bytes(), all_seeds),
    ])
}

//! Convergence race: training vs. Metropolis on the same noisy oracle.
//!
//! Both solvers run at one (sigma, T) point per seed. The chain's settled
//! |M| (tail mean of its trace) defines the solution level; training's
//! time-to-solution is the evaluation count at which its smoothed |M| first
//! reaches that level. The headline ratio divides the chain's full
//! evaluation budget — the cost actually paid to produce its settled state —
//! by training's crossing point, so big numbers favor training. The chain's
//! own first crossing of the level is kept as a diagnostic column (a wobbly
//! trace can brush its settled mean long before it stops improving).

use anyhow::Context;
use rayon::prelude::*;

use brain_core::brain::init_bernoulli;
use brain_core::metrics::time_to_solution;
use brain_core::rng::{derive_seed, seeded_rng, stream};
use brain_core::{metropolis_chain, train, NoisyOracle, RunRecord, SpinConfig};

use crate::config::ExperimentConfig;
use crate::output::{fmt_f64, run_record_csv, seeds_label, Artifact, CsvBuilder};

use super::{brain_config, build_hamiltonian, mcmc_config, single_beta, single_sigma, tag, tail_mean};

struct SeedRace {
    seed: u64,
    solution_level: f64,
    brain_final_mag: f64,
    tts_brain: Option<u64>,
    /// Evals at which the chain's smoothed |M| first brushed its own settled
    /// level; None means the smoothed trace never got there (asymptotic
    /// approach). Diagnostic only — the headline ratio uses the full budget.
    tts_mcmc: Option<u64>,
    mcmc_total_evals: u64,
    brain_record: RunRecord,
    mcmc_record: RunRecord,
}

pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    let hamiltonian = build_hamiltonian(cfg)?;
    let n = hamiltonian.size().context("race needs a spin model")?;
    let shape = hamiltonian.shape().context("race needs a spin model")?;
    let sigma = single_sigma(cfg)?;
    let beta = single_beta(cfg)?;
    let averaging_k = super::averaging_k(cfg);
    let brain_section = cfg.brain.as_ref().context("missing [brain]")?;
    let mcmc_section = cfg.mcmc.as_ref().context("missing [mcmc]")?;

    let results: Vec<SeedRace> = cfg
        .seeds
        .par_iter()
        .map(|&seed| -> anyhow::Result<SeedRace> {
            let brain_cfg = brain_config(brain_section, beta, seed);
            let q0 = init_bernoulli(n, brain_cfg.init, seed)?;
            let mut oracle = NoisyOracle::with_averaging(
                hamiltonian.clone(),
                sigma,
                derive_seed(seed, &[tag::BRAIN]),
                averaging_k,
            )?;
            let (_, brain_record) = train(q0, &mut oracle, &brain_cfg)?;

            let mut chain_oracle = NoisyOracle::with_averaging(
                hamiltonian.clone(),
                sigma,
                derive_seed(seed, &[tag::MCMC]),
                averaging_k,
            )?;
            let chain_cfg = mcmc_config(mcmc_section, beta, seed);
            let init =
                SpinConfig::random(shape, &mut seeded_rng(seed, &[stream::INIT, tag::MCMC]));
            let (_, mcmc_record) = metropolis_chain(&mut chain_oracle, &chain_cfg, init)?;

            let solution_level = tail_mean(&mcmc_record.abs_mag_series());
            let tts_brain = time_to_solution(&brain_record, solution_level);
            let tts_mcmc = time_to_solution(&mcmc_record, solution_level);
            let brain_final_mag = tail_mean(&brain_record.abs_mag_series());
            Ok(SeedRace {
                seed,
                solution_level,
                brain_final_mag,
                tts_brain,
                tts_mcmc,
                mcmc_total_evals: mcmc_record.total_evals(),
                brain_record,
                mcmc_record,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;

    let all_seeds = seeds_label(&cfg.seeds);
    let mut artifacts = Vec::new();
    let mut race = CsvBuilder::new(&[
        "seed",
        "solution_level",
        "brain_tail_abs_mag",
        "tts_brain_evals",
        "mcmc_budget_evals",
        "mcmc_first_crossing_evals",
        "eval_ratio",
    ]);
    let mut ratios = Vec::new();
    for r in &results {
        let ratio = r.tts_brain.map(|b| r.mcmc_total_evals as f64 / b as f64);
        if let Some(x) = ratio {
            ratios.push(x);
        }
        race.row(&[
            r.seed.to_string(),
            fmt_f64(r.solution_level),
            fmt_f64(r.brain_final_mag),
            r.tts_brain.map_or("-".into(), |v| v.to_string()),
            r.mcmc_total_evals.to_string(),
            r.tts_mcmc.map_or("-".into(), |v| v.to_string()),
            ratio.map_or("-".into(), fmt_f64),
        ]);
        artifacts.push(Artifact::new(
            format!("brain_seed{}.csv", r.seed),
            run_record_csv(&r.brain_record),
            r.seed.to_string(),
        ));
        artifacts.push(Artifact::new(
            format!("mcmc_seed{}.csv", r.seed),
            run_record_csv(&r.mcmc_record),
            r.seed.to_string(),
        ));
    }
    artifacts.push(Artifact::new("race.csv", race.into_bytes(), all_seeds.clone()));

    ratios.sort_by(|a, b| a.total_cmp(b));
    let median = if ratios.is_empty() {
        None
    } else {
        Some(ratios[ratios.len() / 2])
    };
    let mut summary = String::new();
    summary.push_str(&format!(
        "convergence race at sigma={sigma}, beta={beta}: {} spins, {} seeds\n",
        n,
        cfg.seeds.len()
    ));
    for r in &results {
        summary.push_str(&format!(
            "seed {}: chain settles at |M|={:.4} after {} evals; training crossed that \
             level at {} evals and finished at |M|={:.4}\n",
            r.seed,
            r.solution_level,
            r.mcmc_total_evals,
            r.tts_brain.map_or("never (within budget)".into(), |v| v.to_string()),
            r.brain_final_mag,
        ));
    }
    match median {
        Some(m) => summary.push_str(&format!(
            "median evaluation-count ratio (chain budget / training crossing): {m:.1}\n"
        )),
        None => summary.push_str("training never reached the chain's settled level on any seed\n"),
    }
    artifacts.push(Artifact::new("summary.txt", summary.into_bytes(), all_seeds));
    Ok(artifacts)
}

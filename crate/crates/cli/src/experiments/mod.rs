//! Experiment drivers.
//!
//! Each submodule's `run` turns one validated [`ExperimentConfig`] into a set
//! of in-memory [`Artifact`]s; the binary writes them (plus the manifest)
//! afterwards. Independent (point, seed) jobs go through rayon, so `--workers`
//! bounds the parallelism, and every job derives its own oracle and RNG
//! streams from the config seeds — results do not depend on the worker count.

mod ablations;
mod double_well;
mod ess;
mod pt;
mod race;
mod scaling;
mod six_spin;
mod sweeps;
mod variance;

use anyhow::Context;

use brain_core::brain::InitScheme;
use brain_core::{Boundary, BrainConfig, Hamiltonian, McmcConfig};

use crate::config::{
    BrainSection, Experiment, ExperimentConfig, HamiltonianKind, McmcSection,
};
use crate::output::Artifact;

/// Run the experiment a validated config describes.
pub fn run(cfg: &ExperimentConfig) -> anyhow::Result<Vec<Artifact>> {
    match cfg.experiment {
        Experiment::SixSpin => six_spin::run(cfg),
        Experiment::DoubleWell => double_well::run(cfg),
        Experiment::CwSweep => sweeps::run_cw(cfg),
        Experiment::Nn2dSweep => sweeps::run_nn2d(cfg),
        Experiment::ConvergenceRace => race::run(cfg),
        Experiment::NoiseAblation => ablations::run_noise(cfg),
        Experiment::SampleSizeAblation => ablations::run_sample_size(cfg),
        Experiment::Scaling => scaling::run(cfg),
        Experiment::EssCompare => ess::run(cfg),
        Experiment::PtCompare => pt::run(cfg),
        Experiment::VarianceCheck => variance::run(cfg),
    }
}

/// Seed-derivation tags that keep the trainer's and the chain's oracles on
/// disjoint noise streams within one seed's job.
pub(crate) mod tag {
    pub const BRAIN: u64 = 1;
    pub const MCMC: u64 = 2;
}

/// Build the configured Hamiltonian (defaults: J = 1, periodic boundary).
pub(crate) fn build_hamiltonian(cfg: &ExperimentConfig) -> anyhow::Result<Hamiltonian> {
    let section = cfg
        .hamiltonian
        .as_ref()
        .context("config has no [hamiltonian] section")?;
    let coupling = section.coupling.unwrap_or(1.0);
    let boundary = match section.boundary.as_deref() {
        Some("open") => Boundary::Open,
        _ => Boundary::Periodic,
    };
    let h = match section.kind {
        HamiltonianKind::CurieWeiss => {
            Hamiltonian::curie_weiss(section.size.context("hamiltonian.size missing")?, coupling)?
        }
        HamiltonianKind::Chain1d => Hamiltonian::chain_1d(
            section.size.context("hamiltonian.size missing")?,
            coupling,
            boundary,
        )?,
        HamiltonianKind::Nn2d => Hamiltonian::nearest_neighbor_2d(
            section.size.context("hamiltonian.size missing")?,
            coupling,
            boundary,
        )?,
        HamiltonianKind::DoubleWell => Hamiltonian::double_well(
            section.quartic.unwrap_or(1.0),
            section.tilt.unwrap_or(0.2),
            section.x0.unwrap_or(1.0),
        )?,
    };
    Ok(h)
}

/// The double-well potential for the continuous experiment; the section is
/// optional there, so absence means the benchmark defaults.
pub(crate) fn build_double_well(cfg: &ExperimentConfig) -> anyhow::Result<Hamiltonian> {
    if cfg.hamiltonian.is_some() {
        build_hamiltonian(cfg)
    } else {
        Ok(Hamiltonian::double_well_default())
    }
}

/// Translate the `[brain]` section into a trainer config at the given
/// inverse temperature and seed.
pub(crate) fn brain_config(section: &BrainSection, beta: f64, seed: u64) -> BrainConfig {
    let mut out = BrainConfig::new(
        beta,
        section.batch_size,
        section.learning_rate,
        section.max_iterations,
    )
    .with_seed(seed)
    .with_init(init_scheme(section));
    if let Some(window) = section.convergence_window {
        out.convergence_window = window;
    }
    out.convergence_tolerance = section.convergence_tolerance;
    out
}

/// Initialization scheme from the configured jitter amplitude.
/// Zero amplitude selects the exactly uniform field.
pub(crate) fn init_scheme(section: &BrainSection) -> InitScheme {
    match section.init_amplitude {
        Some(a) if a == 0.0 => InitScheme::Uniform,
        Some(a) => InitScheme::Perturbed { amplitude: a },
        None => InitScheme::Perturbed { amplitude: 0.25 },
    }
}

/// Translate the `[mcmc]` section into a chain config.
pub(crate) fn mcmc_config(section: &McmcSection, beta: f64, seed: u64) -> McmcConfig {
    let mut out = McmcConfig::new(beta, section.steps as usize, seed)
        .with_burn_in(section.burn_in as usize)
        .with_thinning(section.thinning as usize);
    if section.cache_current_energy {
        out = out.with_cached_energy();
    }
    out
}

/// The single noise level of experiments that run at one sigma.
pub(crate) fn single_sigma(cfg: &ExperimentConfig) -> anyhow::Result<f64> {
    let noise = cfg.noise.as_ref().context("config has no [noise] section")?;
    noise.sigmas.first().copied().context("noise.sigmas is empty")
}

/// All configured noise levels.
pub(crate) fn sigmas(cfg: &ExperimentConfig) -> anyhow::Result<Vec<f64>> {
    Ok(cfg
        .noise
        .as_ref()
        .context("config has no [noise] section")?
        .sigmas
        .clone())
}

/// Oracle averaging depth (1 unless configured).
pub(crate) fn averaging_k(cfg: &ExperimentConfig) -> u32 {
    cfg.noise.as_ref().map_or(1, |n| n.averaging_k)
}

/// The single temperature of experiments that run at one point, as beta.
pub(crate) fn single_beta(cfg: &ExperimentConfig) -> anyhow::Result<f64> {
    let temps = cfg
        .temperature
        .as_ref()
        .context("config has no [temperature] section")?
        .temperatures();
    let t = temps.first().copied().context("temperature list is empty")?;
    Ok(1.0 / t)
}

/// The configured temperature list.
pub(crate) fn temperatures(cfg: &ExperimentConfig) -> anyhow::Result<Vec<f64>> {
    let temps = cfg
        .temperature
        .as_ref()
        .context("config has no [temperature] section")?
        .temperatures();
    anyhow::ensure!(!temps.is_empty(), "temperature list is empty");
    Ok(temps)
}

/// Mean of the trailing 10% of a series (at least one element): the
/// "settled" value of a noisy trajectory.
pub(crate) fn tail_mean(series: &[f64]) -> f64 {
    if series.is_empty() {
        return f64::NAN;
    }
    let tail = (series.len() / 10).max(1);
    let slice = &series[series.len() - tail..];
    slice.iter().sum::<f64>() / tail as f64
}

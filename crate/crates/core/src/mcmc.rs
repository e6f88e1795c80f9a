//! Markov-chain baselines: single-spin-flip Metropolis under noisy
//! measurements, energy-averaged Metropolis, simulated annealing, and
//! replica exchange.
//!
//! All samplers evaluate energies exclusively through a [`NoisyOracle`], so
//! their acceptance decisions see exactly the same corrupted readings the
//! variational trainer does. By default every step re-measures BOTH the
//! current and the proposed state (two oracle calls): caching the current
//! state's reading would let one lucky low draw anchor the chain
//! indefinitely. The cached one-call variant is available behind
//! [`McmcConfig::cache_current_energy`] for ablation.

use crate::error::{Error, Result};
use crate::oracle::NoisyOracle;
use crate::record::{IterationRow, RunRecord};
use crate::rng::{seeded_rng, stream};
use crate::spin::SpinConfig;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Parameters of a single Metropolis chain.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcConfig {
    /// Inverse temperature in the acceptance rule.
    pub beta: f64,
    /// Total proposal steps.
    pub steps: usize,
    /// Steps discarded before any sample is retained.
    pub burn_in: usize,
    /// Keep every `thinning`-th post-burn-in state.
    pub thinning: usize,
    /// Seed of the chain's proposal/acceptance stream.
    pub seed: u64,
    /// Ablation flag: reuse the current state's last noisy reading instead
    /// of re-measuring it every step (one oracle call per step instead of
    /// two).
    pub cache_current_energy: bool,
}

impl McmcConfig {
    /// Chain with no burn-in, no thinning, and the default two-call
    /// measurement protocol.
    pub fn new(beta: f64, steps: usize, seed: u64) -> Self {
        Self {
            beta,
            steps,
            burn_in: 0,
            thinning: 1,
            seed,
            cache_current_energy: false,
        }
    }

    /// Same chain with the first `burn_in` steps discarded.
    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    /// Same chain keeping every `thinning`-th retained state.
    pub fn with_thinning(mut self, thinning: usize) -> Self {
        self.thinning = thinning;
        self
    }

    /// Same chain with the cached one-call measurement variant.
    pub fn with_cached_energy(mut self) -> Self {
        self.cache_current_energy = true;
        self
    }

    /// Check every invariant the samplers rely on.
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::invalid(format!(
                "inverse temperature {} must be finite and nonnegative",
                self.beta
            )));
        }
        if self.steps == 0 {
            return Err(Error::invalid("chain needs at least one step"));
        }
        if self.burn_in >= self.steps {
            return Err(Error::invalid(format!(
                "burn-in {} must be smaller than the step budget {}",
                self.burn_in, self.steps
            )));
        }
        if self.thinning == 0 {
            return Err(Error::invalid("thinning must be at least 1"));
        }
        Ok(())
    }
}

/// Metropolis acceptance probability min(1, exp(-beta * delta)) for an
/// energy change `delta`. Any nonpositive delta is accepted with
/// probability exactly 1.
pub fn acceptance_probability(beta: f64, delta: f64) -> f64 {
    if delta <= 0.0 {
        1.0
    } else {
        (-beta * delta).exp()
    }
}

/// Replica-exchange acceptance probability
/// min(1, exp((beta_i - beta_j)(e_i - e_j))). Equal temperatures make the
/// exponent zero, so the swap is accepted with probability exactly 1.
pub fn swap_probability(beta_i: f64, beta_j: f64, e_i: f64, e_j: f64) -> f64 {
    let exponent = (beta_i - beta_j) * (e_i - e_j);
    if exponent >= 0.0 {
        1.0
    } else {
        exponent.exp()
    }
}

/// One single-spin-flip Metropolis step. Returns the noisy energy
/// associated with the state the chain occupies after the step (from this
/// step's own reads) and whether the proposal was accepted.
fn mh_step(
    state: &mut SpinConfig,
    beta: f64,
    oracle: &mut NoisyOracle,
    rng: &mut ChaCha8Rng,
    cached: &mut Option<f64>,
    use_cache: bool,
) -> Result<(f64, bool)> {
    let site = rng.random_range(0..state.len());
    let e_current = match (use_cache, &*cached) {
        (true, Some(e)) => *e,
        _ => oracle.measure(state)?,
    };
    state.flip(site);
    let e_proposed = oracle.measure(state)?;
    let alpha = acceptance_probability(beta, e_proposed - e_current);
    // The uniform draw happens even for certain acceptance so the stream
    // stays aligned across protocol variants.
    let u: f64 = rng.random();
    if u < alpha {
        *cached = Some(e_proposed);
        Ok((e_proposed, true))
    } else {
        state.flip(site);
        *cached = Some(e_current);
        Ok((e_current, false))
    }
}

/// Gaussian random-walk Metropolis step for a scalar coordinate.
fn mh_step_scalar(
    state: &mut f64,
    beta: f64,
    proposal_std: f64,
    oracle: &mut NoisyOracle,
    rng: &mut ChaCha8Rng,
    cached: &mut Option<f64>,
    use_cache: bool,
) -> Result<(f64, bool)> {
    let z: f64 = rng.sample(StandardNormal);
    let proposed = *state + proposal_std * z;
    let e_current = match (use_cache, &*cached) {
        (true, Some(e)) => *e,
        _ => oracle.measure_scalar(*state)?,
    };
    let e_proposed = oracle.measure_scalar(proposed)?;
    let alpha = acceptance_probability(beta, e_proposed - e_current);
    let u: f64 = rng.random();
    if u < alpha {
        *state = proposed;
        *cached = Some(e_proposed);
        Ok((e_proposed, true))
    } else {
        *cached = Some(e_current);
        Ok((e_current, false))
    }
}

fn spins_as_params(state: &SpinConfig) -> Vec<f64> {
    state.spins().iter().map(|&s| f64::from(s)).collect()
}

/// Run a single-spin-flip Metropolis chain against the oracle.
///
/// Returns the retained (post-burn-in, thinned) states and a run record
/// whose rows carry the noisy reward trace; `final_params` holds the
/// trajectory's last state as ±1 values. The record is marked converged on
/// completion since chains always run their full budget.
pub fn metropolis_chain(
    oracle: &mut NoisyOracle,
    cfg: &McmcConfig,
    init: SpinConfig,
) -> Result<(Vec<SpinConfig>, RunRecord)> {
    cfg.validate()?;
    match oracle.hamiltonian().size() {
        Some(n) if n == init.len() => {}
        Some(n) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: init.len(),
            })
        }
        None => {
            return Err(Error::Unsupported(
                "spin chains need a spin hamiltonian; use the scalar chain for potentials",
            ))
        }
    }

    let mut rng = seeded_rng(cfg.seed, &[stream::SOLVER]);
    let mut state = init;
    let mut cached = None;
    let retained = (cfg.steps - cfg.burn_in).div_ceil(cfg.thinning);
    let mut samples = Vec::with_capacity(retained);
    let mut rows = Vec::with_capacity(retained);
    for step in 0..cfg.steps {
        let (e_state, _) = mh_step(
            &mut state,
            cfg.beta,
            oracle,
            &mut rng,
            &mut cached,
            cfg.cache_current_energy,
        )?;
        if step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0 {
            samples.push(state.clone());
            rows.push(IterationRow {
                iter: step as u64,
                mean_reward: cfg.beta * e_state,
                loss_est: cfg.beta * e_state,
                batch_abs_mag: state.magnetization().abs(),
                cum_evals: oracle.eval_count(),
            });
        }
    }
    let final_params = spins_as_params(&state);
    Ok((samples, RunRecord::new(rows, final_params, true)))
}

/// Metropolis chain whose every energy reading is a k-fold average; the
/// averaging depth lives in the oracle, so this simply documents and
/// delegates to [`metropolis_chain`]. With `averaging_k = 1` the trajectory
/// is identical to the plain chain under the same seed.
pub fn averaged_metropolis(
    oracle: &mut NoisyOracle,
    cfg: &McmcConfig,
    init: SpinConfig,
) -> Result<(Vec<SpinConfig>, RunRecord)> {
    metropolis_chain(oracle, cfg, init)
}

/// Gaussian random-walk Metropolis chain over a scalar coordinate, for
/// continuous potentials.
pub fn metropolis_chain_scalar(
    oracle: &mut NoisyOracle,
    cfg: &McmcConfig,
    init: f64,
    proposal_std: f64,
) -> Result<(Vec<f64>, RunRecord)> {
    cfg.validate()?;
    if !init.is_finite() {
        return Err(Error::NonFinite("initial coordinate"));
    }
    if !proposal_std.is_finite() || proposal_std <= 0.0 {
        return Err(Error::invalid(format!(
            "proposal width {proposal_std} must be positive and finite"
        )));
    }
    if oracle.hamiltonian().size().is_some() {
        return Err(Error::Unsupported(
            "scalar chains need a continuous potential; use the spin chain for spin models",
        ));
    }

    let mut rng = seeded_rng(cfg.seed, &[stream::SOLVER]);
    let mut state = init;
    let mut cached = None;
    let retained = (cfg.steps - cfg.burn_in).div_ceil(cfg.thinning);
    let mut samples = Vec::with_capacity(retained);
    let mut rows = Vec::with_capacity(retained);
    for step in 0..cfg.steps {
        let (e_state, _) = mh_step_scalar(
            &mut state,
            cfg.beta,
            proposal_std,
            oracle,
            &mut rng,
            &mut cached,
            cfg.cache_current_energy,
        )?;
        if step >= cfg.burn_in && (step - cfg.burn_in) % cfg.thinning == 0 {
            samples.push(state);
            rows.push(IterationRow {
                iter: step as u64,
                mean_reward: cfg.beta * e_state,
                loss_est: cfg.beta * e_state,
                batch_abs_mag: state.abs(),
                cum_evals: oracle.eval_count(),
            });
        }
    }
    Ok((samples, RunRecord::new(rows, vec![state], true)))
}

/// Anneal through a nondecreasing-beta schedule of Metropolis stages and
/// return the configuration with the lowest measured (noisy) energy seen,
/// along with the full trace. `final_params` in the record is the
/// trajectory's end state, which is generally not the best state.
pub fn simulated_annealing(
    oracle: &mut NoisyOracle,
    schedule: &[(f64, usize)],
    init: SpinConfig,
    seed: u64,
) -> Result<(SpinConfig, RunRecord)> {
    if schedule.is_empty() {
        return Err(Error::invalid("annealing schedule must have at least one stage"));
    }
    for pair in schedule.windows(2) {
        if pair[1].0 < pair[0].0 {
            return Err(Error::invalid(format!(
                "annealing betas must be nondecreasing, got {} after {}",
                pair[1].0, pair[0].0
            )));
        }
    }
    for &(beta, steps) in schedule {
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid(format!(
                "annealing inverse temperature {beta} must be finite and nonnegative"
            )));
        }
        if steps == 0 {
            return Err(Error::invalid("every annealing stage needs at least one step"));
        }
    }
    match oracle.hamiltonian().size() {
        Some(n) if n == init.len() => {}
        Some(n) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: init.len(),
            })
        }
        None => {
            return Err(Error::Unsupported(
                "annealing is defined over spin configurations",
            ))
        }
    }

    let mut rng = seeded_rng(seed, &[stream::SOLVER]);
    let mut state = init;
    let mut cached = None;
    let mut best = state.clone();
    let mut best_energy = f64::INFINITY;
    let total: usize = schedule.iter().map(|&(_, s)| s).sum();
    let mut rows = Vec::with_capacity(total);
    let mut step = 0u64;
    for &(beta, stage_steps) in schedule {
        for _ in 0..stage_steps {
            let (e_state, _) = mh_step(&mut state, beta, oracle, &mut rng, &mut cached, false)?;
            if e_state < best_energy {
                best_energy = e_state;
                best = state.clone();
            }
            rows.push(IterationRow {
                iter: step,
                mean_reward: beta * e_state,
                loss_est: beta * e_state,
                batch_abs_mag: state.magnetization().abs(),
                cum_evals: oracle.eval_count(),
            });
            step += 1;
        }
    }
    let final_params = spins_as_params(&state);
    Ok((best, RunRecord::new(rows, final_params, true)))
}

/// Parameters of a replica-exchange run.
#[derive(Debug, Clone, PartialEq)]
pub struct PtConfig {
    /// Number of replicas (R).
    pub replicas: usize,
    /// Coldest ladder temperature.
    pub temp_min: f64,
    /// Hottest ladder temperature.
    pub temp_max: f64,
    /// Steps each replica advances between swap attempts.
    pub swap_interval: usize,
    /// Total steps per replica.
    pub steps: usize,
    /// Base seed; replicas and the swap decision use disjoint streams.
    pub seed: u64,
}

impl Default for PtConfig {
    fn default() -> Self {
        Self {
            replicas: 30,
            temp_min: 0.33,
            temp_max: 2.0,
            swap_interval: 4000,
            steps: 400_000,
            seed: 0,
        }
    }
}

impl PtConfig {
    /// Check every invariant the replica-exchange driver relies on.
    pub fn validate(&self) -> Result<()> {
        if self.replicas < 2 {
            return Err(Error::invalid(format!(
                "replica exchange needs at least 2 replicas, got {}",
                self.replicas
            )));
        }
        if !self.temp_min.is_finite() || !self.temp_max.is_finite() || self.temp_min <= 0.0 {
            return Err(Error::invalid("ladder temperatures must be positive and finite"));
        }
        if self.temp_min >= self.temp_max {
            return Err(Error::invalid(format!(
                "ladder must increase strictly: min {} vs max {}",
                self.temp_min, self.temp_max
            )));
        }
        if self.swap_interval == 0 {
            return Err(Error::invalid("swap interval must be at least 1"));
        }
        if self.steps == 0 {
            return Err(Error::invalid("replicas need at least one step"));
        }
        Ok(())
    }

    /// Geometric temperature ladder from `temp_min` to `temp_max`,
    /// strictly increasing, endpoints exact.
    pub fn temperature_ladder(&self) -> Vec<f64> {
        let r = self.replicas;
        let ratio = self.temp_max / self.temp_min;
        (0..r)
            .map(|i| {
                if i == r - 1 {
                    self.temp_max
                } else {
                    self.temp_min * ratio.powf(i as f64 / (r - 1) as f64)
                }
            })
            .collect()
    }
}

/// One attempted replica swap, as logged to
/// `replica_i, replica_j, accepted, step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapEvent {
    /// Per-replica step count at which the swap was attempted.
    pub step: u64,
    /// Colder member of the adjacent pair.
    pub replica_i: usize,
    /// Hotter member of the adjacent pair.
    pub replica_j: usize,
    /// Whether the configurations were exchanged.
    pub accepted: bool,
}

/// Final summary of one replica.
#[derive(Debug, Clone, PartialEq)]
pub struct PtReplica {
    /// The replica's ladder temperature.
    pub temperature: f64,
    /// |M| of the state the replica ended in.
    pub final_abs_magnetization: f64,
    /// Mean |M| over the swap-barrier checkpoints.
    pub mean_abs_magnetization: f64,
    /// The state the replica ended in.
    pub final_state: SpinConfig,
}

/// Output of a replica-exchange run.
#[derive(Debug, Clone, PartialEq)]
pub struct PtRun {
    /// Per-replica summaries, coldest first (ladder order).
    pub replicas: Vec<PtReplica>,
    /// Every attempted swap, in order.
    pub swaps: Vec<SwapEvent>,
}

impl PtRun {
    /// Fraction of attempted swaps that were accepted (1.0 when none were
    /// attempted, which only happens if the interval exceeds the budget).
    pub fn swap_acceptance_rate(&self) -> f64 {
        if self.swaps.is_empty() {
            return 1.0;
        }
        self.swaps.iter().filter(|s| s.accepted).count() as f64 / self.swaps.len() as f64
    }
}

/// Replica exchange over a geometric temperature ladder.
///
/// `make_oracle` is called once per replica index and must produce oracles
/// over the same hamiltonian and noise level but independent noise streams
/// (e.g. by deriving per-replica seeds). Replicas advance `swap_interval`
/// steps between barriers; at each barrier adjacent pairs of alternating
/// parity attempt to exchange configurations using fresh noisy reads from
/// both replicas' oracles.
pub fn parallel_tempering(
    mut make_oracle: impl FnMut(usize) -> Result<NoisyOracle>,
    cfg: &PtConfig,
) -> Result<PtRun> {
    cfg.validate()?;
    let mut oracles = Vec::with_capacity(cfg.replicas);
    for r in 0..cfg.replicas {
        oracles.push(make_oracle(r)?);
    }
    let first = &oracles[0];
    let shape = first.hamiltonian().shape().ok_or(Error::Unsupported(
        "replica exchange is defined over spin hamiltonians",
    ))?;
    let (sigma0, k0, n0) = (first.sigma(), first.averaging_k(), first.hamiltonian().size());
    for oracle in &oracles[1..] {
        if oracle.hamiltonian().size() != n0
            || oracle.sigma() != sigma0
            || oracle.averaging_k() != k0
        {
            return Err(Error::invalid(
                "all replicas must share one hamiltonian, noise level, and averaging depth",
            ));
        }
    }

    let temperatures = cfg.temperature_ladder();
    let betas: Vec<f64> = temperatures.iter().map(|t| 1.0 / t).collect();
    let mut states: Vec<SpinConfig> = (0..cfg.replicas)
        .map(|r| {
            let mut rng = seeded_rng(cfg.seed, &[stream::INIT, r as u64]);
            SpinConfig::random(shape, &mut rng)
        })
        .collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..cfg.replicas)
        .map(|r| seeded_rng(cfg.seed, &[stream::SOLVER, r as u64]))
        .collect();
    let mut swap_rng = seeded_rng(cfg.seed, &[stream::SWAP]);
    let mut caches: Vec<Option<f64>> = vec![None; cfg.replicas];

    let mut swaps = Vec::new();
    let mut mag_sums = vec![0.0f64; cfg.replicas];
    let mut checkpoints = 0u64;
    let mut parity = 0usize;
    let mut done = 0usize;
    while done < cfg.steps {
        let block = cfg.swap_interval.min(cfg.steps - done);
        for r in 0..cfg.replicas {
            for _ in 0..block {
                mh_step(
                    &mut states[r],
                    betas[r],
                    &mut oracles[r],
                    &mut rngs[r],
                    &mut caches[r],
                    false,
                )?;
            }
        }
        done += block;

        if block == cfg.swap_interval {
            let start = parity;
            parity ^= 1;
            for i in (start..cfg.replicas - 1).step_by(2) {
                let j = i + 1;
                let e_i = oracles[i].measure(&states[i])?;
                let e_j = oracles[j].measure(&states[j])?;
                let p = swap_probability(betas[i], betas[j], e_i, e_j);
                let accepted = swap_rng.random::<f64>() < p;
                if accepted {
                    states.swap(i, j);
                    caches.swap(i, j);
                }
                swaps.push(SwapEvent {
                    step: done as u64,
                    replica_i: i,
                    replica_j: j,
                    accepted,
                });
            }
        }

        for (sum, state) in mag_sums.iter_mut().zip(&states) {
            *sum += state.magnetization().abs();
        }
        checkpoints += 1;
    }

    let replicas = temperatures
        .iter()
        .zip(states)
        .zip(mag_sums)
        .map(|((&temperature, state), mag_sum)| PtReplica {
            temperature,
            final_abs_magnetization: state.magnetization().abs(),
            mean_abs_magnetization: mag_sum / checkpoints as f64,
            final_state: state,
        })
        .collect();
    Ok(PtRun { replicas, swaps })
}

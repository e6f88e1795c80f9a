//! Score-function training of a variational family against a noisy oracle.
//!
//! One iteration draws a batch of S samples from q_theta, measures each
//! through the oracle, turns the measurements into rewards r = beta * E~,
//! subtracts the batch-mean baseline, and descends
//!
//!   grad = (1/S) sum_s (r_s - b) * grad log q(x_s)  +  grad(-H(q))
//!
//! which is a stochastic gradient of the free-energy loss
//! L = -H(q) + beta E_q[E]. The entropy term is exact for families that
//! expose it in closed form; otherwise it is estimated from the same batch
//! as (1/S) sum_s log q(x_s) * grad log q(x_s), folded into the per-sample
//! weights. Only the reward passes through the oracle, so measurement noise
//! never touches the entropy gradient.
//!
//! The batch is processed in two passes over a cloned sampler state: the
//! first pass measures rewards, the second redraws the identical samples
//! and accumulates weighted scores. Memory stays O(N) however large S gets.

use crate::error::{Error, Result};
use crate::oracle::{Measurable, NoisyOracle};
use crate::record::{IterationRow, RunRecord};
use crate::rng::{derive_seed, seeded_rng, stream};
use crate::variational::{BernoulliField, VariationalFamily};

/// Default stopping tolerance per parameter; the run-level tolerance is
/// this times the parameter count.
pub const DEFAULT_TOLERANCE_PER_PARAM: f64 = 1e-4;

/// Default width of the moving-average convergence window.
pub const DEFAULT_CONVERGENCE_WINDOW: usize = 50;

/// How a spin field is initialized before training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    /// Every site at probability 1/2 (maximum entropy).
    Uniform,
    /// Probability 1/2 plus independent uniform jitter from
    /// [-amplitude, amplitude), to break ties away from the symmetric
    /// saddle point.
    Perturbed { amplitude: f64 },
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainConfig {
    /// Inverse temperature multiplying measured energies in the reward.
    pub beta: f64,
    /// Samples per batch (S). At least 2, since the baseline is a batch mean.
    pub batch_size: usize,
    /// Gradient-descent step size (eta).
    pub learning_rate: f64,
    /// Hard iteration cap.
    pub max_iterations: usize,
    /// Moving-average window (W) of the stopping rule.
    pub convergence_window: usize,
    /// Stopping tolerance tau on the change between successive W-iteration
    /// loss averages; None selects 1e-4 per parameter.
    pub convergence_tolerance: Option<f64>,
    /// Initialization scheme for solvers that build the field themselves
    /// (sweeps, the CLI harness).
    pub init: InitScheme,
    /// Base seed; sampling, initialization, and measurement use disjoint
    /// streams derived from it.
    pub seed: u64,
}

impl BrainConfig {
    /// Config with the given core hyperparameters and default stopping rule,
    /// uniform init, and seed 0.
    pub fn new(beta: f64, batch_size: usize, learning_rate: f64, max_iterations: usize) -> Self {
        Self {
            beta,
            batch_size,
            learning_rate,
            max_iterations,
            convergence_window: DEFAULT_CONVERGENCE_WINDOW,
            convergence_tolerance: None,
            init: InitScheme::Uniform,
            seed: 0,
        }
    }

    /// Same config with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Same config with an explicit stopping rule.
    pub fn with_convergence(mut self, window: usize, tolerance: f64) -> Self {
        self.convergence_window = window;
        self.convergence_tolerance = Some(tolerance);
        self
    }

    /// Same config with a different initialization scheme.
    pub fn with_init(mut self, init: InitScheme) -> Self {
        self.init = init;
        self
    }

    /// Check every invariant the trainer relies on.
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::invalid(format!(
                "inverse temperature {} must be finite and nonnegative",
                self.beta
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid(format!(
                "batch size {} is too small for a batch-mean baseline (need at least 2)",
                self.batch_size
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid(format!(
                "learning rate {} must be positive and finite",
                self.learning_rate
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if self.convergence_window == 0 {
            return Err(Error::invalid("convergence window must be at least 1"));
        }
        if let Some(tol) = self.convergence_tolerance {
            if !tol.is_finite() || tol <= 0.0 {
                return Err(Error::invalid(format!(
                    "convergence tolerance {tol} must be positive and finite"
                )));
            }
        }
        if let InitScheme::Perturbed { amplitude } = self.init {
            if !(0.0..0.5).contains(&amplitude) {
                return Err(Error::invalid(format!(
                    "init perturbation amplitude {amplitude} must lie in [0, 0.5)"
                )));
            }
        }
        Ok(())
    }

    fn tolerance_for(&self, param_count: usize) -> f64 {
        self.convergence_tolerance
            .unwrap_or(DEFAULT_TOLERANCE_PER_PARAM * param_count as f64)
    }
}

/// Build a Bernoulli field of `n` sites per the init scheme, using the
/// dedicated initialization stream of `seed`.
pub fn init_bernoulli(n: usize, init: InitScheme, seed: u64) -> Result<BernoulliField> {
    match init {
        InitScheme::Uniform => BernoulliField::uniform(n),
        InitScheme::Perturbed { amplitude } => {
            let mut rng = seeded_rng(seed, &[stream::INIT]);
            BernoulliField::perturbed(n, amplitude, &mut rng)
        }
    }
}

/// Baseline-subtracted batch gradient of the free-energy loss from an
/// explicit batch of samples and their rewards.
///
/// This is the materialized form of the estimator the trainer applies; it
/// exists so tests and diagnostics can replay fixed batches. The entropy
/// contribution follows the family: closed form when available, otherwise
/// the same-batch score-weighted log-density estimate.
pub fn batch_gradient<F: VariationalFamily>(
    q: &F,
    samples: &[F::Point],
    rewards: &[f64],
) -> Result<Vec<f64>> {
    if samples.len() != rewards.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.len(),
            got: rewards.len(),
        });
    }
    if samples.len() < 2 {
        return Err(Error::invalid(
            "batch gradient needs at least 2 samples for the batch-mean baseline",
        ));
    }
    if rewards.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("reward"));
    }
    let s = samples.len() as f64;
    let baseline = rewards.iter().sum::<f64>() / s;
    let closed_entropy = q.entropy_closed_form().is_some();
    let mut grad = vec![0.0; q.param_count()];
    for (x, &r) in samples.iter().zip(rewards) {
        let entropy_term = if closed_entropy {
            0.0
        } else {
            entropy_reward_of(q, x)?
        };
        q.accumulate_weighted_score(x, (r - baseline + entropy_term) / s, &mut grad)?;
    }
    q.add_closed_form_neg_entropy_grad(&mut grad);
    Ok(grad)
}

fn entropy_reward_of<F: VariationalFamily>(q: &F, x: &F::Point) -> Result<f64> {
    match q.entropy_reward(x) {
        Some(value) => value,
        None => Err(Error::Unsupported(
            "variational family provides neither a closed-form entropy nor entropy rewards",
        )),
    }
}

/// Train `q` against the oracle until the loss moving average settles or
/// the iteration cap is reached. Returns the trained family and the full
/// run record.
pub fn train<F: VariationalFamily>(
    mut q: F,
    oracle: &mut NoisyOracle,
    cfg: &BrainConfig,
) -> Result<(F, RunRecord)> {
    cfg.validate()?;
    // Surface dimension/domain mismatches before consuming any randomness.
    q.blank_point().exact_energy(oracle.hamiltonian())?;

    let param_count = q.param_count();
    let tolerance = cfg.tolerance_for(param_count);
    let batch = cfg.batch_size;
    let inv_s = 1.0 / batch as f64;
    let closed_entropy = q.entropy_closed_form().is_some();

    let mut solver_rng = seeded_rng(cfg.seed, &[stream::SOLVER]);
    let mut x = q.blank_point();
    let mut rewards: Vec<f64> = Vec::with_capacity(batch);
    let mut entropy_rewards: Vec<f64> = Vec::with_capacity(if closed_entropy { 0 } else { batch });
    let mut grad = vec![0.0; param_count];
    let mut rows: Vec<IterationRow> = Vec::new();
    let mut converged = false;

    for iter in 0..cfg.max_iterations {
        // First pass: sample and measure. The sampler state is cloned so the
        // second pass can redraw the identical batch.
        let batch_start_rng = solver_rng.clone();
        rewards.clear();
        entropy_rewards.clear();
        let mut mag_sum = 0.0;
        for _ in 0..batch {
            q.sample_into(&mut x, &mut solver_rng);
            let measured = x.measure_with(oracle)?;
            rewards.push(cfg.beta * measured);
            mag_sum += x.order_parameter();
            if !closed_entropy {
                entropy_rewards.push(entropy_reward_of(&q, &x)?);
            }
        }
        let baseline = rewards.iter().sum::<f64>() * inv_s;
        if !baseline.is_finite() {
            return Err(Error::NonFinite("batch reward"));
        }

        // Loss estimate of the current parameters, recorded before the step.
        let neg_entropy = match q.entropy_closed_form() {
            Some(h) => -h,
            None => entropy_rewards.iter().sum::<f64>() * inv_s,
        };
        let loss_est = neg_entropy + baseline;

        // Second pass: redraw the same samples and fold reward and entropy
        // terms into one weighted score accumulation.
        grad.fill(0.0);
        let mut redraw_rng = batch_start_rng;
        for s_idx in 0..batch {
            q.sample_into(&mut x, &mut redraw_rng);
            let entropy_term = if closed_entropy {
                0.0
            } else {
                entropy_rewards[s_idx]
            };
            q.accumulate_weighted_score(
                &x,
                (rewards[s_idx] - baseline + entropy_term) * inv_s,
                &mut grad,
            )?;
        }
        q.add_closed_form_neg_entropy_grad(&mut grad);

        q.apply_step(&grad, cfg.learning_rate)?;

        rows.push(IterationRow {
            iter: iter as u64,
            mean_reward: baseline,
            loss_est,
            batch_abs_mag: mag_sum * inv_s,
            cum_evals: oracle.eval_count(),
        });

        if loss_has_settled(&rows, cfg.convergence_window, tolerance) {
            converged = true;
            break;
        }
    }

    let final_params = q.params();
    Ok((q, RunRecord::new(rows, final_params, converged)))
}

/// True when the loss moving average over the last `window` iterations
/// differs from the average over the `window` before it by less than
/// `tolerance`. Needs at least 2*window rows.
fn loss_has_settled(rows: &[IterationRow], window: usize, tolerance: f64) -> bool {
    if rows.len() < 2 * window {
        return false;
    }
    let recent: f64 = rows[rows.len() - window..]
        .iter()
        .map(|r| r.loss_est)
        .sum::<f64>()
        / window as f64;
    let previous: f64 = rows[rows.len() - 2 * window..rows.len() - window]
        .iter()
        .map(|r| r.loss_est)
        .sum::<f64>()
        / window as f64;
    (recent - previous).abs() < tolerance
}

/// One point of a temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Temperature the point was trained at (beta = 1/T).
    pub temperature: f64,
    /// Relative noise level of the oracle.
    pub sigma: f64,
    /// Mean absolute magnetization over fresh samples from the trained field.
    pub abs_magnetization: f64,
    /// Oracle evaluations the training consumed.
    pub evals: u64,
    /// Whether the stopping rule fired before the iteration cap.
    pub converged: bool,
}

/// Knobs of [`temperature_sweep`] that are not per-point hyperparameters.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Samples drawn from each trained field to estimate |M|.
    pub measure_samples: usize,
    /// Oracle averaging depth (repeated reads per evaluation).
    pub averaging_k: u32,
    /// Start each temperature from the previous point's trained parameters
    /// instead of a fresh init. Off by default: each point trains from
    /// scratch so points stay independent.
    pub warm_start: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            measure_samples: 1000,
            averaging_k: 1,
            warm_start: false,
        }
    }
}

/// Train a fresh Bernoulli field at every (noise level, temperature) pair
/// and report the magnetization it settles into.
///
/// Each point gets its own oracle and disjoint seed derived from the
/// template's seed and the point's grid position, so points can be compared
/// or rerun independently. The reported |M| is the sample mean of the
/// absolute magnetization over `measure_samples` fresh draws.
pub fn temperature_sweep(
    hamiltonian: &crate::hamiltonian::Hamiltonian,
    sigmas: &[f64],
    temperatures: &[f64],
    template: &BrainConfig,
    options: SweepOptions,
) -> Result<Vec<SweepPoint>> {
    template.validate()?;
    let n = hamiltonian.size().ok_or(Error::Unsupported(
        "temperature sweeps are defined for spin hamiltonians",
    ))?;
    if sigmas.is_empty() || temperatures.is_empty() {
        return Err(Error::invalid("sweep needs at least one sigma and one temperature"));
    }
    if options.measure_samples == 0 {
        return Err(Error::invalid("sweep needs at least one measurement sample"));
    }
    for &t in temperatures {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::invalid(format!(
                "sweep temperature {t} must be positive and finite"
            )));
        }
    }
    let mut points = Vec::with_capacity(sigmas.len() * temperatures.len());
    for (si, &sigma) in sigmas.iter().enumerate() {
        let mut carried: Option<Vec<f64>> = None;
        for (ti, &temperature) in temperatures.iter().enumerate() {
            let point_seed = derive_seed(template.seed, &[si as u64, ti as u64]);
            let mut cfg = template.clone();
            cfg.beta = 1.0 / temperature;
            cfg.seed = point_seed;

            let q0 = match (&carried, options.warm_start) {
                (Some(params), true) => BernoulliField::new(params.clone())?,
                _ => init_bernoulli(n, cfg.init, point_seed)?,
            };
            let mut oracle = NoisyOracle::with_averaging(
                hamiltonian.clone(),
                sigma,
                point_seed,
                options.averaging_k,
            )?;
            let (trained, record) = train(q0, &mut oracle, &cfg)?;

            let mut measure_rng = seeded_rng(point_seed, &[stream::MEASURE]);
            let mut mag_sum = 0.0;
            let mut x = trained.blank_point();
            for _ in 0..options.measure_samples {
                trained.sample_into(&mut x, &mut measure_rng);
                mag_sum += x.order_parameter();
            }

            points.push(SweepPoint {
                temperature,
                sigma,
                abs_magnetization: mag_sum / options.measure_samples as f64,
                evals: record.total_evals(),
                converged: record.converged(),
            });
            carried = Some(record.final_params().to_vec());
        }
    }
    Ok(points)
}

/// Predicted change in the gradient-estimator variance caused by oracle
/// noise when the batch-mean baseline is removed, for one parameter
/// coordinate with per-sample scores `scores` and exact energies `energies`:
///
///   (sigma^2 beta^2 / s^3) * (sum_i a_i) * (sum_j a_j (2 E_j^2 - mean(E^2)))
///
/// Positive values mean the baseline strictly reduces noise-induced
/// variance for this batch.
pub fn noise_variance_delta(
    scores: &[f64],
    energies: &[f64],
    sigma: f64,
    beta: f64,
) -> Result<f64> {
    let s = scores.len();
    if s != energies.len() {
        return Err(Error::DimensionMismatch {
            expected: s,
            got: energies.len(),
        });
    }
    if s < 2 {
        return Err(Error::invalid(
            "variance delta needs a batch of at least 2 samples",
        ));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(format!(
            "noise level {sigma} must be finite and nonnegative"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("inverse temperature"));
    }
    if scores.iter().chain(energies).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("batch entry"));
    }
    let s_f = s as f64;
    let mean_e2 = energies.iter().map(|e| e * e).sum::<f64>() / s_f;
    let sum_scores: f64 = scores.iter().sum();
    let weighted: f64 = scores
        .iter()
        .zip(energies)
        .map(|(a, e)| a * (2.0 * e * e - mean_e2))
        .sum();
    Ok(sigma * sigma * beta * beta / (s_f * s_f * s_f) * sum_scores * weighted)
}

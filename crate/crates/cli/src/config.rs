//! Experiment configuration: a flat, human-editable TOML file describing one
//! experiment, plus validation that reports every problem it finds (not just
//! the first) with the offending field named.
//!
//! A config names an experiment, an output directory, and the seeds to run,
//! then provides whichever sections that experiment needs. Unknown experiment
//! names and missing or out-of-range fields are validation errors. Command-line
//! flags (`--seed`, `--out`) override the corresponding file values.

use std::fmt;

use serde::Deserialize;

/// The experiments the harness knows how to run.
///
/// Serialized names are snake_case and appear verbatim in config files and in
/// `list-experiments` output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    /// Continuous double-well potential: trained two-component Gaussian
    /// mixture vs. scalar Metropolis vs. quadrature ground truth.
    DoubleWell,
    /// Exhaustive comparison on a small enumerable spin system: exact
    /// Boltzmann probabilities vs. trained-model and Metropolis frequencies.
    SixSpin,
    /// Magnetization-vs-temperature sweep on the fully connected model at
    /// several noise levels, with a critical-temperature estimate per level.
    CwSweep,
    /// Same sweep on the 2D nearest-neighbour lattice; solver is selectable
    /// (trained model, or an aligned-start Metropolis melting curve).
    Nn2dSweep,
    /// Head-to-head convergence race under noise: evaluations-to-target for
    /// training vs. single-flip Metropolis on the same oracle budget.
    ConvergenceRace,
    /// Metropolis with per-query averaging: repeats the same noisy run for
    /// each averaging factor k to show how much averaging the chain needs.
    NoiseAblation,
    /// Training quality as a function of batch size at fixed noise.
    SampleSizeAblation,
    /// Evaluations-to-convergence vs. system size, with power-law fits per
    /// noise level.
    Scaling,
    /// Sampling efficiency: normalized effective sample size of trained-model
    /// draws vs. a Metropolis chain granted the same oracle budget.
    EssCompare,
    /// Parallel tempering on the noisy oracle: per-replica magnetizations and
    /// the full swap log, per noise level.
    PtCompare,
    /// Analytic excess-gradient-variance formula vs. a Monte Carlo estimate
    /// on a fixed batch.
    VarianceCheck,
}

impl Experiment {
    /// Every experiment, in the order `list-experiments` prints them.
    pub const ALL: [Experiment; 11] = [
        Experiment::SixSpin,
        Experiment::DoubleWell,
        Experiment::CwSweep,
        Experiment::Nn2dSweep,
        Experiment::ConvergenceRace,
        Experiment::NoiseAblation,
        Experiment::SampleSizeAblation,
        Experiment::Scaling,
        Experiment::EssCompare,
        Experiment::PtCompare,
        Experiment::VarianceCheck,
    ];

    /// The snake_case name used in config files.
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DoubleWell => "double_well",
            Experiment::SixSpin => "six_spin",
            Experiment::CwSweep => "cw_sweep",
            Experiment::Nn2dSweep => "nn2d_sweep",
            Experiment::ConvergenceRace => "convergence_race",
            Experiment::NoiseAblation => "noise_ablation",
            Experiment::SampleSizeAblation => "sample_size_ablation",
            Experiment::Scaling => "scaling",
            Experiment::EssCompare => "ess_compare",
            Experiment::PtCompare => "pt_compare",
            Experiment::VarianceCheck => "variance_check",
        }
    }

    /// One-line description for `list-experiments`.
    pub fn describe(self) -> &'static str {
        match self {
            Experiment::SixSpin => {
                "exact vs. trained-model vs. Metropolis state frequencies on an enumerable chain"
            }
            Experiment::DoubleWell => {
                "continuous double-well: Gaussian mixture vs. scalar Metropolis vs. quadrature"
            }
            Experiment::CwSweep => {
                "magnetization-vs-temperature sweep on the fully connected model, per noise level"
            }
            Experiment::Nn2dSweep => {
                "magnetization-vs-temperature sweep on the 2D lattice (trained model or aligned-start Metropolis)"
            }
            Experiment::ConvergenceRace => {
                "evaluations-to-target race: training vs. Metropolis on a shared noisy-oracle budget"
            }
            Experiment::NoiseAblation => {
                "Metropolis with per-query averaging k: recovery of order vs. averaging cost"
            }
            Experiment::SampleSizeAblation => "final training quality vs. batch size at fixed noise",
            Experiment::Scaling => "evaluations-to-convergence vs. system size with power-law fits",
            Experiment::EssCompare => {
                "normalized effective sample size: trained-model draws vs. budget-matched Metropolis"
            }
            Experiment::PtCompare => {
                "parallel tempering on the noisy oracle: replica magnetizations and swap log"
            }
            Experiment::VarianceCheck => {
                "analytic excess gradient variance vs. Monte Carlo on a fixed batch"
            }
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which solver produces the melting curve in `nn2d_sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSolver {
    /// Train the factorized model at each grid point.
    Brain,
    /// Metropolis started from the fully aligned state with a fixed step
    /// budget per grid point (a melting curve).
    McmcAligned,
}

/// Hamiltonian family names accepted in `[hamiltonian] kind`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianKind {
    CurieWeiss,
    #[serde(rename = "chain_1d")]
    Chain1d,
    Nn2d,
    DoubleWell,
}

/// `[hamiltonian]` section.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub kind: HamiltonianKind,
    /// Spin count for curie_weiss/chain_1d; lattice side length for nn2d.
    pub size: Option<usize>,
    /// Coupling constant J (spin models only). Defaults to 1.0.
    pub coupling: Option<f64>,
    /// "open" or "periodic" (chain_1d and nn2d only). Defaults to periodic.
    pub boundary: Option<String>,
    /// Double-well quartic coefficient a in a (x^2 - x0^2)^2 + b x.
    /// Defaults to 1.0.
    pub quartic: Option<f64>,
    /// Double-well linear tilt b. Defaults to 0.2.
    pub tilt: Option<f64>,
    /// Double-well minimum location x0. Defaults to 1.0.
    pub x0: Option<f64>,
}

/// `[noise]` section: oracle noise levels and the per-query averaging factor.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Noise standard deviations (as a fraction of the energy scale the
    /// oracle applies internally). One run per value where the experiment
    /// sweeps noise; otherwise exactly one value is required.
    pub sigmas: Vec<f64>,
    /// Repeated-measurement averaging factor applied inside the oracle.
    #[serde(default = "default_averaging_k")]
    pub averaging_k: u32,
}

fn default_averaging_k() -> u32 {
    1
}

/// `[temperature]` section: either an explicit list or a uniform grid.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureConfig {
    /// Explicit temperatures (T, not beta).
    pub values: Option<Vec<f64>>,
    /// Uniform grid specification; mutually exclusive with `values`.
    pub grid: Option<TemperatureGrid>,
}

/// Uniform temperature grid: `points` evenly spaced values on [min, max].
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl TemperatureConfig {
    /// Materialize the temperature list (explicit values, or the grid).
    pub fn temperatures(&self) -> Vec<f64> {
        if let Some(values) = &self.values {
            return values.clone();
        }
        if let Some(grid) = &self.grid {
            if grid.points == 1 {
                return vec![grid.min];
            }
            let step = (grid.max - grid.min) / (grid.points - 1) as f64;
            return (0..grid.points).map(|i| grid.min + step * i as f64).collect();
        }
        Vec::new()
    }
}

/// `[brain]` section: training hyperparameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrainSection {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Moving-average window for the convergence check. Defaults to 50.
    pub convergence_window: Option<usize>,
    /// Absolute moving-average tolerance. Defaults to 1e-4 per parameter.
    pub convergence_tolerance: Option<f64>,
    /// Half-width of the randomized initial site means around 1/2.
    /// 0 means exactly uniform initialization. Defaults to 0.25.
    pub init_amplitude: Option<f64>,
    /// Draws taken from the trained model when an experiment measures it.
    #[serde(default = "default_measure_samples")]
    pub measure_samples: usize,
}

fn default_measure_samples() -> usize {
    100_000
}

/// `[mcmc]` section: Metropolis chain parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcSection {
    pub steps: u64,
    #[serde(default)]
    pub burn_in: u64,
    #[serde(default = "default_thinning")]
    pub thinning: u64,
    /// Gaussian proposal width for continuous chains. Defaults to 0.5.
    pub proposal_std: Option<f64>,
    /// Reuse the last accepted measurement instead of re-measuring the
    /// current state each step (1 oracle call per step instead of 2).
    #[serde(default)]
    pub cache_current_energy: bool,
}

fn default_thinning() -> u64 {
    1
}

/// `[pt]` section: parallel-tempering ladder parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtSection {
    pub replicas: usize,
    pub temp_min: f64,
    pub temp_max: f64,
    pub swap_interval: u64,
    pub steps: u64,
}

/// `[gmm]` section: initial mixture and the inverse temperatures to run.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmSection {
    /// Initial component means.
    pub means: Vec<f64>,
    /// Initial component standard deviations (one per mean).
    pub stds: Vec<f64>,
    /// Inverse temperatures to run the double-well comparison at.
    pub betas: Vec<f64>,
    /// Histogram bin count over the comparison interval. Defaults to 80.
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_bins() -> usize {
    80
}

/// `[sweep]` section: options specific to the sweep experiments.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Solver for nn2d_sweep. Defaults to brain.
    pub solver: Option<SweepSolver>,
}

/// `[ablation]` section: the swept values for the two ablation experiments.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationSection {
    /// Averaging factors for noise_ablation.
    pub averaging_ks: Option<Vec<u32>>,
    /// Batch sizes for sample_size_ablation.
    pub batch_sizes: Option<Vec<usize>>,
}

/// `[scaling]` section: system sizes and the batch-size rule.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    /// Fully connected system sizes to run.
    pub sizes: Vec<usize>,
    /// Explicit per-size batch sizes for the noiseless runs. Defaults to
    /// one batch sample per spin.
    pub batch_sizes: Option<Vec<usize>>,
    /// Explicit per-size batch sizes for the noisy runs. Defaults to a
    /// mildly super-linear schedule (see the scaling driver).
    pub noisy_batch_sizes: Option<Vec<usize>>,
}

/// `[variance]` section: Monte Carlo effort for variance_check.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceSection {
    /// Monte Carlo trials per case. Defaults to 1e6.
    #[serde(default = "default_trials")]
    pub trials: u64,
}

fn default_trials() -> u64 {
    1_000_000
}

/// A fully parsed experiment configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Output directory. Overridden by `--out`; when both are absent the
    /// harness falls back to `$BRAIN_OUT_DIR/<config-stem>`, then to
    /// `runs/<config-stem>`.
    pub out_dir: Option<String>,
    /// Seeds to run. `--seed N` replaces the whole list with `[N]`.
    pub seeds: Vec<u64>,

    pub hamiltonian: Option<HamiltonianConfig>,
    pub noise: Option<NoiseConfig>,
    pub temperature: Option<TemperatureConfig>,
    pub brain: Option<BrainSection>,
    pub mcmc: Option<McmcSection>,
    pub pt: Option<PtSection>,
    pub gmm: Option<GmmSection>,
    pub sweep: Option<SweepSection>,
    pub ablation: Option<AblationSection>,
    pub scaling: Option<ScalingSection>,
    pub variance: Option<VarianceSection>,
}

impl ExperimentConfig {
    /// Parse a TOML config file. Parse errors carry the TOML line/column.
    pub fn from_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Check every semantic constraint and return the full list of problems.
    /// An empty list means the config is runnable.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();

        if self.seeds.is_empty() {
            errors.push("seeds: must list at least one seed".to_string());
        }

        self.validate_common_sections(&mut errors);
        self.validate_experiment_requirements(&mut errors);
        errors
    }

    /// Range checks for whichever sections are present, independent of the
    /// experiment (a present-but-broken section is always an error).
    fn validate_common_sections(&self, errors: &mut Vec<String>) {
        if let Some(h) = &self.hamiltonian {
            match h.kind {
                HamiltonianKind::CurieWeiss | HamiltonianKind::Chain1d => {
                    match h.size {
                        None => errors.push("hamiltonian.size: required for spin models".into()),
                        Some(0) => errors.push("hamiltonian.size: must be at least 1".into()),
                        Some(_) => {}
                    }
                }
                HamiltonianKind::Nn2d => match h.size {
                    None => errors.push("hamiltonian.size: required for spin models".into()),
                    Some(0) => errors.push("hamiltonian.size: must be at least 1".into()),
                    Some(_) => {}
                },
                HamiltonianKind::DoubleWell => {
                    if h.size.is_some() {
                        errors.push("hamiltonian.size: not meaningful for double_well".into());
                    }
                }
            }
            if let Some(j) = h.coupling {
                if !j.is_finite() {
                    errors.push("hamiltonian.coupling: must be finite".into());
                }
            }
            if let Some(b) = &h.boundary {
                if b != "open" && b != "periodic" {
                    errors.push(format!(
                        "hamiltonian.boundary: expected \"open\" or \"periodic\", got \"{b}\""
                    ));
                }
            }
            if let Some(a) = h.quartic {
                if !(a.is_finite() && a > 0.0) {
                    errors.push("hamiltonian.quartic: must be finite and positive".into());
                }
            }
            if let Some(b) = h.tilt {
                if !b.is_finite() {
                    errors.push("hamiltonian.tilt: must be finite".into());
                }
            }
            if let Some(x0) = h.x0 {
                if !(x0.is_finite() && x0 > 0.0) {
                    errors.push("hamiltonian.x0: must be finite and positive".into());
                }
            }
        }

        if let Some(n) = &self.noise {
            if n.sigmas.is_empty() {
                errors.push("noise.sigmas: must list at least one value".into());
            }
            for (i, s) in n.sigmas.iter().enumerate() {
                if !(s.is_finite() && *s >= 0.0) {
                    errors.push(format!("noise.sigmas[{i}]: must be finite and >= 0, got {s}"));
                }
            }
            if n.averaging_k == 0 {
                errors.push("noise.averaging_k: must be at least 1".into());
            }
        }

        if let Some(t) = &self.temperature {
            match (&t.values, &t.grid) {
                (Some(_), Some(_)) => {
                    errors.push("temperature: give either values or grid, not both".into())
                }
                (None, None) => {
                    errors.push("temperature: give either values or grid".into())
                }
                (Some(values), None) => {
                    if values.is_empty() {
                        errors.push("temperature.values: must list at least one value".into());
                    }
                    for (i, v) in values.iter().enumerate() {
                        if !(v.is_finite() && *v > 0.0) {
                            errors.push(format!(
                                "temperature.values[{i}]: must be finite and > 0, got {v}"
                            ));
                        }
                    }
                }
                (None, Some(grid)) => {
                    if !(grid.min.is_finite() && grid.min > 0.0) {
                        errors.push("temperature.grid.min: must be finite and > 0".into());
                    }
                    if !(grid.max.is_finite() && grid.max > grid.min) {
                        errors.push("temperature.grid.max: must be finite and > min".into());
                    }
                    if grid.points < 2 {
                        errors.push("temperature.grid.points: must be at least 2".into());
                    }
                }
            }
        }

        if let Some(b) = &self.brain {
            if b.batch_size < 2 {
                errors.push("brain.batch_size: must be at least 2".into());
            }
            if !(b.learning_rate.is_finite() && b.learning_rate > 0.0) {
                errors.push("brain.learning_rate: must be finite and > 0".into());
            }
            if b.max_iterations == 0 {
                errors.push("brain.max_iterations: must be at least 1".into());
            }
            if let Some(w) = b.convergence_window {
                if w == 0 {
                    errors.push("brain.convergence_window: must be at least 1".into());
                }
            }
            if let Some(tol) = b.convergence_tolerance {
                if !(tol.is_finite() && tol > 0.0) {
                    errors.push("brain.convergence_tolerance: must be finite and > 0".into());
                }
            }
            if let Some(a) = b.init_amplitude {
                if !(a.is_finite() && (0.0..0.5).contains(&a)) {
                    errors.push("brain.init_amplitude: must lie in [0, 0.5)".into());
                }
            }
            if b.measure_samples == 0 {
                errors.push("brain.measure_samples: must be at least 1".into());
            }
        }

        if let Some(m) = &self.mcmc {
            if m.steps == 0 {
                errors.push("mcmc.steps: must be at least 1".into());
            }
            if m.burn_in >= m.steps && m.steps > 0 {
                errors.push("mcmc.burn_in: must be smaller than mcmc.steps".into());
            }
            if m.thinning == 0 {
                errors.push("mcmc.thinning: must be at least 1".into());
            }
            if let Some(w) = m.proposal_std {
                if !(w.is_finite() && w > 0.0) {
                    errors.push("mcmc.proposal_std: must be finite and > 0".into());
                }
            }
        }

        if let Some(p) = &self.pt {
            if p.replicas < 2 {
                errors.push("pt.replicas: must be at least 2".into());
            }
            if !(p.temp_min.is_finite() && p.temp_min > 0.0) {
                errors.push("pt.temp_min: must be finite and > 0".into());
            }
            if !(p.temp_max.is_finite() && p.temp_max > p.temp_min) {
                errors.push("pt.temp_max: must be finite and > temp_min".into());
            }
            if p.swap_interval == 0 {
                errors.push("pt.swap_interval: must be at least 1".into());
            }
            if p.steps == 0 {
                errors.push("pt.steps: must be at least 1".into());
            }
        }

        if let Some(g) = &self.gmm {
            if g.means.len() < 2 {
                errors.push("gmm.means: need at least two components".into());
            }
            if g.stds.len() != g.means.len() {
                errors.push(format!(
                    "gmm.stds: expected {} values to match gmm.means, got {}",
                    g.means.len(),
                    g.stds.len()
                ));
            }
            for (i, s) in g.stds.iter().enumerate() {
                if !(s.is_finite() && *s > 0.0) {
                    errors.push(format!("gmm.stds[{i}]: must be finite and > 0, got {s}"));
                }
            }
            if g.betas.is_empty() {
                errors.push("gmm.betas: must list at least one value".into());
            }
            for (i, b) in g.betas.iter().enumerate() {
                if !(b.is_finite() && *b > 0.0) {
                    errors.push(format!("gmm.betas[{i}]: must be finite and > 0, got {b}"));
                }
            }
            if g.bins < 2 {
                errors.push("gmm.bins: must be at least 2".into());
            }
        }

        if let Some(a) = &self.ablation {
            if let Some(ks) = &a.averaging_ks {
                if ks.is_empty() {
                    errors.push("ablation.averaging_ks: must list at least one value".into());
                }
                if ks.contains(&0) {
                    errors.push("ablation.averaging_ks: values must be at least 1".into());
                }
            }
            if let Some(bs) = &a.batch_sizes {
                if bs.is_empty() {
                    errors.push("ablation.batch_sizes: must list at least one value".into());
                }
                if bs.iter().any(|s| *s < 2) {
                    errors.push("ablation.batch_sizes: values must be at least 2".into());
                }
            }
        }

        if let Some(s) = &self.scaling {
            if s.sizes.is_empty() {
                errors.push("scaling.sizes: must list at least one size".into());
            }
            if s.sizes.contains(&0) {
                errors.push("scaling.sizes: sizes must be at least 1".into());
            }
            if let Some(bs) = &s.batch_sizes {
                if bs.len() != s.sizes.len() {
                    errors.push(format!(
                        "scaling.batch_sizes: expected {} values to match scaling.sizes, got {}",
                        s.sizes.len(),
                        bs.len()
                    ));
                }
            }
            if let Some(bs) = &s.noisy_batch_sizes {
                if bs.len() != s.sizes.len() {
                    errors.push(format!(
                        "scaling.noisy_batch_sizes: expected {} values to match scaling.sizes, got {}",
                        s.sizes.len(),
                        bs.len()
                    ));
                }
            }
        }

        if let Some(v) = &self.variance {
            if v.trials == 0 {
                errors.push("variance.trials: must be at least 1".into());
            }
        }
    }

    /// Per-experiment required sections and cross-section constraints.
    fn validate_experiment_requirements(&self, errors: &mut Vec<String>) {
        let need = |errors: &mut Vec<String>, present: bool, section: &str| {
            if !present {
                errors.push(format!(
                    "[{section}]: section required by experiment \"{}\"",
                    self.experiment
                ));
            }
        };

        match self.experiment {
            Experiment::SixSpin => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                need(errors, self.mcmc.is_some(), "mcmc");
                if let Some(h) = &self.hamiltonian {
                    if h.kind == HamiltonianKind::DoubleWell {
                        errors.push(
                            "hamiltonian.kind: six_spin needs an enumerable spin model".into(),
                        );
                    } else if let Some(n) = h.size {
                        let spins = if h.kind == HamiltonianKind::Nn2d { n * n } else { n };
                        if spins > brain_core::ENUMERATION_LIMIT {
                            errors.push(format!(
                                "hamiltonian.size: six_spin enumerates all states, so at most \
                                 {} spins are supported (got {spins})",
                                brain_core::ENUMERATION_LIMIT
                            ));
                        }
                    }
                }
                self.require_single_sigma(errors);
                self.require_single_temperature(errors);
            }
            Experiment::DoubleWell => {
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.gmm.is_some(), "gmm");
                need(errors, self.brain.is_some(), "brain");
                need(errors, self.mcmc.is_some(), "mcmc");
                self.require_single_sigma(errors);
                if let Some(h) = &self.hamiltonian {
                    if h.kind != HamiltonianKind::DoubleWell {
                        errors.push(
                            "hamiltonian.kind: double_well experiment requires the double_well \
                             potential (or omit the section for the default)"
                                .into(),
                        );
                    }
                }
            }
            Experiment::CwSweep => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                self.require_kind(errors, HamiltonianKind::CurieWeiss, "cw_sweep");
            }
            Experiment::Nn2dSweep => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                self.require_kind(errors, HamiltonianKind::Nn2d, "nn2d_sweep");
                let solver = self
                    .sweep
                    .as_ref()
                    .and_then(|s| s.solver)
                    .unwrap_or(SweepSolver::Brain);
                match solver {
                    SweepSolver::Brain => need(errors, self.brain.is_some(), "brain"),
                    SweepSolver::McmcAligned => need(errors, self.mcmc.is_some(), "mcmc"),
                }
            }
            Experiment::ConvergenceRace => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                need(errors, self.mcmc.is_some(), "mcmc");
                self.require_single_sigma(errors);
                self.require_single_temperature(errors);
            }
            Experiment::NoiseAblation => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.mcmc.is_some(), "mcmc");
                if self.ablation.as_ref().and_then(|a| a.averaging_ks.as_ref()).is_none() {
                    errors.push(
                        "ablation.averaging_ks: required by experiment \"noise_ablation\"".into(),
                    );
                }
                self.require_single_sigma(errors);
                self.require_single_temperature(errors);
            }
            Experiment::SampleSizeAblation => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                if self.ablation.as_ref().and_then(|a| a.batch_sizes.as_ref()).is_none() {
                    errors.push(
                        "ablation.batch_sizes: required by experiment \"sample_size_ablation\""
                            .into(),
                    );
                }
                self.require_single_sigma(errors);
                self.require_single_temperature(errors);
            }
            Experiment::Scaling => {
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                need(errors, self.scaling.is_some(), "scaling");
                self.require_single_temperature(errors);
            }
            Experiment::EssCompare => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                need(errors, self.mcmc.is_some(), "mcmc");
                self.require_single_sigma(errors);
                self.require_single_temperature(errors);
            }
            Experiment::PtCompare => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.pt.is_some(), "pt");
            }
            Experiment::VarianceCheck => {
                need(errors, self.hamiltonian.is_some(), "hamiltonian");
                need(errors, self.noise.is_some(), "noise");
                need(errors, self.temperature.is_some(), "temperature");
                need(errors, self.brain.is_some(), "brain");
                if let Some(h) = &self.hamiltonian {
                    if h.kind == HamiltonianKind::DoubleWell {
                        errors.push(
                            "hamiltonian.kind: variance_check needs a spin model".into(),
                        );
                    }
                }
                self.require_single_temperature(errors);
            }
        }
    }

    fn require_kind(&self, errors: &mut Vec<String>, kind: HamiltonianKind, experiment: &str) {
        if let Some(h) = &self.hamiltonian {
            if h.kind != kind {
                errors.push(format!(
                    "hamiltonian.kind: experiment \"{experiment}\" expects {}",
                    match kind {
                        HamiltonianKind::CurieWeiss => "\"curie_weiss\"",
                        HamiltonianKind::Chain1d => "\"chain_1d\"",
                        HamiltonianKind::Nn2d => "\"nn2d\"",
                        HamiltonianKind::DoubleWell => "\"double_well\"",
                    }
                ));
            }
        }
    }

    fn require_single_sigma(&self, errors: &mut Vec<String>) {
        if let Some(n) = &self.noise {
            if n.sigmas.len() > 1 {
                errors.push(format!(
                    "noise.sigmas: experiment \"{}\" runs at a single noise level, got {} values",
                    self.experiment,
                    n.sigmas.len()
                ));
            }
        }
    }

    fn require_single_temperature(&self, errors: &mut Vec<String>) {
        if let Some(t) = &self.temperature {
            if t.temperatures().len() > 1 {
                errors.push(format!(
                    "temperature: experiment \"{}\" runs at a single temperature, got {} values",
                    self.experiment,
                    t.temperatures().len()
                ));
            }
        }
    }
}

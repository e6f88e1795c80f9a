//! Variational sampling of Boltzmann distributions through a noisy analog
//! energy oracle, with Markov-chain baselines and evaluation metrics.
//!
//! The library is organized around one experimental loop:
//!
//! 1. [`hamiltonian`] defines the energy landscapes (ferromagnets on
//!    complete graphs, chains, and square lattices, plus a continuous
//!    double-well potential) and exact enumeration for small systems.
//! 2. [`oracle`] wraps a hamiltonian in a simulated analog measurement
//!    device whose readings carry relative Gaussian noise, and meters every
//!    energy evaluation.
//! 3. [`variational`] provides the trainable sampling distributions — a
//!    mean-field Bernoulli field over spins and a 1D Gaussian mixture —
//!    with score functions and entropy terms.
//! 4. [`brain`] trains those families against the oracle by stochastic
//!    gradient descent on the variational free energy, using
//!    score-function gradients with a batch-mean baseline.
//! 5. [`mcmc`] implements the Metropolis, annealing, and replica-exchange
//!    baselines under the same noisy-measurement protocol.
//! 6. [`metrics`] evaluates completed runs: effective sample sizes,
//!    fidelity, time-to-solution, critical-temperature estimates, and
//!    curve fits.
//!
//! All stochastic components consume named [`rng`] streams derived from a
//! single base seed, so every run is reproducible bit-for-bit.

pub mod brain;
pub mod error;
pub mod hamiltonian;
pub mod mcmc;
pub mod metrics;
pub mod oracle;
pub mod record;
pub mod rng;
pub mod spin;
pub mod variational;

pub use brain::{temperature_sweep, train, BrainConfig, InitScheme, SweepOptions, SweepPoint};
pub use error::{Error, Result};
pub use hamiltonian::{Boundary, ExactDistribution, Hamiltonian, ENUMERATION_LIMIT};
pub use mcmc::{
    averaged_metropolis, metropolis_chain, metropolis_chain_scalar, parallel_tempering,
    simulated_annealing, McmcConfig, PtConfig, PtReplica, PtRun, SwapEvent,
};
pub use metrics::{
    ess, ess_autocorr, ess_for_samples, estimate_tc, fidelity, fit_power, fit_quadratic,
    time_to_solution, tv_distance, SweepRow, SweepTable,
};
pub use oracle::{Measurable, NoisyOracle};
pub use record::{IterationRow, RunRecord};
pub use spin::{Shape, SpinConfig};
pub use variational::{BernoulliField, GaussianMixture1D, VariationalFamily};

//! Simulated noisy energy oracle.
//!
//! Models an analog Ising machine that returns the energy of a submitted
//! configuration corrupted by multiplicative Gaussian read noise:
//!
//! ```text
//! E~(x) = E(x) * (1 + eta),    eta ~ N(0, sigma^2), fresh per read
//! ```
//!
//! so the error scales with |E(x)|. An oracle can average `k` hardware reads
//! per measurement, reducing the relative noise to sigma / sqrt(k); the
//! evaluation counter advances by k per measurement because each inner read
//! costs one hardware evaluation. All solvers are budgeted in oracle
//! evaluations, never wall clock.
//!
//! The oracle owns its own RNG stream, derived from its seed, so solver
//! internals can never perturb the noise sequence.

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::rng::{seeded_rng, stream};
use crate::spin::SpinConfig;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// A noisy measurement channel over a [`Hamiltonian`].
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    hamiltonian: Hamiltonian,
    sigma: f64,
    averaging_k: u32,
    eval_count: u64,
    rng: ChaCha8Rng,
}

impl NoisyOracle {
    /// Single-read oracle with relative noise level `sigma` (>= 0).
    pub fn new(hamiltonian: Hamiltonian, sigma: f64, seed: u64) -> Result<Self> {
        Self::with_averaging(hamiltonian, sigma, seed, 1)
    }

    /// Oracle averaging `averaging_k` >= 1 reads per measurement.
    pub fn with_averaging(
        hamiltonian: Hamiltonian,
        sigma: f64,
        seed: u64,
        averaging_k: u32,
    ) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 {
            return Err(Error::invalid("oracle: sigma must be finite and >= 0"));
        }
        if averaging_k == 0 {
            return Err(Error::invalid("oracle: averaging_k must be >= 1"));
        }
        Ok(NoisyOracle {
            hamiltonian,
            sigma,
            averaging_k,
            eval_count: 0,
            rng: seeded_rng(seed, &[stream::ORACLE]),
        })
    }

    /// Measure a spin configuration: the mean of `averaging_k` noisy reads.
    pub fn measure(&mut self, config: &SpinConfig) -> Result<f64> {
        let energy = self.hamiltonian.energy(config)?;
        Ok(self.corrupt(energy))
    }

    /// Measure a scalar coordinate (continuous potentials).
    pub fn measure_scalar(&mut self, x: f64) -> Result<f64> {
        let energy = self.hamiltonian.energy_scalar(x)?;
        Ok(self.corrupt(energy))
    }

    /// Apply the averaged multiplicative noise. The mean of k reads
    /// E (1 + sigma z_i) equals E (1 + sigma mean(z_i)), computed in that
    /// form so sigma = 0 reproduces the exact energy bit for bit. Noise
    /// variates are drawn even at sigma = 0 to keep the stream aligned
    /// across noise levels.
    fn corrupt(&mut self, energy: f64) -> f64 {
        let mut z_sum = 0.0;
        for _ in 0..self.averaging_k {
            let z: f64 = StandardNormal.sample(&mut self.rng);
            z_sum += z;
        }
        self.eval_count += u64::from(self.averaging_k);
        energy * (1.0 + self.sigma * (z_sum / f64::from(self.averaging_k)))
    }

    /// Total hardware reads so far (k per measurement).
    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    /// Reset the read counter (the noise stream keeps advancing).
    pub fn reset_eval_count(&mut self) {
        self.eval_count = 0;
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn averaging_k(&self) -> u32 {
        self.averaging_k
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }
}

/// Anything the oracle can measure: spin configurations or scalar coordinates.
/// Lets the training loop stay generic over discrete and continuous targets.
pub trait Measurable {
    fn measure_with(&self, oracle: &mut NoisyOracle) -> Result<f64>;
    /// Exact (noise-free) energy under a Hamiltonian.
    fn exact_energy(&self, hamiltonian: &Hamiltonian) -> Result<f64>;
    /// Scalar order parameter magnitude used in run traces: |magnetization|
    /// for spins, |x| for a coordinate.
    fn order_parameter(&self) -> f64;
}

impl Measurable for SpinConfig {
    fn measure_with(&self, oracle: &mut NoisyOracle) -> Result<f64> {
        oracle.measure(self)
    }

    fn exact_energy(&self, hamiltonian: &Hamiltonian) -> Result<f64> {
        hamiltonian.energy(self)
    }

    fn order_parameter(&self) -> f64 {
        self.magnetization().abs()
    }
}

impl Measurable for f64 {
    fn measure_with(&self, oracle: &mut NoisyOracle) -> Result<f64> {
        oracle.measure_scalar(*self)
    }

    fn exact_energy(&self, hamiltonian: &Hamiltonian) -> Result<f64> {
        hamiltonian.energy_scalar(*self)
    }

    fn order_parameter(&self) -> f64 {
        self.abs()
    }
}

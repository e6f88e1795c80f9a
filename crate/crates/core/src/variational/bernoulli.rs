//! Fully factorized Bernoulli distribution over ±1 spins.

use crate::error::{Error, Result};
use crate::oracle::Measurable;
use crate::spin::{Shape, SpinConfig};
use crate::variational::VariationalFamily;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Smallest distance a mean is allowed to sit from 0 or 1. Keeps every
/// log and score finite and leaves a railed site an escape probability.
pub const MEAN_CLIP: f64 = 1e-4;

/// Product distribution q(x) = prod_j m_j^{[x_j=+1]} (1-m_j)^{[x_j=-1]}.
///
/// The parameter vector is the per-site probability of spin up, always kept
/// inside [`MEAN_CLIP`, 1 - `MEAN_CLIP`].
#[derive(Debug, Clone)]
pub struct BernoulliField {
    means: Vec<f64>,
    shape: Shape,
}

impl BernoulliField {
    /// Maximally uncertain field: every site at probability 1/2.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![0.5; n])
    }

    /// Field with explicit per-site means, each strictly inside (0, 1).
    /// Values inside the clip margin are pulled onto it.
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::invalid("Bernoulli field needs at least one site"));
        }
        for (j, &m) in means.iter().enumerate() {
            if !m.is_finite() || m <= 0.0 || m >= 1.0 {
                return Err(Error::invalid(format!(
                    "mean[{j}] = {m} is outside the open interval (0, 1)"
                )));
            }
        }
        let shape = Shape::Chain(means.len());
        let mut field = Self { means, shape };
        field.clip_means();
        Ok(field)
    }

    /// Uniform field with independent jitter drawn from
    /// [-amplitude, amplitude) on every site, to break exact symmetry at
    /// initialization.
    pub fn perturbed(n: usize, amplitude: f64, rng: &mut ChaCha8Rng) -> Result<Self> {
        if !(0.0..0.5).contains(&amplitude) {
            return Err(Error::invalid(format!(
                "perturbation amplitude {amplitude} must lie in [0, 0.5)"
            )));
        }
        let means = (0..n)
            .map(|_| 0.5 + rng.random_range(-amplitude..amplitude.max(f64::MIN_POSITIVE)))
            .collect();
        Self::new(means)
    }

    /// Associate the field with a lattice shape for downstream consumers
    /// (sampled configurations report this shape).
    pub fn with_shape(mut self, shape: Shape) -> Result<Self> {
        if shape.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: shape.len(),
            });
        }
        self.shape = shape;
        Ok(self)
    }

    /// Per-site probabilities of spin up.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Number of sites.
    pub fn len(&self) -> usize {
        self.means.len()
    }

    /// True when the field has no sites (never constructible; kept for API
    /// completeness).
    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    /// Expected magnetization per site: mean of 2 m_j - 1.
    pub fn mean_magnetization(&self) -> f64 {
        let total: f64 = self.means.iter().map(|m| 2.0 * m - 1.0).sum();
        total / self.means.len() as f64
    }

    /// Gradient of the negative entropy, d(-H)/dm_j = ln(m_j / (1 - m_j)).
    pub fn neg_entropy_gradient(&self) -> Vec<f64> {
        self.means.iter().map(|&m| (m / (1.0 - m)).ln()).collect()
    }

    /// Shannon entropy in nats: -sum_j [m ln m + (1-m) ln(1-m)].
    pub fn entropy(&self) -> f64 {
        self.means
            .iter()
            .map(|&m| -(m * m.ln() + (1.0 - m) * (1.0 - m).ln()))
            .sum()
    }

    fn clip_means(&mut self) {
        for m in &mut self.means {
            *m = m.clamp(MEAN_CLIP, 1.0 - MEAN_CLIP);
        }
    }

    fn check_point(&self, x: &SpinConfig) -> Result<()> {
        if x.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

impl VariationalFamily for BernoulliField {
    type Point = SpinConfig;

    fn param_count(&self) -> usize {
        self.means.len()
    }

    fn params(&self) -> Vec<f64> {
        self.means.clone()
    }

    fn blank_point(&self) -> SpinConfig {
        SpinConfig::all_up(self.shape)
    }

    fn sample_into(&self, out: &mut SpinConfig, rng: &mut ChaCha8Rng) {
        debug_assert_eq!(out.len(), self.means.len());
        for (spin, &m) in out.spins_mut().iter_mut().zip(&self.means) {
            *spin = if rng.random::<f64>() < m { 1 } else { -1 };
        }
    }

    fn log_prob(&self, x: &SpinConfig) -> Result<f64> {
        self.check_point(x)?;
        let mut total = 0.0;
        for (&s, &m) in x.spins().iter().zip(&self.means) {
            total += if s > 0 { m.ln() } else { (1.0 - m).ln() };
        }
        Ok(total)
    }

    fn accumulate_weighted_score(&self, x: &SpinConfig, weight: f64, acc: &mut [f64]) -> Result<()> {
        self.check_point(x)?;
        debug_assert_eq!(acc.len(), self.means.len());
        for ((a, &s), &m) in acc.iter_mut().zip(x.spins()).zip(&self.means) {
            // d log q / d m_j is 1/m_j when the spin is up, -1/(1-m_j) when down.
            *a += if s > 0 { weight / m } else { -weight / (1.0 - m) };
        }
        Ok(())
    }

    fn entropy_closed_form(&self) -> Option<f64> {
        Some(self.entropy())
    }

    fn entropy_reward(&self, _x: &SpinConfig) -> Option<Result<f64>> {
        None
    }

    fn add_closed_form_neg_entropy_grad(&self, acc: &mut [f64]) {
        for (a, &m) in acc.iter_mut().zip(&self.means) {
            *a += (m / (1.0 - m)).ln();
        }
    }

    fn apply_step(&mut self, grad: &[f64], learning_rate: f64) -> Result<()> {
        if grad.len() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: grad.len(),
            });
        }
        if !learning_rate.is_finite() || learning_rate <= 0.0 {
            return Err(Error::invalid(format!(
                "learning rate {learning_rate} must be positive and finite"
            )));
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        for (m, g) in self.means.iter_mut().zip(grad) {
            *m -= learning_rate * g;
        }
        self.clip_means();
        Ok(())
    }
}

// The trait bound `Point: Measurable` is satisfied via the SpinConfig impl
// in the oracle module; nothing extra needed here.
const _: () = {
    fn assert_measurable<T: Measurable>() {}
    fn check() {
        assert_measurable::<SpinConfig>();
    }
    let _ = check;
};

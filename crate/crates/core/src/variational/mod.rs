//! Variational sampling families.
//!
//! A family q_theta must support cheap exact sampling, exact log q, and the
//! score function grad_theta log q — everything a likelihood-ratio gradient
//! estimator needs. Two families are provided:
//!
//! * [`BernoulliField`]: fully factorized distribution over ±1 spins, one
//!   mean per site.
//! * [`GaussianMixture1D`]: mixture of Gaussians over a scalar coordinate,
//!   used for continuous potentials.
//!
//! The free-energy objective reads L = -H(q) + beta E_q[E]. Families with a
//! closed-form entropy expose its gradient directly; the mixture estimates
//! grad(-H) = E_q[log q * grad log q] from the same batch used for the energy
//! term, which the trainer folds in as an extra per-sample reward.

mod bernoulli;
mod gmm;

pub use bernoulli::BernoulliField;
pub use gmm::GaussianMixture1D;

use crate::error::Result;
use crate::oracle::Measurable;
use rand_chacha::ChaCha8Rng;

/// A parametric distribution trainable by score-function gradients.
pub trait VariationalFamily {
    /// The sample type: spin configurations or scalar coordinates.
    type Point: Clone + Measurable;

    /// Number of free parameters.
    fn param_count(&self) -> usize;

    /// Flat snapshot of the current parameters.
    fn params(&self) -> Vec<f64>;

    /// An arbitrary valid point, used as a reusable sampling buffer.
    fn blank_point(&self) -> Self::Point;

    /// Draw one sample in place.
    fn sample_into(&self, out: &mut Self::Point, rng: &mut ChaCha8Rng);

    /// Draw one owned sample.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Point {
        let mut point = self.blank_point();
        self.sample_into(&mut point, rng);
        point
    }

    /// Exact log q(x).
    fn log_prob(&self, x: &Self::Point) -> Result<f64>;

    /// Accumulate weight * grad_theta log q(x) into `acc` (length
    /// `param_count`). Streaming form so batch gradients never need the
    /// whole batch in memory.
    fn accumulate_weighted_score(&self, x: &Self::Point, weight: f64, acc: &mut [f64]) -> Result<()>;

    /// The score vector grad_theta log q(x).
    fn score(&self, x: &Self::Point) -> Result<Vec<f64>> {
        let mut acc = vec![0.0; self.param_count()];
        self.accumulate_weighted_score(x, 1.0, &mut acc)?;
        Ok(acc)
    }

    /// Exact entropy, for families that have one in closed form.
    fn entropy_closed_form(&self) -> Option<f64>;

    /// Per-sample reward contribution that realizes the entropy gradient for
    /// families without a closed form (returns log q(x)); None when
    /// [`add_closed_form_neg_entropy_grad`](Self::add_closed_form_neg_entropy_grad)
    /// covers it analytically.
    fn entropy_reward(&self, x: &Self::Point) -> Option<Result<f64>>;

    /// Add the exact gradient of -H(q) into `acc` for closed-form families;
    /// no-op otherwise.
    fn add_closed_form_neg_entropy_grad(&self, acc: &mut [f64]);

    /// One gradient-descent step with projection back into the valid
    /// parameter region.
    fn apply_step(&mut self, grad: &[f64], learning_rate: f64) -> Result<()>;
}

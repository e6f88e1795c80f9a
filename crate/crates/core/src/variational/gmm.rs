//! Mixture of Gaussians over a scalar coordinate.

use crate::error::{Error, Result};
use crate::variational::VariationalFamily;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Smallest standard deviation a component may shrink to.
pub const STD_FLOOR: f64 = 1e-6;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;

/// q(x) = sum_k w_k N(x; mu_k, sigma_k) with the weights parametrized
/// through softmax logits so gradient steps can never leave the simplex.
///
/// Parameter layout: [logits, means, stds], each block of length K.
#[derive(Debug, Clone)]
pub struct GaussianMixture1D {
    logits: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl GaussianMixture1D {
    /// Mixture from explicit component weights. Weights must be nonnegative
    /// with a positive sum; they are normalized internally. A zero weight is
    /// allowed and leaves that component permanently inert.
    pub fn new(weights: &[f64], means: &[f64], stds: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.len() != means.len() || weights.len() != stds.len() {
            return Err(Error::invalid(format!(
                "component lists must be equal-length and nonempty, got {}/{}/{}",
                weights.len(),
                means.len(),
                stds.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("weights must not all be zero"));
        }
        let logits = weights.iter().map(|w| (w / total).ln()).collect();
        Self::from_logits(logits, means.to_vec(), stds.to_vec())
    }

    /// Mixture from raw softmax logits. Logits may be -inf (a dead
    /// component) but never NaN or +inf.
    pub fn from_logits(logits: Vec<f64>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        if logits.iter().any(|l| l.is_nan() || *l == f64::INFINITY) {
            return Err(Error::NonFinite("mixture logit"));
        }
        if logits.iter().all(|l| *l == f64::NEG_INFINITY) {
            return Err(Error::invalid("at least one component must be live"));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("component mean"));
        }
        if stds.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::invalid("component stds must be positive and finite"));
        }
        let mut mix = Self { logits, means, stds };
        mix.project();
        Ok(mix)
    }

    /// Single Gaussian as a one-component mixture.
    pub fn single(mean: f64, std: f64) -> Result<Self> {
        Self::new(&[1.0], &[mean], &[std])
    }

    /// Number of components.
    pub fn components(&self) -> usize {
        self.logits.len()
    }

    /// Normalized component weights (softmax of the logits).
    pub fn weights(&self) -> Vec<f64> {
        let max = self
            .logits
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = self.logits.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.into_iter().map(|e| e / total).collect()
    }

    /// Component means.
    pub fn component_means(&self) -> &[f64] {
        &self.means
    }

    /// Component standard deviations.
    pub fn component_stds(&self) -> &[f64] {
        &self.stds
    }

    /// Per-component log densities ln w_k + ln N(x; mu_k, sigma_k).
    fn log_terms(&self, x: f64) -> Vec<f64> {
        let weights = self.weights();
        (0..self.components())
            .map(|k| {
                let w = weights[k];
                if w == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let z = (x - self.means[k]) / self.stds[k];
                w.ln() - self.stds[k].ln() - HALF_LN_TWO_PI - 0.5 * z * z
            })
            .collect()
    }

    /// Posterior component responsibilities r_k(x); they sum to one.
    pub fn responsibilities(&self, x: f64) -> Vec<f64> {
        let terms = self.log_terms(x);
        let log_q = log_sum_exp(&terms);
        terms.into_iter().map(|t| (t - log_q).exp()).collect()
    }

    /// Keep logits centered (softmax is shift-invariant) and stds above the
    /// floor. Called after every construction and gradient step.
    fn project(&mut self) {
        let max = self
            .logits
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        for l in &mut self.logits {
            *l -= max;
        }
        for s in &mut self.stds {
            *s = s.max(STD_FLOOR);
        }
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

impl VariationalFamily for GaussianMixture1D {
    type Point = f64;

    fn param_count(&self) -> usize {
        3 * self.components()
    }

    fn params(&self) -> Vec<f64> {
        let mut p = self.logits.clone();
        p.extend_from_slice(&self.means);
        p.extend_from_slice(&self.stds);
        p
    }

    fn blank_point(&self) -> f64 {
        0.0
    }

    fn sample_into(&self, out: &mut f64, rng: &mut ChaCha8Rng) {
        let weights = self.weights();
        let u: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut chosen = self.components() - 1;
        for (k, w) in weights.iter().enumerate() {
            cumulative += w;
            if u < cumulative {
                chosen = k;
                break;
            }
        }
        let z: f64 = rng.sample(StandardNormal);
        *out = self.means[chosen] + self.stds[chosen] * z;
    }

    fn log_prob(&self, x: &f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::NonFinite("sample point"));
        }
        Ok(log_sum_exp(&self.log_terms(*x)))
    }

    fn accumulate_weighted_score(&self, x: &f64, weight: f64, acc: &mut [f64]) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite("sample point"));
        }
        let k_total = self.components();
        debug_assert_eq!(acc.len(), 3 * k_total);
        let weights = self.weights();
        let resp = self.responsibilities(*x);
        for k in 0..k_total {
            let r = resp[k];
            let sigma = self.stds[k];
            let dx = *x - self.means[k];
            // Softmax weights: d log q / d logit_k = r_k - w_k.
            acc[k] += weight * (r - weights[k]);
            acc[k_total + k] += weight * r * dx / (sigma * sigma);
            acc[2 * k_total + k] += weight * r * (dx * dx / (sigma * sigma * sigma) - 1.0 / sigma);
        }
        Ok(())
    }

    fn entropy_closed_form(&self) -> Option<f64> {
        None
    }

    fn entropy_reward(&self, x: &f64) -> Option<Result<f64>> {
        Some(self.log_prob(x))
    }

    fn add_closed_form_neg_entropy_grad(&self, _acc: &mut [f64]) {}

    fn apply_step(&mut self, grad: &[f64], learning_rate: f64) -> Result<()> {
        if grad.len() != self.param_count() {
            return Err(Error::DimensionMismatch {
                expected: self.param_count(),
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
        let k_total = self.components();
        for k in 0..k_total {
            // A dead component (logit -inf) stays dead: its responsibilities
            // and weight are exactly zero, so its gradient entries are zero
            // and -inf minus zero is still -inf.
            self.logits[k] -= learning_rate * grad[k];
            self.means[k] -= learning_rate * grad[k_total + k];
            self.stds[k] -= learning_rate * grad[2 * k_total + k];
        }
        self.project();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded_rng, stream};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn two_component() -> GaussianMixture1D {
        GaussianMixture1D::new(&[0.3, 0.7], &[-1.0, 1.2], &[0.5, 0.8]).unwrap()
    }

    #[test]
    fn rejects_inconsistent_input() {
        assert!(GaussianMixture1D::new(&[], &[], &[]).is_err());
        assert!(GaussianMixture1D::new(&[1.0], &[0.0, 1.0], &[1.0]).is_err());
        assert!(GaussianMixture1D::new(&[-0.1, 1.1], &[0.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(GaussianMixture1D::new(&[0.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).is_err());
        assert!(GaussianMixture1D::new(&[1.0], &[0.0], &[0.0]).is_err());
        assert!(GaussianMixture1D::new(&[1.0], &[f64::NAN], &[1.0]).is_err());
    }

    #[test]
    fn standard_normal_log_density_at_origin() {
        let q = GaussianMixture1D::single(0.0, 1.0).unwrap();
        assert_relative_eq!(
            q.log_prob(&0.0).unwrap(),
            -0.5 * (2.0 * std::f64::consts::PI).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn log_prob_matches_direct_mixture_density() {
        let q = two_component();
        let x = 0.3;
        let n = |x: f64, mu: f64, s: f64| {
            (-(x - mu) * (x - mu) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt())
        };
        let direct = (0.3 * n(x, -1.0, 0.5) + 0.7 * n(x, 1.2, 0.8)).ln();
        assert_relative_eq!(q.log_prob(&x).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn weights_are_normalized_from_any_scale() {
        let q = GaussianMixture1D::new(&[3.0, 7.0], &[0.0, 1.0], &[1.0, 1.0]).unwrap();
        let w = q.weights();
        assert_relative_eq!(w[0], 0.3, epsilon = 1e-12);
        assert_relative_eq!(w[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn density_integrates_to_one() {
        let q = two_component();
        let (lo, hi, steps) = (-12.0, 12.0, 60_000);
        let dx = (hi - lo) / steps as f64;
        let mut total = 0.0;
        for i in 0..=steps {
            let x = lo + i as f64 * dx;
            let weight = if i == 0 || i == steps { 0.5 } else { 1.0 };
            total += weight * q.log_prob(&x).unwrap().exp();
        }
        assert_relative_eq!(total * dx, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn responsibilities_form_a_posterior() {
        let q = two_component();
        for &x in &[-3.0, -1.0, 0.1, 1.2, 4.0] {
            let r = q.responsibilities(x);
            assert_relative_eq!(r.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
            assert!(r.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        // The narrow left component dominates its own basin, but the wider
        // right component reclaims the deep tail (its exponent decays
        // slower), a classic unequal-variance mixture effect.
        assert!(q.responsibilities(-2.4)[0] > 0.99);
        assert!(q.responsibilities(-8.0)[1] > 0.9);
    }

    #[test]
    fn mean_score_vanishes_at_the_component_mean() {
        let q = two_component();
        let k = q.components();
        // d log q / d mu_k = r_k (x - mu_k) / sigma_k^2 is exactly zero at
        // x = mu_k no matter what the other component does.
        for (idx, &mu) in q.component_means().to_vec().iter().enumerate() {
            assert_eq!(q.score(&mu).unwrap()[k + idx], 0.0);
        }
    }

    #[test]
    fn score_matches_finite_differences() {
        let q = two_component();
        let base = q.params();
        let k = q.components();
        let mut rng = seeded_rng(19, &[stream::INIT]);
        let h = 1e-6;
        for _ in 0..100 {
            let x = rng.random_range(-3.0..3.5);
            let analytic = q.score(&x).unwrap();
            for j in 0..q.param_count() {
                let mut up = base.clone();
                let mut down = base.clone();
                up[j] += h;
                down[j] -= h;
                let build = |p: &[f64]| {
                    GaussianMixture1D::from_logits(
                        p[..k].to_vec(),
                        p[k..2 * k].to_vec(),
                        p[2 * k..].to_vec(),
                    )
                    .unwrap()
                };
                let numeric = (build(&up).log_prob(&x).unwrap()
                    - build(&down).log_prob(&x).unwrap())
                    / (2.0 * h);
                assert_relative_eq!(analytic[j], numeric, max_relative = 1e-5, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn score_has_zero_mean_under_q() {
        let q = two_component();
        let mut rng = seeded_rng(5, &[stream::SOLVER]);
        let samples = 200_000;
        let mut acc = vec![0.0; q.param_count()];
        let mut x = 0.0;
        for _ in 0..samples {
            q.sample_into(&mut x, &mut rng);
            q.accumulate_weighted_score(&x, 1.0 / samples as f64, &mut acc)
                .unwrap();
        }
        for (j, a) in acc.iter().enumerate() {
            assert!(a.abs() < 0.02, "score mean {a} at parameter {j}");
        }
    }

    #[test]
    fn sample_moments_match_a_single_component() {
        let q = GaussianMixture1D::single(2.0, 0.5).unwrap();
        let mut rng = seeded_rng(9, &[stream::SOLVER]);
        let samples = 100_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let x = q.sample(&mut rng);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / samples as f64;
        let var = sum_sq / samples as f64 - mean * mean;
        assert_relative_eq!(mean, 2.0, epsilon = 0.01);
        assert_relative_eq!(var.sqrt(), 0.5, epsilon = 0.01);
    }

    #[test]
    fn component_pick_frequencies_match_weights() {
        // Components are far apart, so the sign of the sample identifies
        // which one was picked.
        let q = GaussianMixture1D::new(&[0.25, 0.75], &[-20.0, 20.0], &[1.0, 1.0]).unwrap();
        let mut rng = seeded_rng(13, &[stream::SOLVER]);
        let samples = 100_000;
        let mut right = 0u32;
        for _ in 0..samples {
            if q.sample(&mut rng) > 0.0 {
                right += 1;
            }
        }
        assert_relative_eq!(right as f64 / samples as f64, 0.75, epsilon = 5e-3);
    }

    #[test]
    fn monte_carlo_entropy_matches_gaussian_closed_form() {
        // E[-log q] for a single Gaussian is 0.5 ln(2 pi e sigma^2); this
        // ties sampling and log_prob together through an independent formula.
        let sigma = 0.7;
        let q = GaussianMixture1D::single(-1.0, sigma).unwrap();
        assert!(q.entropy_closed_form().is_none());
        let mut rng = seeded_rng(17, &[stream::SOLVER]);
        let samples = 200_000;
        let mut acc = 0.0;
        for _ in 0..samples {
            let x = q.sample(&mut rng);
            acc -= q.entropy_reward(&x).unwrap().unwrap();
        }
        let analytic = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sigma * sigma).ln();
        assert_relative_eq!(acc / samples as f64, analytic, epsilon = 5e-3);
    }

    #[test]
    fn dead_component_is_inert() {
        let q = GaussianMixture1D::new(&[1.0, 0.0], &[0.5, 9.0], &[1.0, 1.0]).unwrap();
        let single = GaussianMixture1D::single(0.5, 1.0).unwrap();
        let x = 0.1;
        assert_relative_eq!(
            q.log_prob(&x).unwrap(),
            single.log_prob(&x).unwrap(),
            epsilon = 1e-12
        );
        let score = q.score(&x).unwrap();
        // Dead component: logit, mean, and std gradients all vanish.
        assert_eq!(score[1], 0.0);
        assert_eq!(score[3], 0.0);
        assert_eq!(score[5], 0.0);
        let mut rng = seeded_rng(1, &[stream::SOLVER]);
        for _ in 0..1000 {
            assert!(q.sample(&mut rng) < 5.0, "dead component was sampled");
        }
    }

    #[test]
    fn apply_step_descends_and_enforces_the_std_floor() {
        let mut q = GaussianMixture1D::single(1.0, 0.5).unwrap();
        q.apply_step(&[0.0, 2.0, 0.0], 0.1).unwrap();
        assert_relative_eq!(q.component_means()[0], 0.8, epsilon = 1e-12);
        q.apply_step(&[0.0, 0.0, 1e9], 1.0).unwrap();
        assert_eq!(q.component_stds()[0], STD_FLOOR);
        assert!(q.apply_step(&[0.0; 2], 0.1).is_err());
        assert!(q.apply_step(&[f64::NAN, 0.0, 0.0], 0.1).is_err());
        assert!(q.apply_step(&[0.0; 3], -1.0).is_err());
    }

    #[test]
    fn sampling_is_deterministic_for_a_fixed_seed() {
        let q = two_component();
        let mut rng_a = seeded_rng(21, &[stream::SOLVER]);
        let mut rng_b = seeded_rng(21, &[stream::SOLVER]);
        for _ in 0..200 {
            assert_eq!(q.sample(&mut rng_a), q.sample(&mut rng_b));
        }
    }

    proptest! {
        #[test]
        fn weights_stay_on_the_simplex_under_updates(
            raw in proptest::collection::vec(0.05f64..1.0, 2..=4),
            grads in proptest::collection::vec(-10.0f64..10.0, 12),
            lr in 1e-4f64..1.0
        ) {
            let k = raw.len();
            let means = vec![0.0; k];
            let stds = vec![1.0; k];
            let mut q = GaussianMixture1D::new(&raw, &means, &stds).unwrap();
            q.apply_step(&grads[..3 * k], lr).unwrap();
            let w = q.weights();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|v| *v >= 0.0));
            prop_assert!(q.component_stds().iter().all(|s| *s >= STD_FLOOR));
        }

        #[test]
        fn responsibilities_sum_to_one_everywhere(
            x in -50.0f64..50.0,
            mu in -5.0f64..5.0
        ) {
            let q = GaussianMixture1D::new(&[0.4, 0.6], &[mu, -mu], &[0.3, 2.0]).unwrap();
            let r: f64 = q.responsibilities(x).iter().sum();
            prop_assert!((r - 1.0).abs() < 1e-9);
        }
    }
}

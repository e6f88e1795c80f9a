//! Evaluation metrics for completed runs: importance-sampling and
//! autocorrelation effective sample sizes, ground-state fidelity,
//! time-to-solution extraction, critical-temperature estimation, curve
//! fits, and distribution distances.
//!
//! Everything here is a pure function over finished run data. Energies fed
//! to the importance-weight path are exact by default — these are
//! analysis-time quantities — with an explicitly noisy variant for the
//! ablation that routes each weight through a single oracle read.

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, ENUMERATION_LIMIT};
use crate::oracle::{Measurable, NoisyOracle};
use crate::record::RunRecord;
use crate::spin::SpinConfig;
use crate::variational::VariationalFamily;

/// Trailing-window width used to smooth |M| traces before threshold
/// crossings are read off; raw per-iteration batch magnetizations are noisy
/// enough to overcount crossings.
pub const SOLUTION_SMOOTHING_WINDOW: usize = 10;

/// Normalized importance-sampling effective sample size from log-weights:
/// (Σ e^{A_i})² / (n · Σ e^{2 A_i}), stabilized by subtracting max A_i.
///
/// The result lies in (0, 1]: 1 for uniform weights, 1/n under total weight
/// concentration. Adding a constant to every log-weight leaves it unchanged.
pub fn log_weight_ess(log_weights: &[f64]) -> Result<f64> {
    if log_weights.is_empty() {
        return Err(Error::invalid("effective sample size needs at least one weight"));
    }
    if log_weights.iter().any(|a| !a.is_finite()) {
        return Err(Error::NonFinite("importance log-weight"));
    }
    let max = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &a in log_weights {
        let w = (a - max).exp();
        sum += w;
        sum_sq += w * w;
    }
    Ok(sum * sum / (log_weights.len() as f64 * sum_sq))
}

/// Normalized effective sample size of Boltzmann importance weights
/// A_i = -beta * E(x_i) - log q(x_i), from precomputed log-densities and
/// exact energies.
pub fn ess(log_q: &[f64], energies: &[f64], beta: f64) -> Result<f64> {
    if log_q.len() != energies.len() {
        return Err(Error::DimensionMismatch {
            expected: log_q.len(),
            got: energies.len(),
        });
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("inverse temperature"));
    }
    let log_weights: Vec<f64> = log_q
        .iter()
        .zip(energies)
        .map(|(&lq, &e)| -beta * e - lq)
        .collect();
    log_weight_ess(&log_weights)
}

/// [`ess`] evaluated directly on a batch of samples from a variational
/// family, using exact energies.
pub fn ess_for_samples<F: VariationalFamily>(
    family: &F,
    hamiltonian: &Hamiltonian,
    samples: &[F::Point],
    beta: f64,
) -> Result<f64> {
    let mut log_q = Vec::with_capacity(samples.len());
    let mut energies = Vec::with_capacity(samples.len());
    for x in samples {
        log_q.push(family.log_prob(x)?);
        energies.push(x.exact_energy(hamiltonian)?);
    }
    ess(&log_q, &energies, beta)
}

/// Noisy variant of [`ess_for_samples`]: each weight's energy comes from
/// one oracle read instead of the exact hamiltonian, so measurement noise
/// propagates into the reported sample size.
pub fn ess_for_samples_noisy<F: VariationalFamily>(
    family: &F,
    oracle: &mut NoisyOracle,
    samples: &[F::Point],
    beta: f64,
) -> Result<f64> {
    let mut log_q = Vec::with_capacity(samples.len());
    let mut energies = Vec::with_capacity(samples.len());
    for x in samples {
        log_q.push(family.log_prob(x)?);
        energies.push(x.measure_with(oracle)?);
    }
    ess(&log_q, &energies, beta)
}

/// Normalized effective sample size of a correlated scalar series (e.g. a
/// Markov-chain observable trace): 1 / (2 τ_int) with the integrated
/// autocorrelation time truncated by the initial-positive-sequence rule on
/// paired autocovariances. Clamped to (0, 1]; antithetic chains cap at 1.
pub fn ess_autocorr(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 4 {
        return Err(Error::invalid(
            "autocorrelation sample size needs at least 4 points",
        ));
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("series value"));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let autocov = |lag: usize| -> f64 {
        series[..n - lag]
            .iter()
            .zip(&series[lag..])
            .map(|(a, b)| (a - mean) * (b - mean))
            .sum::<f64>()
            / n as f64
    };
    let gamma0 = autocov(0);
    if gamma0 <= 0.0 {
        return Err(Error::invalid(
            "autocorrelation sample size is undefined for a constant series",
        ));
    }
    // Sum gamma_{2m} + gamma_{2m+1} pairs while they stay positive.
    let mut paired_sum = 0.0;
    let mut m = 0usize;
    while 2 * m + 1 < n {
        let pair = autocov(2 * m) + autocov(2 * m + 1);
        if pair <= 0.0 {
            break;
        }
        paired_sum += pair;
        m += 1;
    }
    let denominator = 2.0 * paired_sum - gamma0;
    if denominator <= 0.0 {
        return Ok(1.0);
    }
    Ok((gamma0 / denominator).min(1.0))
}

/// Fidelity of a measured |M| against the ferromagnetic optimum |M| = 1.
pub fn fidelity(abs_magnetization: f64) -> f64 {
    abs_magnetization.abs().min(1.0)
}

/// First cumulative oracle-evaluation count at which the smoothed |M|
/// trace (trailing window of [`SOLUTION_SMOOTHING_WINDOW`] rows) reaches
/// `target_abs_mag`; `None` if it never does.
pub fn time_to_solution(record: &RunRecord, target_abs_mag: f64) -> Option<u64> {
    let rows = record.rows();
    let mut window_sum = 0.0;
    for (i, row) in rows.iter().enumerate() {
        window_sum += row.batch_abs_mag;
        if i >= SOLUTION_SMOOTHING_WINDOW {
            window_sum -= rows[i - SOLUTION_SMOOTHING_WINDOW].batch_abs_mag;
        }
        let width = (i + 1).min(SOLUTION_SMOOTHING_WINDOW);
        if window_sum / width as f64 >= target_abs_mag {
            return Some(row.cum_evals);
        }
    }
    None
}

/// Temperature of steepest |M| decline on a sweep grid, read off with
/// central differences: the working definition of the apparent critical
/// temperature.
pub fn estimate_tc(temperatures: &[f64], abs_mags: &[f64]) -> Result<f64> {
    let n = temperatures.len();
    if n != abs_mags.len() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: abs_mags.len(),
        });
    }
    if n < 3 {
        return Err(Error::invalid(
            "critical-temperature estimation needs at least 3 grid points",
        ));
    }
    if temperatures.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("temperature grid must increase strictly"));
    }
    if temperatures.iter().chain(abs_mags).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sweep value"));
    }
    let mut best_t = temperatures[1];
    let mut best_slope = f64::NEG_INFINITY;
    for i in 1..n - 1 {
        let slope = ((abs_mags[i + 1] - abs_mags[i - 1]) / (temperatures[i + 1] - temperatures[i - 1])).abs();
        if slope > best_slope {
            best_slope = slope;
            best_t = temperatures[i];
        }
    }
    Ok(best_t)
}

/// One aggregated sweep measurement: mean and spread of |M| over repeated
/// seeds at a (temperature, noise level) grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Sampling temperature.
    pub temperature: f64,
    /// Relative measurement-noise level.
    pub sigma: f64,
    /// Mean |M| across seeds.
    pub abs_mag_mean: f64,
    /// Sample standard deviation of |M| across seeds (0 for one seed).
    pub abs_mag_std: f64,
    /// Mean cumulative oracle evaluations across seeds.
    pub cum_evals: f64,
    /// Number of seeds aggregated into this row.
    pub seeds: usize,
}

/// Aggregated temperature-sweep results, grouped by noise level with
/// temperatures ascending within each group.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Build a table, enforcing ascending temperatures within each noise
    /// group.
    pub fn new(rows: Vec<SweepRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("sweep table needs at least one row"));
        }
        let mut last_temp_by_sigma: Vec<(f64, f64)> = Vec::new();
        for row in &rows {
            if !row.temperature.is_finite() || row.temperature <= 0.0 {
                return Err(Error::invalid(format!(
                    "sweep temperature {} must be positive and finite",
                    row.temperature
                )));
            }
            match last_temp_by_sigma.iter_mut().find(|(s, _)| *s == row.sigma) {
                Some((_, last)) => {
                    if row.temperature <= *last {
                        return Err(Error::invalid(format!(
                            "temperatures must ascend within a noise group, got {} after {}",
                            row.temperature, *last
                        )));
                    }
                    *last = row.temperature;
                }
                None => last_temp_by_sigma.push((row.sigma, row.temperature)),
            }
        }
        Ok(Self { rows })
    }

    /// Aggregate per-seed sweep results (each seed's points in the same
    /// (sigma, temperature) order) into mean ± std rows.
    pub fn aggregate(per_seed: &[Vec<crate::brain::SweepPoint>]) -> Result<Self> {
        if per_seed.is_empty() || per_seed[0].is_empty() {
            return Err(Error::invalid("sweep aggregation needs at least one run"));
        }
        let len = per_seed[0].len();
        for run in per_seed {
            if run.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    got: run.len(),
                });
            }
        }
        let seeds = per_seed.len();
        let mut rows = Vec::with_capacity(len);
        for i in 0..len {
            let first = &per_seed[0][i];
            for run in per_seed {
                if run[i].sigma != first.sigma || run[i].temperature != first.temperature {
                    return Err(Error::invalid(
                        "per-seed sweeps must share one (sigma, temperature) grid",
                    ));
                }
            }
            let mags: Vec<f64> = per_seed.iter().map(|run| run[i].abs_magnetization).collect();
            let (mean, std) = mean_and_std(&mags);
            let evals =
                per_seed.iter().map(|run| run[i].evals as f64).sum::<f64>() / seeds as f64;
            rows.push(SweepRow {
                temperature: first.temperature,
                sigma: first.sigma,
                abs_mag_mean: mean,
                abs_mag_std: std,
                cum_evals: evals,
                seeds,
            });
        }
        Self::new(rows)
    }

    /// All rows in insertion order.
    pub fn rows(&self) -> &[SweepRow] {
        &self.rows
    }

    /// Distinct noise levels in first-appearance order.
    pub fn sigmas(&self) -> Vec<f64> {
        let mut seen = Vec::new();
        for row in &self.rows {
            if !seen.contains(&row.sigma) {
                seen.push(row.sigma);
            }
        }
        seen
    }

    /// The rows of one noise group, temperatures ascending.
    pub fn group(&self, sigma: f64) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.sigma == sigma).collect()
    }

    /// Apparent critical temperature of one noise group.
    pub fn estimate_tc(&self, sigma: f64) -> Result<f64> {
        let group = self.group(sigma);
        let temps: Vec<f64> = group.iter().map(|r| r.temperature).collect();
        let mags: Vec<f64> = group.iter().map(|r| r.abs_mag_mean).collect();
        estimate_tc(&temps, &mags)
    }
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for a single
/// value).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares fit of y = a x^2 + b x + c. Returns (a, b, c).
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::invalid("quadratic fit needs at least 3 points"));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::NonFinite("fit input"));
    }
    // Normal equations over the power sums of x.
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in points {
        let mut xp = 1.0;
        for (k, sum) in s.iter_mut().enumerate() {
            *sum += xp;
            if k < 3 {
                t[k] += y * xp;
            }
            xp *= x;
        }
    }
    // Rows ordered for coefficients (c, b, a).
    let mut m = [
        [s[0], s[1], s[2], t[0]],
        [s[1], s[2], s[3], t[1]],
        [s[2], s[3], s[4], t[2]],
    ];
    let solution = solve_3x3(&mut m)
        .ok_or_else(|| Error::invalid("quadratic fit is degenerate: need 3 distinct x values"))?;
    Ok((solution[2], solution[1], solution[0]))
}

/// Gaussian elimination with partial pivoting on a 3x4 augmented system.
fn solve_3x3(m: &mut [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| {
            m[a][col]
                .abs()
                .partial_cmp(&m[b][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let factor = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= factor * m[col][k];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Least-squares fit of y = c * x^p in log-log space. Returns
/// (prefactor c, exponent p). All inputs must be strictly positive.
pub fn fit_power(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::invalid("power-law fit needs at least 2 points"));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() || x <= 0.0 || y <= 0.0 {
            return Err(Error::invalid(format!(
                "power-law fit needs positive finite points, got ({x}, {y})"
            )));
        }
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let var_x: f64 = logs.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if var_x < 1e-24 {
        return Err(Error::invalid(
            "power-law fit is degenerate: need 2 distinct x values",
        ));
    }
    let cov: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let exponent = cov / var_x;
    let prefactor = (mean_y - exponent * mean_x).exp();
    Ok((prefactor, exponent))
}

/// Total variation distance 0.5 * Σ |p_i - q_i| between two distributions
/// on the same support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    if p.iter().chain(q).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("distribution entry"));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0)
}

/// Empirical distribution of spin samples over all 2^N configurations,
/// indexed like the enumerated Boltzmann distribution. Limited to systems
/// small enough to enumerate.
pub fn empirical_distribution(samples: &[SpinConfig]) -> Result<Vec<f64>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid("empirical distribution needs at least one sample"))?;
    let n = first.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLargeToEnumerate {
            n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut counts = vec![0.0f64; 1 << n];
    for sample in samples {
        if sample.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: sample.len(),
            });
        }
        counts[sample.to_index()] += 1.0;
    }
    let total = samples.len() as f64;
    for c in &mut counts {
        *c /= total;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Boundary;
    use crate::record::IterationRow;
    use crate::rng::{seeded_rng, stream};
    use crate::spin::Shape;
    use crate::variational::BernoulliField;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn uniform_weights_give_a_full_sample_size() {
        assert_eq!(log_weight_ess(&[3.5; 17]).unwrap(), 1.0);
    }

    #[test]
    fn one_dominant_weight_collapses_to_one_over_n() {
        let mut a = vec![0.0; 10];
        a[0] = 1000.0;
        assert_relative_eq!(log_weight_ess(&a).unwrap(), 0.1, max_relative = 1e-9);
    }

    #[test]
    fn small_weight_set_matches_a_hand_computation() {
        // Weights 1, 2, 4: (1+2+4)^2 / (3 * (1+4+16)) = 49/63 = 7/9.
        let a = [0.0, 2.0f64.ln(), 4.0f64.ln()];
        assert_relative_eq!(log_weight_ess(&a).unwrap(), 7.0 / 9.0, max_relative = 1e-12);
    }

    #[test]
    fn ess_rejects_empty_and_non_finite_input() {
        assert!(log_weight_ess(&[]).is_err());
        assert!(log_weight_ess(&[1.0, f64::NAN]).is_err());
        assert!(log_weight_ess(&[1.0, f64::INFINITY]).is_err());
        assert!(ess(&[0.0, 0.0], &[1.0], 1.0).is_err());
        assert!(ess(&[0.0], &[1.0], f64::NAN).is_err());
    }

    #[test]
    fn ess_assembles_boltzmann_log_weights() {
        let log_q = [-0.5, -1.0, -2.0];
        let energies = [1.0, 0.0, -1.0];
        let beta = 0.7;
        let direct = log_weight_ess(&[
            -beta * 1.0 + 0.5,
            -beta * 0.0 + 1.0,
            -beta * -1.0 + 2.0,
        ])
        .unwrap();
        assert_eq!(ess(&log_q, &energies, beta).unwrap(), direct);
    }

    #[test]
    fn sample_level_ess_agrees_with_the_manual_assembly() {
        let h = Hamiltonian::curie_weiss(6, 1.0).unwrap();
        let q = BernoulliField::new(vec![0.8; 6]).unwrap();
        let mut rng = seeded_rng(7, &[stream::SOLVER]);
        let samples: Vec<SpinConfig> = (0..200).map(|_| q.sample(&mut rng)).collect();
        let mut log_q = Vec::new();
        let mut energies = Vec::new();
        for s in &samples {
            log_q.push(q.log_prob(s).unwrap());
            energies.push(h.energy(s).unwrap());
        }
        let beta = 1.3;
        assert_eq!(
            ess_for_samples(&q, &h, &samples, beta).unwrap(),
            ess(&log_q, &energies, beta).unwrap()
        );

        // The noisy variant at sigma = 0 consumes oracle draws but matches
        // the exact-energy value; eval accounting ticks once per sample.
        let mut oracle = NoisyOracle::new(h.clone(), 0.0, 5).unwrap();
        let noisy = ess_for_samples_noisy(&q, &mut oracle, &samples, beta).unwrap();
        assert_relative_eq!(noisy, ess(&log_q, &energies, beta).unwrap(), max_relative = 1e-12);
        assert_eq!(oracle.eval_count(), 200);
    }

    proptest! {
        #[test]
        fn ess_lies_in_the_unit_interval_and_ignores_shifts(
            a in proptest::collection::vec(-50.0f64..50.0, 1..40),
            shift in -100.0f64..100.0,
        ) {
            let base = log_weight_ess(&a).unwrap();
            prop_assert!(base > 0.0 && base <= 1.0 + 1e-12);
            prop_assert!(base >= 1.0 / a.len() as f64 - 1e-12);
            let shifted: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let moved = log_weight_ess(&shifted).unwrap();
            prop_assert!((base - moved).abs() < 1e-12);
        }

        #[test]
        fn fidelity_is_monotone(lo in 0.0f64..1.0, delta in 0.0f64..1.0) {
            let hi = (lo + delta).min(1.0);
            prop_assert!(fidelity(hi) >= fidelity(lo));
        }
    }

    #[test]
    fn independent_series_has_nearly_full_autocorr_sample_size() {
        let mut rng = seeded_rng(11, &[stream::SOLVER]);
        let series: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let e = ess_autocorr(&series).unwrap();
        assert!(e > 0.9, "iid series scored {e}");
    }

    #[test]
    fn ar1_series_matches_the_theoretical_sample_size() {
        // For x_t = phi x_{t-1} + noise, ESS/n -> (1 - phi) / (1 + phi).
        let phi = 0.95;
        let mut rng = seeded_rng(13, &[stream::SOLVER]);
        let mut x = 0.0;
        let series: Vec<f64> = (0..200_000)
            .map(|_| {
                let z: f64 = rng.sample(rand_distr::StandardNormal);
                x = phi * x + z;
                x
            })
            .collect();
        let e = ess_autocorr(&series).unwrap();
        let theory = (1.0 - phi) / (1.0 + phi);
        assert!(
            e > theory / 1.6 && e < theory * 1.6,
            "AR(1) sample size {e} vs theory {theory}"
        );
    }

    #[test]
    fn antithetic_series_caps_at_one_and_constants_are_rejected() {
        let alternating: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(ess_autocorr(&alternating).unwrap(), 1.0);
        assert!(ess_autocorr(&[2.0; 50]).is_err());
        assert!(ess_autocorr(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn fidelity_reads_off_the_magnetization() {
        assert_eq!(fidelity(1.0), 1.0);
        assert_eq!(fidelity(0.51), 0.51);
        assert_eq!(fidelity(0.98), 0.98);
        assert_eq!(fidelity(-0.25), 0.25);
        assert_eq!(fidelity(1.7), 1.0);
    }

    fn record_from_mags(mags: &[f64]) -> RunRecord {
        let rows: Vec<IterationRow> = mags
            .iter()
            .enumerate()
            .map(|(i, &m)| IterationRow {
                iter: i as u64,
                mean_reward: 0.0,
                loss_est: 0.0,
                batch_abs_mag: m,
                cum_evals: 100 * (i as u64 + 1),
            })
            .collect();
        RunRecord::new(rows, vec![], true)
    }

    #[test]
    fn immediate_crossings_return_the_first_eval_count() {
        let record = record_from_mags(&[0.9, 0.95, 0.99]);
        assert_eq!(time_to_solution(&record, 0.8), Some(100));
    }

    #[test]
    fn never_crossing_returns_none() {
        let record = record_from_mags(&[0.1; 40]);
        assert_eq!(time_to_solution(&record, 0.8), None);
        let empty = RunRecord::new(vec![], vec![], true);
        assert_eq!(time_to_solution(&empty, 0.1), None);
    }

    #[test]
    fn crossings_use_the_smoothed_trace() {
        // One spike at row 5 must not trigger the threshold; the sustained
        // rise later should, once the trailing mean reaches it.
        let mut mags = vec![0.0; 20];
        mags[5] = 1.0;
        mags.extend(std::iter::repeat(1.0).take(20));
        let record = record_from_mags(&mags);
        let evals = time_to_solution(&record, 0.95).unwrap();
        // Trailing-10 mean first reaches 0.95 ten rows into the plateau
        // minus the half-window: rows 20.. are 1.0, window fills at row 29
        // with mean 1.0; row 28 has mean 0.9.
        assert_eq!(evals, 100 * 30);
    }

    #[test]
    fn step_transition_is_located_on_the_grid() {
        let temps: Vec<f64> = (0..17).map(|i| 0.5 + 0.05 * i as f64).collect();
        let mags: Vec<f64> = temps.iter().map(|&t| if t < 0.87 { 1.0 } else { 0.0 }).collect();
        let tc = estimate_tc(&temps, &mags).unwrap();
        assert!((tc - 0.87).abs() <= 0.051, "step located at {tc}");
    }

    #[test]
    fn smooth_transition_estimate_is_stable_under_grid_refinement() {
        let curve = |t: f64| 1.0 / (1.0 + ((t - 2.2) / 0.1).exp());
        let coarse: Vec<f64> = (0..16).map(|i| 1.5 + 0.1 * i as f64).collect();
        let fine: Vec<f64> = (0..31).map(|i| 1.5 + 0.05 * i as f64).collect();
        let tc_coarse = estimate_tc(&coarse, &coarse.iter().map(|&t| curve(t)).collect::<Vec<_>>()).unwrap();
        let tc_fine = estimate_tc(&fine, &fine.iter().map(|&t| curve(t)).collect::<Vec<_>>()).unwrap();
        assert!((tc_coarse - 2.2).abs() <= 0.1 + 1e-12);
        assert!((tc_fine - 2.2).abs() <= 0.05 + 1e-12);
        assert!((tc_coarse - tc_fine).abs() <= 0.1 + 1e-12);
    }

    #[test]
    fn tc_estimation_validates_its_grid() {
        assert!(estimate_tc(&[1.0, 2.0], &[1.0, 0.0]).is_err());
        assert!(estimate_tc(&[1.0, 2.0, 2.0], &[1.0, 0.5, 0.0]).is_err());
        assert!(estimate_tc(&[2.0, 1.0, 3.0], &[1.0, 0.5, 0.0]).is_err());
        assert!(estimate_tc(&[1.0, 2.0, 3.0], &[1.0, 0.5]).is_err());
    }

    #[test]
    fn sweep_table_groups_by_noise_and_orders_temperatures() {
        let rows = vec![
            SweepRow { temperature: 0.5, sigma: 0.0, abs_mag_mean: 0.99, abs_mag_std: 0.01, cum_evals: 1e4, seeds: 5 },
            SweepRow { temperature: 1.0, sigma: 0.0, abs_mag_mean: 0.60, abs_mag_std: 0.05, cum_evals: 1e4, seeds: 5 },
            SweepRow { temperature: 1.5, sigma: 0.0, abs_mag_mean: 0.20, abs_mag_std: 0.04, cum_evals: 1e4, seeds: 5 },
            SweepRow { temperature: 0.5, sigma: 0.06, abs_mag_mean: 0.95, abs_mag_std: 0.02, cum_evals: 1e4, seeds: 5 },
            SweepRow { temperature: 1.0, sigma: 0.06, abs_mag_mean: 0.80, abs_mag_std: 0.03, cum_evals: 1e4, seeds: 5 },
        ];
        let table = SweepTable::new(rows).unwrap();
        assert_eq!(table.sigmas(), vec![0.0, 0.06]);
        assert_eq!(table.group(0.0).len(), 3);
        assert_eq!(table.group(0.06).len(), 2);
        let tc = table.estimate_tc(0.0).unwrap();
        assert_eq!(tc, 1.0);

        let bad = vec![
            SweepRow { temperature: 1.0, sigma: 0.0, abs_mag_mean: 0.6, abs_mag_std: 0.0, cum_evals: 0.0, seeds: 1 },
            SweepRow { temperature: 0.5, sigma: 0.0, abs_mag_mean: 0.9, abs_mag_std: 0.0, cum_evals: 0.0, seeds: 1 },
        ];
        assert!(SweepTable::new(bad).is_err());
    }

    #[test]
    fn sweep_aggregation_averages_across_seeds() {
        use crate::brain::SweepPoint;
        let seed_a = vec![
            SweepPoint { temperature: 0.5, sigma: 0.0, abs_magnetization: 0.9, evals: 100, converged: true },
            SweepPoint { temperature: 1.0, sigma: 0.0, abs_magnetization: 0.5, evals: 200, converged: true },
        ];
        let seed_b = vec![
            SweepPoint { temperature: 0.5, sigma: 0.0, abs_magnetization: 1.0, evals: 300, converged: true },
            SweepPoint { temperature: 1.0, sigma: 0.0, abs_magnetization: 0.3, evals: 400, converged: true },
        ];
        let table = SweepTable::aggregate(&[seed_a.clone(), seed_b]).unwrap();
        let rows = table.rows();
        assert_eq!(rows.len(), 2);
        assert_relative_eq!(rows[0].abs_mag_mean, 0.95);
        assert_relative_eq!(rows[0].abs_mag_std, (0.005f64 / 1.0).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(rows[0].cum_evals, 200.0);
        assert_eq!(rows[0].seeds, 2);
        assert_relative_eq!(rows[1].abs_mag_mean, 0.4);

        let short = vec![seed_a[0].clone()];
        assert!(SweepTable::aggregate(&[seed_a, short]).is_err());
    }

    #[test]
    fn exact_parabola_is_recovered() {
        let points: Vec<(f64, f64)> = [0.0, 0.01, 0.02, 0.03, 0.06]
            .iter()
            .map(|&x| (x, 2.0 * x * x + 3.0 * x + 1.0))
            .collect();
        let (a, b, c) = fit_quadratic(&points).unwrap();
        assert_relative_eq!(a, 2.0, max_relative = 1e-9);
        assert_relative_eq!(b, 3.0, max_relative = 1e-9);
        assert_relative_eq!(c, 1.0, max_relative = 1e-9);
    }

    #[test]
    fn golden_quadratic_coefficients_roundtrip() {
        // Reference coefficient triple for the noise-vs-batch-size curve.
        let (ga, gb, gc) = (339.9, 416.7, 1190.5);
        let points: Vec<(f64, f64)> = [0.0, 0.01, 0.03, 0.06, 0.1]
            .iter()
            .map(|&x| (x, ga * x * x + gb * x + gc))
            .collect();
        let (a, b, c) = fit_quadratic(&points).unwrap();
        assert_relative_eq!(a, ga, max_relative = 1e-6);
        assert_relative_eq!(b, gb, max_relative = 1e-6);
        assert_relative_eq!(c, gc, max_relative = 1e-6);
    }

    #[test]
    fn degenerate_quadratic_input_is_rejected() {
        assert!(fit_quadratic(&[(1.0, 2.0), (2.0, 3.0)]).is_err());
        assert!(fit_quadratic(&[(1.0, 2.0), (1.0, 3.0), (1.0, 4.0), (1.0, 5.0)]).is_err());
        assert!(fit_quadratic(&[(1.0, 2.0), (2.0, 3.0), (2.0, 3.5), (1.0, 1.0)]).is_err());
        assert!(fit_quadratic(&[(1.0, f64::NAN), (2.0, 3.0), (3.0, 4.0)]).is_err());
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let points: Vec<(f64, f64)> = [1024.0, 4096.0, 16384.0]
            .iter()
            .map(|&n: &f64| (n, 63.6 * n.powf(0.94)))
            .collect();
        let (c, p) = fit_power(&points).unwrap();
        assert_relative_eq!(c, 63.6, max_relative = 1e-9);
        assert_relative_eq!(p, 0.94, max_relative = 1e-9);
    }

    #[test]
    fn power_fit_validates_input() {
        assert!(fit_power(&[(10.0, 5.0)]).is_err());
        assert!(fit_power(&[(10.0, 5.0), (10.0, 6.0)]).is_err());
        assert!(fit_power(&[(10.0, 5.0), (-2.0, 6.0)]).is_err());
        assert!(fit_power(&[(10.0, 0.0), (20.0, 6.0)]).is_err());
    }

    #[test]
    fn tv_distance_behaves_like_a_metric_on_simple_cases() {
        let p = [0.5, 0.5, 0.0];
        let q = [0.0, 0.0, 1.0];
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(tv_distance(&p, &q).unwrap(), 1.0);
        assert_relative_eq!(
            tv_distance(&[0.6, 0.4], &[0.4, 0.6]).unwrap(),
            0.2,
            max_relative = 1e-12
        );
        assert!(tv_distance(&p, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn empirical_distribution_counts_states() {
        let up = SpinConfig::all_up(Shape::Chain(2));
        let down = SpinConfig::all_down(Shape::Chain(2));
        let dist = empirical_distribution(&[up.clone(), up.clone(), down, up]).unwrap();
        assert_eq!(dist.len(), 4);
        assert_relative_eq!(dist[SpinConfig::all_up(Shape::Chain(2)).to_index()], 0.75);
        assert_relative_eq!(dist[SpinConfig::all_down(Shape::Chain(2)).to_index()], 0.25);
        assert_relative_eq!(dist.iter().sum::<f64>(), 1.0, max_relative = 1e-12);

        assert!(empirical_distribution(&[]).is_err());
        let mixed = vec![
            SpinConfig::all_up(Shape::Chain(2)),
            SpinConfig::all_up(Shape::Chain(3)),
        ];
        assert!(empirical_distribution(&mixed).is_err());
        let too_big = vec![SpinConfig::all_up(Shape::Chain(21))];
        assert!(empirical_distribution(&too_big).is_err());
    }

    #[test]
    fn empirical_distribution_of_exact_samples_matches_enumeration() {
        // Draw directly from the enumerated Boltzmann distribution and
        // compare the reconstruction.
        let h = Hamiltonian::chain_1d(4, 1.0, Boundary::Open).unwrap();
        let exact = h.enumerate_boltzmann(0.8).unwrap();
        let mut rng = seeded_rng(23, &[stream::SOLVER]);
        let mut samples = Vec::new();
        for _ in 0..60_000 {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut index = 0;
            for (i, &p) in exact.probabilities().iter().enumerate() {
                acc += p;
                if u < acc {
                    index = i;
                    break;
                }
            }
            samples.push(exact.config(index));
        }
        let empirical = empirical_distribution(&samples).unwrap();
        let tv = tv_distance(&empirical, exact.probabilities()).unwrap();
        assert!(tv < 0.02, "reconstruction TV {tv}");
    }
}

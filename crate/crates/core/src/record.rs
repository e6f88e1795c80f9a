//! Per-iteration run traces shared by all solvers.
//!
//! Every solver (variational training, Metropolis variants, annealing,
//! replica exchange) reports progress as a sequence of [`IterationRow`]s
//! with one shared column set, so downstream metrics and CSV output treat
//! all of them uniformly.

/// One solver iteration: the trace row behind the CSV columns
/// `iter, mean_reward, loss_est, batch_abs_mag, cum_evals`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRow {
    /// Zero-based iteration index.
    pub iter: u64,
    /// Mean noisy reward of the iteration (beta times mean measured energy).
    pub mean_reward: f64,
    /// Free-energy estimate: negative entropy plus mean reward. Chain
    /// solvers have no entropy term and repeat the reward here.
    pub loss_est: f64,
    /// Mean absolute order parameter across the iteration's samples.
    pub batch_abs_mag: f64,
    /// Oracle evaluation counter after this iteration.
    pub cum_evals: u64,
}

/// Complete record of one training run: the per-iteration trace, the final
/// parameter snapshot, and whether the stopping rule fired before the
/// iteration cap.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    rows: Vec<IterationRow>,
    final_params: Vec<f64>,
    converged: bool,
}

impl RunRecord {
    pub(crate) fn new(rows: Vec<IterationRow>, final_params: Vec<f64>, converged: bool) -> Self {
        Self {
            rows,
            final_params,
            converged,
        }
    }

    /// The per-iteration trace, in order.
    pub fn rows(&self) -> &[IterationRow] {
        &self.rows
    }

    /// Parameters of the trained distribution at the final iteration.
    pub fn final_params(&self) -> &[f64] {
        &self.final_params
    }

    /// True when the moving-average stopping rule fired before the
    /// iteration cap.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Number of iterations executed.
    pub fn iterations(&self) -> usize {
        self.rows.len()
    }

    /// Total oracle evaluations consumed by the run.
    pub fn total_evals(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.cum_evals)
    }

    /// Loss estimates per iteration.
    pub fn loss_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.loss_est).collect()
    }

    /// Mean absolute order parameter per iteration.
    pub fn abs_mag_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.batch_abs_mag).collect()
    }
}

//! Energy models.
//!
//! Discrete spin models (all couplings ferromagnetic unless noted):
//!
//! * Curie-Weiss: H = -(J/2N) sum_{i!=j} s_i s_j, evaluated in O(N) through
//!   the identity H = -(J/2N) [(sum_i s_i)^2 - N].
//! * 2D nearest-neighbour Ising: H = -J sum_<ij> s_i s_j on an L x L square
//!   lattice, periodic or open boundaries, each bond counted once.
//! * 1D chain: H = -J sum_i s_i s_{i+1}, open or periodic.
//! * Dense couplings: H = -sum_{i<j} J_ij s_i s_j - sum_i h_i s_i.
//!
//! One continuous single-variable potential:
//!
//! * Double well: E(x) = a (x^2 - x0^2)^2 + b x, a shallow tilt b breaking
//!   the degeneracy between the wells at +-x0.
//!
//! Systems of up to [`ENUMERATION_LIMIT`] spins can be enumerated exactly,
//! yielding the full Boltzmann distribution for ground-truth comparisons.

use crate::error::{Error, Result};
use crate::spin::{Shape, SpinConfig};

/// Largest spin count for exact enumeration (2^20 states).
pub const ENUMERATION_LIMIT: usize = 20;

/// Boundary condition for lattice models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// An energy function over spin configurations or a scalar coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Hamiltonian {
    CurieWeiss { n: usize, coupling: f64 },
    NearestNeighbor2D { l: usize, coupling: f64, boundary: Boundary },
    Chain1D { n: usize, coupling: f64, boundary: Boundary },
    DoubleWell { a: f64, b: f64, x0: f64 },
    Dense { n: usize, couplings: Vec<f64>, fields: Vec<f64> },
}

impl Hamiltonian {
    /// Fully connected ferromagnet with the 1/2N normalization that keeps the
    /// aligned ground-state energy at -J(N-1)/2.
    pub fn curie_weiss(n: usize, coupling: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("curie_weiss: need at least 2 spins"));
        }
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::invalid("curie_weiss: coupling must be positive and finite"));
        }
        Ok(Hamiltonian::CurieWeiss { n, coupling })
    }

    /// L x L square-lattice ferromagnet. Periodic boundaries need L >= 3:
    /// at L = 2 the wrap bond coincides with the direct bond and every pair
    /// would be double-counted.
    pub fn nearest_neighbor_2d(l: usize, coupling: f64, boundary: Boundary) -> Result<Self> {
        if !(coupling > 0.0) || !coupling.is_finite() {
            return Err(Error::invalid("nearest_neighbor_2d: coupling must be positive and finite"));
        }
        match boundary {
            Boundary::Periodic if l < 3 => {
                Err(Error::invalid(format!("nearest_neighbor_2d: periodic lattice needs L >= 3, got {l}")))
            }
            Boundary::Open if l < 2 => {
                Err(Error::invalid(format!("nearest_neighbor_2d: open lattice needs L >= 2, got {l}")))
            }
            _ => Ok(Hamiltonian::NearestNeighbor2D { l, coupling, boundary }),
        }
    }

    /// 1D chain of N spins. Periodic chains need N >= 3 for the same
    /// double-counting reason as the 2D lattice.
    pub fn chain_1d(n: usize, coupling: f64, boundary: Boundary) -> Result<Self> {
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(Error::invalid("chain_1d: coupling must be nonzero and finite"));
        }
        match boundary {
            Boundary::Periodic if n < 3 => {
                Err(Error::invalid(format!("chain_1d: periodic chain needs N >= 3, got {n}")))
            }
            Boundary::Open if n < 2 => {
                Err(Error::invalid(format!("chain_1d: open chain needs N >= 2, got {n}")))
            }
            _ => Ok(Hamiltonian::Chain1D { n, coupling, boundary }),
        }
    }

    /// Double-well potential E(x) = a (x^2 - x0^2)^2 + b x.
    pub fn double_well(a: f64, b: f64, x0: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid("double_well: quartic coefficient a must be positive"));
        }
        if !b.is_finite() || !x0.is_finite() || x0 <= 0.0 {
            return Err(Error::invalid("double_well: b must be finite and x0 positive"));
        }
        Ok(Hamiltonian::DoubleWell { a, b, x0 })
    }

    /// Double well with the benchmark defaults a = 1, b = 0.2, x0 = 1.
    pub fn double_well_default() -> Self {
        Hamiltonian::DoubleWell { a: 1.0, b: 0.2, x0: 1.0 }
    }

    /// Arbitrary symmetric couplings with local fields. `couplings` is a
    /// row-major n x n matrix that must be symmetric with a zero diagonal;
    /// each pair contributes once.
    pub fn dense(couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        let n = fields.len();
        if n == 0 {
            return Err(Error::invalid("dense: need at least one spin"));
        }
        if couplings.len() != n * n {
            return Err(Error::invalid(format!(
                "dense: coupling matrix must be {n}x{n} = {} entries, got {}",
                n * n,
                couplings.len()
            )));
        }
        for i in 0..n {
            if couplings[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("dense: diagonal entry ({i},{i}) must be zero")));
            }
            for j in 0..i {
                if couplings[i * n + j] != couplings[j * n + i] {
                    return Err(Error::invalid(format!("dense: coupling matrix must be symmetric, differs at ({i},{j})")));
                }
            }
        }
        if couplings.iter().chain(fields.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("dense: couplings and fields must be finite"));
        }
        Ok(Hamiltonian::Dense { n, couplings, fields })
    }

    /// Number of spins, or None for the continuous potential.
    pub fn size(&self) -> Option<usize> {
        match *self {
            Hamiltonian::CurieWeiss { n, .. } => Some(n),
            Hamiltonian::NearestNeighbor2D { l, .. } => Some(l * l),
            Hamiltonian::Chain1D { n, .. } => Some(n),
            Hamiltonian::DoubleWell { .. } => None,
            Hamiltonian::Dense { n, .. } => Some(n),
        }
    }

    /// Natural lattice shape for sampling, or None for the continuous potential.
    pub fn shape(&self) -> Option<Shape> {
        match *self {
            Hamiltonian::NearestNeighbor2D { l, .. } => Some(Shape::Square(l)),
            _ => self.size().map(Shape::Chain),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Hamiltonian::DoubleWell { .. })
    }

    /// Exact energy of a spin configuration.
    pub fn energy(&self, config: &SpinConfig) -> Result<f64> {
        if let Some(expected) = self.size() {
            if config.len() != expected {
                return Err(Error::DimensionMismatch { expected, got: config.len() });
            }
        }
        let spins = config.spins();
        match *self {
            Hamiltonian::CurieWeiss { n, coupling } => {
                let total = config.spin_sum() as f64;
                Ok(-coupling / (2.0 * n as f64) * (total * total - n as f64))
            }
            Hamiltonian::NearestNeighbor2D { l, coupling, boundary } => {
                let mut bond_sum: i64 = 0;
                match boundary {
                    Boundary::Periodic => {
                        for row in 0..l {
                            let row_base = row * l;
                            let down_base = (row + 1) % l * l;
                            for col in 0..l {
                                let s = i64::from(spins[row_base + col]);
                                let right = i64::from(spins[row_base + (col + 1) % l]);
                                let down = i64::from(spins[down_base + col]);
                                bond_sum += s * (right + down);
                            }
                        }
                    }
                    Boundary::Open => {
                        for row in 0..l {
                            let row_base = row * l;
                            for col in 0..l {
                                let s = i64::from(spins[row_base + col]);
                                if col + 1 < l {
                                    bond_sum += s * i64::from(spins[row_base + col + 1]);
                                }
                                if row + 1 < l {
                                    bond_sum += s * i64::from(spins[row_base + l + col]);
                                }
                            }
                        }
                    }
                }
                Ok(-coupling * bond_sum as f64)
            }
            Hamiltonian::Chain1D { n, coupling, boundary } => {
                let mut bond_sum: i64 = 0;
                for i in 0..n - 1 {
                    bond_sum += i64::from(spins[i]) * i64::from(spins[i + 1]);
                }
                if boundary == Boundary::Periodic {
                    bond_sum += i64::from(spins[n - 1]) * i64::from(spins[0]);
                }
                Ok(-coupling * bond_sum as f64)
            }
            Hamiltonian::DoubleWell { .. } => {
                Err(Error::Unsupported("double-well potential takes a scalar coordinate, not spins"))
            }
            Hamiltonian::Dense { n, ref couplings, ref fields } => {
                let mut energy = 0.0;
                for i in 0..n {
                    let si = f64::from(spins[i]);
                    let row = &couplings[i * n..i * n + i];
                    let mut pair = 0.0;
                    for (j, &jij) in row.iter().enumerate() {
                        pair += jij * f64::from(spins[j]);
                    }
                    energy -= si * (pair + fields[i]);
                }
                Ok(energy)
            }
        }
    }

    /// Exact energy at a scalar coordinate (continuous potentials only).
    pub fn energy_scalar(&self, x: f64) -> Result<f64> {
        match *self {
            Hamiltonian::DoubleWell { a, b, x0 } => {
                let d = x * x - x0 * x0;
                Ok(a * d * d + b * x)
            }
            _ => Err(Error::Unsupported("spin models take a configuration, not a scalar coordinate")),
        }
    }

    /// Exact Boltzmann distribution at inverse temperature `beta` by full
    /// enumeration of all 2^N states. Limited to N <= 20.
    pub fn enumerate_boltzmann(&self, beta: f64) -> Result<ExactDistribution> {
        if self.is_continuous() {
            return Err(Error::Unsupported("cannot enumerate a continuous potential"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::invalid("enumerate_boltzmann: beta must be finite and nonnegative"));
        }
        let n = self.size().expect("discrete model has a size");
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooLargeToEnumerate { n, limit: ENUMERATION_LIMIT });
        }
        let shape = self.shape().expect("discrete model has a shape");
        let states = 1usize << n;
        let mut config = SpinConfig::all_down(shape);
        let mut energies = Vec::with_capacity(states);
        for index in 0..states {
            {
                let spins = config.spins_mut();
                for (i, s) in spins.iter_mut().enumerate() {
                    *s = if index >> i & 1 == 1 { 1 } else { -1 };
                }
            }
            energies.push(self.energy(&config)?);
        }
        // log Z via a max shift for numerical stability.
        let max_exponent = energies.iter().map(|&e| -beta * e).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for &e in &energies {
            total += (-beta * e - max_exponent).exp();
        }
        let log_z = max_exponent + total.ln();
        let probabilities = energies.iter().map(|&e| (-beta * e - log_z).exp()).collect();
        Ok(ExactDistribution { n, beta, shape, probabilities, energies, log_z })
    }
}

/// Exact Boltzmann distribution of a small discrete system. States are
/// indexed by bitmask: bit i set means spin i is +1.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    n: usize,
    beta: f64,
    shape: Shape,
    probabilities: Vec<f64>,
    energies: Vec<f64>,
    log_z: f64,
}

impl ExactDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    /// Number of states, 2^N.
    pub fn num_states(&self) -> usize {
        self.probabilities.len()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.probabilities[index]
    }

    /// The spin configuration for a state index.
    pub fn config(&self, index: usize) -> SpinConfig {
        SpinConfig::from_index(index, self.shape).expect("index within enumerated range")
    }

    /// Exact expectation of |magnetization|.
    pub fn mean_abs_magnetization(&self) -> f64 {
        let n = self.n as f64;
        self.probabilities
            .iter()
            .enumerate()
            .map(|(index, &p)| {
                let ups = index.count_ones() as f64;
                let m = (2.0 * ups - n) / n;
                p * m.abs()
            })
            .sum()
    }
}

//! Spin configurations.
//!
//! A configuration is a vector of ±1 spins plus shape metadata (a chain of N
//! sites or an L x L square lattice in row-major order). The shape carries no
//! couplings; energy models interpret the geometry.

use crate::error::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Lattice geometry of a spin vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// N sites in a line.
    Chain(usize),
    /// L x L sites, row-major.
    Square(usize),
}

impl Shape {
    /// Total number of sites.
    pub fn len(&self) -> usize {
        match *self {
            Shape::Chain(n) => n,
            Shape::Square(l) => l * l,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A vector of ±1 spins with its lattice shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    spins: Vec<i8>,
    shape: Shape,
}

impl SpinConfig {
    /// Build from explicit spins, validating every entry is ±1 and the length
    /// matches the shape.
    pub fn new(spins: Vec<i8>, shape: Shape) -> Result<Self> {
        if spins.len() != shape.len() {
            return Err(Error::DimensionMismatch { expected: shape.len(), got: spins.len() });
        }
        if let Some(&bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!("spins must be +1 or -1, found {bad}")));
        }
        Ok(SpinConfig { spins, shape })
    }

    /// All spins up.
    pub fn all_up(shape: Shape) -> Self {
        SpinConfig { spins: vec![1; shape.len()], shape }
    }

    /// All spins down.
    pub fn all_down(shape: Shape) -> Self {
        SpinConfig { spins: vec![-1; shape.len()], shape }
    }

    /// Uniformly random spins.
    pub fn random(shape: Shape, rng: &mut ChaCha8Rng) -> Self {
        let spins = (0..shape.len()).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
        SpinConfig { spins, shape }
    }

    /// Decode a configuration from a bitmask: bit i set means spin i is +1.
    /// Used together with exact enumeration, which indexes states this way.
    pub fn from_index(index: usize, shape: Shape) -> Result<Self> {
        let n = shape.len();
        if n >= usize::BITS as usize || index >= (1usize << n) {
            return Err(Error::invalid(format!("state index {index} out of range for {n} spins")));
        }
        let spins = (0..n).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect();
        Ok(SpinConfig { spins, shape })
    }

    /// Bitmask index of this configuration (bit i set for spin i = +1).
    pub fn to_index(&self) -> usize {
        self.spins
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &s)| if s == 1 { acc | 1 << i } else { acc })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    /// Flip one spin in place.
    pub fn flip(&mut self, site: usize) {
        self.spins[site] = -self.spins[site];
    }

    /// Global spin inversion (the Z2 symmetry partner).
    pub fn inverted(&self) -> Self {
        SpinConfig { spins: self.spins.iter().map(|&s| -s).collect(), shape: self.shape }
    }

    /// Mean spin, (1/N) sum_i s_i, in [-1, 1].
    pub fn magnetization(&self) -> f64 {
        let total: i64 = self.spins.iter().map(|&s| i64::from(s)).sum();
        total as f64 / self.spins.len() as f64
    }

    /// Sum of spins as an integer, handy for mean-field energies.
    pub fn spin_sum(&self) -> i64 {
        self.spins.iter().map(|&s| i64::from(s)).sum()
    }

    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.spins
    }
}

/// Mean spin of a configuration; free-function alias for the method.
pub fn magnetization(config: &SpinConfig) -> f64 {
    config.magnetization()
}

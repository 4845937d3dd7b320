//! The social-state lattice.
//!
//! With `n` agents per population, a round's outcome is the pair `(i, j)`
//! counting X1-players and Y1-players. The `(n+1)²` states are always
//! visited in row-major order (`i` outer, `j` inner) so that floating-point
//! sums over the lattice are bit-stable.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Population size used throughout the experiment layout.
pub const DEFAULT_POPULATION: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("state ({i}, {j}) is outside the lattice for n = {n}")]
    OutOfRange { n: u32, i: u32, j: u32 },
    #[error("population size must be at least 1")]
    EmptyPopulation,
    #[error("cannot tally an empty session")]
    EmptySession,
    #[error("state with population size {found} in a session of size {expected}")]
    MixedPopulationSize { expected: u32, found: u32 },
    #[error("lattice sizes differ: {left} vs {right}")]
    LatticeMismatch { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SocialState {
    i: u32,
    j: u32,
    n: u32,
}

impl SocialState {
    pub fn new(n: u32, i: u32, j: u32) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::EmptyPopulation);
        }
        if i > n || j > n {
            return Err(LatticeError::OutOfRange { n, i, j });
        }
        Ok(Self { i, j, n })
    }

    /// Number of X-agents playing X1.
    pub fn i(&self) -> u32 {
        self.i
    }

    /// Number of Y-agents playing Y1.
    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Coordinates `(i/n, j/n)` in the unit square.
    pub fn position(&self) -> (f64, f64) {
        let n = self.n as f64;
        (self.i as f64 / n, self.j as f64 / n)
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, t| acc * (n - t) as u128 / (t + 1) as u128)
}

/// Number of individual action profiles that map to state `(i, j)`:
/// `C(n, i) · C(n, j)`.
pub fn degeneracy(n: u32, i: u32, j: u32) -> Result<u128, LatticeError> {
    if i > n || j > n {
        return Err(LatticeError::OutOfRange { n, i, j });
    }
    Ok(binomial(n, i) * binomial(n, j))
}

/// Iterates the lattice cells of size `n` in row-major order.
pub fn cells(n: u32) -> impl Iterator<Item = (u32, u32)> {
    (0..=n).flat_map(move |i| (0..=n).map(move |j| (i, j)))
}

/// A dense real value per lattice cell, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGrid {
    n: u32,
    values: Vec<f64>,
}

impl LatticeGrid {
    pub fn zeros(n: u32) -> Self {
        let side = n as usize + 1;
        Self {
            n,
            values: vec![0.0; side * side],
        }
    }

    /// Fills the grid from a function of the cell.
    pub fn from_fn(n: u32, mut f: impl FnMut(u32, u32) -> f64) -> Self {
        let values = cells(n).map(|(i, j)| f(i, j)).collect();
        Self { n, values }
    }

    /// Wraps row-major values; `values.len()` must be `(n+1)²`.
    pub fn from_values(n: u32, values: Vec<f64>) -> Option<Self> {
        let side = n as usize + 1;
        (values.len() == side * side).then_some(Self { n, values })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn index(&self, i: u32, j: u32) -> usize {
        i as usize * (self.n as usize + 1) + j as usize
    }

    /// Panics when `(i, j)` lies outside the lattice.
    pub fn get(&self, i: u32, j: u32) -> f64 {
        assert!(
            i <= self.n && j <= self.n,
            "cell ({i}, {j}) outside n = {}",
            self.n
        );
        self.values[self.index(i, j)]
    }

    pub fn set(&mut self, i: u32, j: u32, value: f64) {
        assert!(
            i <= self.n && j <= self.n,
            "cell ({i}, {j}) outside n = {}",
            self.n
        );
        let idx = self.index(i, j);
        self.values[idx] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `((i, j), value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        cells(self.n).zip(self.values.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Largest absolute cell-wise difference.
    pub fn sup_distance(&self, other: &LatticeGrid) -> Result<f64, LatticeError> {
        if self.n != other.n {
            return Err(LatticeError::LatticeMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Mean position `Σ v_ij · (i/n, j/n)` treating the grid as a density.
    pub fn mean_position(&self) -> MeanObservation {
        let n = self.n as f64;
        let (mut o_p, mut o_q) = (0.0, 0.0);
        for ((i, j), v) in self.iter() {
            o_p += v * i as f64 / n;
            o_q += v * j as f64 / n;
        }
        MeanObservation { o_p, o_q }
    }
}

/// Mean social state `(Ō_p, Ō_q)`, the two moment constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanObservation {
    pub o_p: f64,
    pub o_q: f64,
}

impl MeanObservation {
    /// `None` unless both components lie in `[0, 1]`.
    pub fn new(o_p: f64, o_q: f64) -> Option<Self> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        (ok(o_p) && ok(o_q)).then_some(Self { o_p, o_q })
    }

    pub fn is_interior(&self) -> bool {
        self.o_p > 0.0 && self.o_p < 1.0 && self.o_q > 0.0 && self.o_q < 1.0
    }
}

/// Observation counts `O_ij` over the lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDistribution {
    n: u32,
    counts: BTreeMap<(u32, u32), u64>,
    total: u64,
}

impl LatticeDistribution {
    /// Builds a distribution from explicit counts; zero entries are dropped.
    pub fn from_counts(
        n: u32,
        counts: impl IntoIterator<Item = ((u32, u32), u64)>,
    ) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::EmptyPopulation);
        }
        let mut map = BTreeMap::new();
        let mut total = 0;
        for ((i, j), c) in counts {
            if i > n || j > n {
                return Err(LatticeError::OutOfRange { n, i, j });
            }
            if c > 0 {
                *map.entry((i, j)).or_insert(0) += c;
                total += c;
            }
        }
        if total == 0 {
            return Err(LatticeError::EmptySession);
        }
        Ok(Self {
            n,
            counts: map,
            total,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of rounds tallied, `T`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, i: u32, j: u32) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Nonzero counts in row-major order.
    pub fn counts(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.counts.iter().map(|(k, v)| (*k, *v))
    }

    /// `ρ_ij = O_ij / T`.
    pub fn density(&self, i: u32, j: u32) -> f64 {
        self.count(i, j) as f64 / self.total as f64
    }

    pub fn density_grid(&self) -> LatticeGrid {
        LatticeGrid::from_fn(self.n, |i, j| self.density(i, j))
    }

    pub fn count_grid(&self) -> LatticeGrid {
        LatticeGrid::from_fn(self.n, |i, j| self.count(i, j) as f64)
    }
}

/// Pools a sequence of round outcomes into lattice counts.
pub fn tally(states: &[SocialState], n: u32) -> Result<LatticeDistribution, LatticeError> {
    if states.is_empty() {
        return Err(LatticeError::EmptySession);
    }
    if let Some(bad) = states.iter().find(|s| s.n != n) {
        return Err(LatticeError::MixedPopulationSize {
            expected: n,
            found: bad.n,
        });
    }
    let mut counts = BTreeMap::new();
    for s in states {
        *counts.entry((s.i, s.j)).or_insert(0u64) += 1;
    }
    Ok(LatticeDistribution {
        n,
        counts,
        total: states.len() as u64,
    })
}

/// `Ō = Σ ρ_ij (i/n, j/n)`.
pub fn mean_observation(dist: &LatticeDistribution) -> MeanObservation {
    dist.density_grid().mean_position()
}

//! Central tolerance record.
//!
//! Every validating constructor and numeric comparison in the crate reads its
//! threshold from one of these fields, so a run is fully described by its
//! inputs plus one `Tolerances` value.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct Tolerances {
    /// Weight vectors must sum to 1 within this bound.
    pub weight_sum: f64,
    /// Max entrywise deviation allowed between a mixture and its barycenter.
    pub barycenter: f64,
    /// Hermiticity, positive-semidefiniteness and unit-trace checks on states.
    pub state_check: f64,
    /// Singular values below this count as zero in rank and range tests.
    pub rank_svd: f64,
    /// Classical masses at or below this do not count toward a support.
    pub support_mass: f64,
    /// Commutator norm above this rejects a generated projection family.
    pub commutation: f64,
    /// `U U* = 1` residual allowed on unitaries.
    pub unitary: f64,
    /// State invariance (`U* rho U = rho`) and measure-preservation residual.
    pub invariance: f64,
    /// Stochastic-matrix row sums and permutation invariance residual.
    pub row_sum: f64,
    /// `pi P = pi` residual for Markov stationary vectors.
    pub stationary: f64,
    /// Atoms and weights at or below this are dropped.
    pub atom_drop: f64,
    /// Slack used when asserting entropy monotonicity.
    pub entropy_slack: f64,
    /// Slack outside `[0, 1]` accepted by `eta` before raising a domain error.
    pub domain_slack: f64,
    /// Sign tests this close to their threshold abort classification.
    pub tie: f64,
    /// Partition cells must cover the space within this measure defect.
    pub cover: f64,
    /// Refined-algebra atom measures must sum to 1 within this bound.
    pub atom_sum: f64,
    /// Hard cap on atoms per refined algebra.
    pub max_atoms: usize,
    /// Hard cap on intervals/constraints in a single pulled-back cell.
    pub max_cell_complexity: usize,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        weight_sum: 1e-10,
        barycenter: 1e-9,
        state_check: 1e-10,
        rank_svd: 1e-8,
        support_mass: 1e-12,
        commutation: 1e-10,
        unitary: 1e-10,
        invariance: 1e-10,
        row_sum: 1e-12,
        stationary: 1e-10,
        atom_drop: 1e-14,
        entropy_slack: 1e-12,
        domain_slack: 1e-12,
        tie: 1e-12,
        cover: 1e-10,
        atom_sum: 1e-9,
        max_atoms: 2_000_000,
        max_cell_complexity: 4_000_000,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

//! Search specification: seed, budget, strategy, and per-kind parameters.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};

/// Name of the only candidate-stream generator this build supports. The
/// algorithm is part of the report so traces stay comparable across runs.
pub const RNG_ALGORITHM: &str = "chacha8-stream-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Structured candidates only.
    Grid,
    /// Structured candidates followed by seeded random ones (prefix-stable:
    /// a larger budget extends the same stream).
    #[default]
    RandomRestart,
    /// Half the budget on the stream, the rest on local perturbations of the
    /// best candidate found so far. Trades the prefix property for local
    /// refinement.
    CoordinateAscent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchSpec {
    pub seed: u64,
    /// Maximum number of candidates evaluated, ascent included.
    pub budget: usize,
    pub strategy: Strategy,
    /// Cell counts used for random-threshold interval partitions.
    pub partition_sizes: Vec<usize>,
    /// Grid step (degrees) for qubit basis families.
    pub bloch_step_deg: f64,
    /// Number of test observables available to state-space partitions.
    pub test_pool: usize,
    /// Extra non-orthogonal measure candidates admitted by the widened
    /// variant pipeline.
    pub extra_measure_budget: usize,
    /// Local-perturbation rounds for the coordinate-ascent strategy.
    pub refine_rounds: usize,
    /// Candidate-stream generator; only [`RNG_ALGORITHM`] is supported.
    pub rng_algorithm: String,
}

impl Default for SearchSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            budget: 8,
            strategy: Strategy::default(),
            partition_sizes: vec![2, 3, 4],
            bloch_step_deg: 30.0,
            test_pool: 4,
            extra_measure_budget: 4,
            refine_rounds: 3,
            rng_algorithm: RNG_ALGORITHM.to_string(),
        }
    }
}

impl SearchSpec {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(KsError::InvalidSystem("search budget must be >= 1".into()));
        }
        if self.rng_algorithm != RNG_ALGORITHM {
            return Err(KsError::Unsupported(format!(
                "unknown candidate-stream generator {:?} (this build provides {RNG_ALGORITHM})",
                self.rng_algorithm
            )));
        }
        Ok(())
    }

    /// Seeded generator on a dedicated stream, so consuming randomness for
    /// one candidate kind never shifts another kind's stream.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// How many candidates the base stream may hold under this strategy.
    pub fn stream_budget(&self) -> usize {
        match self.strategy {
            Strategy::CoordinateAscent => self.budget.div_ceil(2),
            _ => self.budget,
        }
    }

    /// Budget left for ascent after the base stream.
    pub fn ascent_budget(&self) -> usize {
        match self.strategy {
            Strategy::CoordinateAscent => self.budget - self.stream_budget(),
            _ => 0,
        }
    }
}

/// Stream identifiers for [`SearchSpec::rng`].
pub(crate) mod streams {
    pub const CLASSICAL_PARTITIONS: u64 = 1;
    pub const QUANTUM_FAMILIES: u64 = 2;
    pub const STATE_MEASURES: u64 = 3;
    pub const STATE_TESTS: u64 = 4;
}

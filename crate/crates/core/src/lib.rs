//! Dynamical entropy of classical and finite-dimensional quantum systems,
//! computed through finite orthogonal decompositions of states.
//!
//! The library is organized around one idea: a finite measurable partition of
//! a classical system and an abelian family of commutant projections of a
//! quantum system are the same object — a finite orthogonal decomposition of
//! the invariant state. Iterating the dynamics refines the decomposition, the
//! Shannon entropy of the decomposition weights gives a nondecreasing
//! sequence `H(A_k)`, and the entropy invariant is recovered from the
//! increments of that sequence, maximized over a budgeted set of candidate
//! decompositions.
//!
//! Modules:
//! - [`decomposition`]: weight vectors, states, finite decompositions,
//!   orthogonality of positive functionals, the Choquet refinement order and
//!   the common-refinement join.
//! - [`classical`]: measure-preserving systems (Bernoulli/Markov shifts,
//!   doubling map, circle rotations, finite permutations, point masses),
//!   partitions, iterated refinement algebras and their entropy sequences.
//! - [`quantum`]: density states, invariant unitaries, commutant projection
//!   families, the multiplicity-free entropy pipeline, and diagonal-algebra
//!   embeddings of classical shifts.
//! - [`statespace`]: finitely supported measures on the state space, affine
//!   sign-test partitions, itinerary refinement under the induced affine
//!   transport, and the general (non-multiplicity-free) entropy pipeline.
//! - [`search`]: deterministic seeded candidate streams and budgeted
//!   maximization for every supremum the pipelines take.
//! - [`report`]: entropy reports with CSV/JSON emission.
//! - [`verify`]: the runnable invariant ledger, including the brute-force
//!   domination oracle that cross-checks the orthogonality test.

pub mod classical;
pub mod decomposition;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod report;
pub mod search;
pub mod statespace;
pub mod tolerance;
pub mod verify;

pub use decomposition::{
    choquet_refines, functionals_orthogonal_classical, functionals_orthogonal_quantum, join,
    ClassicalStateVector, DensityState, FiniteDecomposition, StateLike, WeightVector,
};
pub use entropy::{eta, shannon_entropy};
pub use error::{KsError, Result};
pub use report::{EntropyReport, EntropyRow, Provenance};
pub use tolerance::Tolerances;

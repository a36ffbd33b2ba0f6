//! Finite-dimensional non-commutative dynamical systems and the
//! multiplicity-free entropy pipeline.

pub mod algebra;
pub mod embed;
pub mod entropy;
pub mod family;
pub mod system;

pub use algebra::FiniteDimAlgebra;
pub use embed::{embed_bernoulli_cycle, embed_markov_cycle, CycleEmbedding};
pub use entropy::{is_multiplicity_free, mf_entropy_sequence, mf_entropy_values, mf_ks_entropy};
pub use family::{
    alpha0_apply, decomposition_from_family, family_weights, generated_family,
    CommutantProjectionFamily,
};
pub use system::{hadamard, pauli_x, phase_unitary, qubit_system, QuantumDynamicalSystem};

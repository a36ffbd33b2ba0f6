//! The general quantization pipeline on the state space: atomic measures,
//! affine sign partitions, itinerary refinement, and the double supremum.

pub mod entropy;
pub mod measure;
pub mod partition;
pub mod transport;

pub use entropy::{
    general_entropy_sequence, general_entropy_values, h_phi_alpha, h_prime_variant,
    partition_weights, refined_decomposition, refined_weights, PartitionWeights,
};
pub use measure::{
    eigen_measure, qubit_trine, random_pure_decomposition, AtomicStateMeasure,
};
pub use partition::{
    refine_by_dynamics, RefinedStatePartition, StateSpacePartition, TestObservable,
};
pub use transport::{isomorphism_transport, AffineTransport, Isomorphism};

//! Classical measure-preserving systems, partitions, and their iterated
//! refinement entropy.

pub mod algebra;
pub mod cell;
pub mod entropy;
pub mod partition;
pub mod system;

pub use algebra::{
    algebra_entropy, decomposition_from_partition, initial_algebra, pairwise_entropy,
    refine_algebra, AlgebraAtom, RefinedAlgebra, RefinementChain,
};
pub use cell::Cell;
pub use entropy::{entropy_sequence, entropy_values, generator_entropy, ks_entropy};
pub use partition::Partition;
pub use system::ClassicalSystem;

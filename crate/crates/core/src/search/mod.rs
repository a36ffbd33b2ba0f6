//! Deterministic candidate generation and budgeted maximization.
//!
//! Every supremum in the entropy pipelines is approximated by a finite,
//! seeded, deterministic candidate stream with the analytically privileged
//! candidate (generator partition, state eigenbasis) first, so oracle tests
//! pass at budget 1 and larger budgets can only improve the score.

mod classical;
mod maximize;
mod quantum;
mod spec;
mod statespace;

pub use classical::classical_partition_candidates;
pub(crate) use classical::mutate_interval_partition;
pub use maximize::{maximize, maximize_with_ascent, SearchOutcome, TraceEntry};
pub use quantum::quantum_family_candidates;
pub use spec::{SearchSpec, Strategy};
pub use statespace::{
    measure_candidates, measure_candidates_with_nonorthogonal, statespace_partition_candidates,
};

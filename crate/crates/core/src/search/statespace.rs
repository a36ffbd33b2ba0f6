//! Candidate measures and sign partitions for the state-space pipeline.

use crate::error::Result;
use crate::linalg::{hermitize, random_gaussian, trace_re};
use crate::quantum::QuantumDynamicalSystem;
use crate::search::quantum::quantum_family_candidates;
use crate::search::spec::{streams, SearchSpec, Strategy};
use crate::statespace::measure::{
    qubit_trine, random_pure_decomposition, AtomicStateMeasure,
};
use crate::statespace::partition::{StateSpacePartition, TestObservable};
use crate::tolerance::Tolerances;

/// Orthogonal measure candidates: the decompositions carried by the family
/// stream.
pub fn measure_candidates(
    sys: &QuantumDynamicalSystem,
    spec: &SearchSpec,
    tol: &Tolerances,
) -> Result<Vec<(String, AtomicStateMeasure)>> {
    let mut out = Vec::new();
    for (label, family) in quantum_family_candidates(sys, spec, tol)? {
        if let Ok(mu) = AtomicStateMeasure::from_family(sys, &family, tol) {
            out.push((format!("orthogonal:{label}"), mu));
        }
    }
    Ok(out)
}

/// The widened class: the orthogonal stream followed by non-orthogonal
/// barycentric decompositions (the qubit trine where it applies, then random
/// pure-state mixtures with more pieces than the support rank). Keeping the
/// orthogonal stream as a prefix makes the widened supremum dominate the
/// orthogonal one on matched seeds and budgets.
pub fn measure_candidates_with_nonorthogonal(
    sys: &QuantumDynamicalSystem,
    spec: &SearchSpec,
    tol: &Tolerances,
) -> Result<Vec<(String, AtomicStateMeasure)>> {
    let mut out = measure_candidates(sys, spec, tol)?;
    let rank = sys.support(tol).rank;
    let mut extras = Vec::new();
    if let Ok(trine) = qubit_trine(sys, tol) {
        extras.push(("trine".to_string(), trine));
    }
    if rank >= 1 && spec.strategy != Strategy::Grid {
        let mut rng = spec.rng(streams::STATE_MEASURES);
        let mut i = 0;
        while extras.len() < spec.extra_measure_budget && i < spec.extra_measure_budget * 4 {
            let parts = rank + 1 + (i % 2);
            if let Ok(mu) = random_pure_decomposition(sys, parts, &mut rng, tol) {
                extras.push((format!("mixture-{parts}#r{i}"), mu));
            }
            i += 1;
        }
    }
    extras.truncate(spec.extra_measure_budget);
    out.extend(extras);
    Ok(out)
}

/// Sign-partition candidates. The test pool starts with the projections of
/// the leading family candidates at threshold 1/2 (these separate the
/// matching eigen-atoms cleanly) and is padded with seeded random Hermitian
/// observables thresholded at their barycenter expectation. Candidates are
/// single-test partitions first, then growing prefixes of the pool.
pub fn statespace_partition_candidates(
    sys: &QuantumDynamicalSystem,
    spec: &SearchSpec,
    tol: &Tolerances,
) -> Result<Vec<(String, StateSpacePartition)>> {
    spec.validate()?;
    let budget = spec.stream_budget();
    let mut pool: Vec<TestObservable> = Vec::new();
    'families: for (label, family) in quantum_family_candidates(sys, spec, tol)? {
        // skip the last projection of each family: its cell is the
        // complement of the others
        let take = family.len().saturating_sub(1).max(1);
        for (i, q) in family.projections().iter().take(take).enumerate() {
            if pool.len() >= spec.test_pool {
                break 'families;
            }
            pool.push(TestObservable::new(
                q.clone(),
                0.5,
                format!("{label}[{i}]"),
            )?);
        }
    }
    if spec.strategy != Strategy::Grid {
        let mut rng = spec.rng(streams::STATE_TESTS);
        let dim = sys.dim();
        while pool.len() < spec.test_pool {
            let g = random_gaussian(dim, dim, &mut rng);
            let h = hermitize(&g);
            let threshold = trace_re(&(sys.rho().matrix() * &h));
            pool.push(TestObservable::new(
                h,
                threshold,
                format!("gauss#{}", pool.len()),
            )?);
        }
    }
    if pool.is_empty() {
        return Err(crate::error::KsError::EmptyCandidates);
    }

    let mut out: Vec<(String, StateSpacePartition)> = Vec::new();
    for test in &pool {
        if out.len() >= budget {
            break;
        }
        out.push((
            format!("test:{}", test.label),
            StateSpacePartition::new(vec![clone_test(test)?])?,
        ));
    }
    for width in 2..=pool.len() {
        if out.len() >= budget {
            break;
        }
        let tests = pool[..width]
            .iter()
            .map(clone_test)
            .collect::<Result<Vec<_>>>()?;
        out.push((format!("pool:first-{width}"), StateSpacePartition::new(tests)?));
    }
    Ok(out)
}

fn clone_test(t: &TestObservable) -> Result<TestObservable> {
    TestObservable::new(t.matrix.clone(), t.threshold, t.label.clone())
}

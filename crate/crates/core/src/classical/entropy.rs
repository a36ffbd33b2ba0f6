//! Entropy sequences and the budgeted entropy supremum for classical systems.

use crate::classical::algebra::{algebra_entropy, RefinementChain};
use crate::classical::partition::Partition;
use crate::classical::system::ClassicalSystem;
use crate::error::{KsError, Result};
use crate::report::{EntropyReport, Provenance};
use crate::search::{
    classical_partition_candidates, maximize, maximize_with_ascent, SearchOutcome, SearchSpec,
    Strategy,
};
use crate::tolerance::Tolerances;

pub(crate) fn conventions() -> Vec<String> {
    vec![
        "refinement iterates preimages T^-p; for invertible maps this generates the same \
         algebras as forward images up to measure-preserving relabeling"
            .into(),
        "headline is the last increment H(k) - H(k-1); raw_limit is the unnormalized H(k_max)"
            .into(),
    ]
}

/// Raw sequence `H(A_0..A_k_max)`; `true` in the second slot means the
/// complexity budget cut the run short.
pub fn entropy_values(
    sys: &ClassicalSystem,
    p0: &Partition,
    k_max: usize,
    tol: &Tolerances,
) -> Result<(Vec<f64>, bool)> {
    let mut chain = RefinementChain::new(sys, p0, tol)?;
    let mut hs = vec![algebra_entropy(chain.algebra())];
    for _ in 1..=k_max {
        match chain.step(tol) {
            Ok(()) => hs.push(algebra_entropy(chain.algebra())),
            Err(KsError::BudgetExceeded(_)) => return Ok((hs, true)),
            Err(e) => return Err(e),
        }
    }
    Ok((hs, false))
}

/// Entropy report for one fixed partition.
pub fn entropy_sequence(
    sys: &ClassicalSystem,
    p0: &Partition,
    k_max: usize,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    if k_max == 0 {
        return Err(KsError::InvalidSystem("k_max must be >= 1".into()));
    }
    let (hs, truncated) = entropy_values(sys, p0, k_max, tol)?;
    let provenance = Provenance {
        pipeline: "classical".into(),
        system: sys.describe(),
        argmax: Some(p0.describe()),
        conventions: conventions(),
        ..Default::default()
    };
    Ok(EntropyReport::from_sequence(&hs, provenance, truncated))
}

/// Max of the increment estimate over the candidate-partition stream; the
/// winning partition is recorded in the report provenance.
pub fn ks_entropy(
    sys: &ClassicalSystem,
    spec: &SearchSpec,
    k_max: usize,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    if k_max == 0 {
        return Err(KsError::InvalidSystem("k_max must be >= 1".into()));
    }
    let candidates = classical_partition_candidates(sys, spec, tol)?;
    if candidates.is_empty() {
        return Err(KsError::EmptyCandidates);
    }
    let evaluator = |p: &Partition| -> Result<(f64, (Vec<f64>, bool, String))> {
        let (hs, truncated) = entropy_values(sys, p, k_max, tol)?;
        let headline = match hs.len() {
            0 => 0.0,
            1 => hs[0],
            n => hs[n - 1] - hs[n - 2],
        };
        Ok((headline, (hs, truncated, p.describe())))
    };
    let outcome: SearchOutcome<Partition, (Vec<f64>, bool, String)> = match spec.strategy {
        Strategy::CoordinateAscent => maximize_with_ascent(
            candidates,
            evaluator,
            |p, round| crate::search::mutate_interval_partition(sys, p, round, tol),
            spec.refine_rounds,
            spec.ascent_budget(),
        ),
        _ => maximize(candidates, evaluator),
    }?;
    let (hs, truncated, description) = outcome.best_payload;
    let provenance = Provenance {
        pipeline: "classical-ks".into(),
        system: sys.describe(),
        argmax: Some(format!("{}: {}", outcome.best_label, description)),
        search: Some(spec.clone()),
        trace: outcome.trace,
        conventions: conventions(),
        ..Default::default()
    };
    Ok(EntropyReport::from_sequence(&hs, provenance, truncated))
}

/// Closed-form entropy for kinds that have one; `None` otherwise.
pub fn generator_entropy(sys: &ClassicalSystem) -> Option<f64> {
    sys.generator_entropy()
}

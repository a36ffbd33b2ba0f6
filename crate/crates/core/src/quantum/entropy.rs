//! The multiplicity-free entropy pipeline: iterate `alpha^0` on a projection
//! family, generate the joint family at each depth, and track the Shannon
//! entropy of the induced decomposition weights.

use crate::error::{KsError, Result};
use crate::linalg::support_calculus;
use crate::quantum::family::{
    alpha0_apply, family_weights, generated_family, CommutantProjectionFamily,
};
use crate::quantum::system::QuantumDynamicalSystem;
use crate::report::{EntropyReport, Provenance};
use crate::search::{maximize, SearchSpec};
use crate::tolerance::Tolerances;

/// TRUE iff the GNS commutant of the system is abelian. Block by block, the
/// GNS representation of a full matrix block with a rank-r block state has
/// commutant isomorphic to the r-by-r matrices, so the commutant is abelian
/// exactly when every block carrying state weight does so with rank at most
/// one. One-dimensional blocks satisfy that automatically, so abelian
/// algebras are always multiplicity-free.
pub fn is_multiplicity_free(sys: &QuantumDynamicalSystem, tol: &Tolerances) -> bool {
    let ranges = sys.algebra().block_ranges();
    for (block, &(_, dim)) in ranges.iter().enumerate() {
        if dim == 1 {
            continue;
        }
        let rho_block = sys.algebra().block_of(sys.rho().matrix(), block);
        let weight = crate::linalg::trace_re(&rho_block);
        if weight <= tol.atom_drop {
            continue;
        }
        let rank = support_calculus(&rho_block, tol.rank_svd).rank;
        if rank > 1 {
            return false;
        }
    }
    true
}

fn mf_conventions() -> Vec<String> {
    vec![
        "A_k is generated by the family and its first k conjugates under the unitary".into(),
        "headline is the last increment H(k) - H(k-1); raw_limit is the unnormalized H(k_max)"
            .into(),
    ]
}

/// Raw sequence `H(A_0..A_k_max)` for one initial family. Fails with
/// [`KsError::NonCommuting`] carrying the failing depth when the generated
/// algebra stops being abelian; such systems belong to the state-space
/// pipeline.
pub fn mf_entropy_values(
    sys: &QuantumDynamicalSystem,
    f0: &CommutantProjectionFamily,
    k_max: usize,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    let mut acc = f0.clone();
    let mut shifted = f0.clone();
    let mut hs = vec![crate::entropy::shannon_entropy(&family_weights(
        sys, &acc, tol,
    )?)];
    for k in 1..=k_max {
        shifted = alpha0_apply(sys, &shifted, tol)?;
        acc = match generated_family(sys, &[&acc, &shifted], tol) {
            Ok(next) => next,
            Err(KsError::NonCommuting { norm, .. }) => {
                return Err(KsError::NonCommuting {
                    norm,
                    depth: Some(k),
                })
            }
            Err(e) => return Err(e),
        };
        if acc.len() > tol.max_atoms {
            return Err(KsError::BudgetExceeded(format!(
                "depth-{k} family exceeds {} members",
                tol.max_atoms
            )));
        }
        hs.push(crate::entropy::shannon_entropy(&family_weights(
            sys, &acc, tol,
        )?));
    }
    Ok(hs)
}

/// Entropy report for one fixed initial family.
pub fn mf_entropy_sequence(
    sys: &QuantumDynamicalSystem,
    f0: &CommutantProjectionFamily,
    k_max: usize,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    if k_max == 0 {
        return Err(KsError::InvalidSystem("k_max must be >= 1".into()));
    }
    let hs = mf_entropy_values(sys, f0, k_max, tol)?;
    let provenance = Provenance {
        pipeline: "quantum-mf".into(),
        system: sys.describe(),
        argmax: Some(f0.describe()),
        conventions: mf_conventions(),
        ..Default::default()
    };
    Ok(EntropyReport::from_sequence(&hs, provenance, false))
}

/// Max of the increment estimate over the candidate-family stream.
/// Candidates that run into non-commuting algebras score as errors; if every
/// candidate does, the search fails and the caller should use the
/// state-space pipeline.
pub fn mf_ks_entropy(
    sys: &QuantumDynamicalSystem,
    spec: &SearchSpec,
    k_max: usize,
    tol: &Tolerances,
) -> Result<EntropyReport> {
    if k_max == 0 {
        return Err(KsError::InvalidSystem("k_max must be >= 1".into()));
    }
    let candidates = crate::search::quantum_family_candidates(sys, spec, tol)?;
    let evaluator = |f: &CommutantProjectionFamily| -> Result<(f64, Vec<f64>)> {
        let hs = mf_entropy_values(sys, f, k_max, tol)?;
        let headline = match hs.len() {
            0 => 0.0,
            1 => hs[0],
            n => hs[n - 1] - hs[n - 2],
        };
        Ok((headline, hs))
    };
    let outcome = maximize(candidates, evaluator)?;
    let provenance = Provenance {
        pipeline: "quantum-mf-ks".into(),
        system: sys.describe(),
        argmax: Some(format!(
            "{}: {}",
            outcome.best_label,
            outcome.best_candidate.describe()
        )),
        search: Some(spec.clone()),
        trace: outcome.trace,
        conventions: mf_conventions(),
        ..Default::default()
    };
    Ok(EntropyReport::from_sequence(
        &outcome.best_payload,
        provenance,
        false,
    ))
}

//! Candidate partition streams for classical systems.

use rand::Rng;

use crate::classical::{ClassicalSystem, Partition};
use crate::error::Result;
use crate::search::spec::{streams, SearchSpec, Strategy};
use crate::tolerance::Tolerances;

/// Deterministic partition stream. The known generator (symbol partition for
/// shifts, dyadic split for the doubling map) always comes first; random
/// candidates fill the remaining budget for the random strategies.
pub fn classical_partition_candidates(
    sys: &ClassicalSystem,
    spec: &SearchSpec,
    tol: &Tolerances,
) -> Result<Vec<(String, Partition)>> {
    spec.validate()?;
    let budget = spec.stream_budget();
    let mut out: Vec<(String, Partition)> = Vec::new();
    let push = |label: String, p: Result<Partition>, out: &mut Vec<(String, Partition)>| {
        if out.len() >= budget {
            return;
        }
        if let Ok(p) = p {
            if !out.iter().any(|(_, q)| q == &p) {
                out.push((label, p));
            }
        }
    };

    match sys {
        ClassicalSystem::BernoulliShift { .. } | ClassicalSystem::MarkovShift { .. } => {
            push("symbols".into(), Partition::symbols(sys, tol), &mut out);
            push(
                "cylinders-depth2".into(),
                Partition::cylinders_depth2(sys, tol),
                &mut out,
            );
            push("symbols-at-1".into(), Partition::symbols_at(sys, 1, tol), &mut out);
            if spec.strategy != Strategy::Grid {
                let mut rng = spec.rng(streams::CLASSICAL_PARTITIONS);
                let mut i = 0;
                while out.len() < budget && i < budget * 4 {
                    let pos = rng.random_range(0..4usize);
                    push(
                        format!("symbols-at-{pos}#r{i}"),
                        Partition::symbols_at(sys, pos, tol),
                        &mut out,
                    );
                    i += 1;
                }
            }
        }
        ClassicalSystem::DoublingMap => {
            push("dyadic-2".into(), Partition::dyadic(sys, 1, tol), &mut out);
            push("dyadic-4".into(), Partition::dyadic(sys, 2, tol), &mut out);
            random_interval_tail(sys, spec, tol, budget, &mut out);
        }
        ClassicalSystem::Rotation { .. } => {
            push("two-arcs".into(), Partition::two_arcs(sys, tol), &mut out);
            push("uniform-3".into(), Partition::uniform_intervals(sys, 3, tol), &mut out);
            push("uniform-4".into(), Partition::uniform_intervals(sys, 4, tol), &mut out);
            random_interval_tail(sys, spec, tol, budget, &mut out);
        }
        ClassicalSystem::FinitePermutation { perm, .. } => {
            let n = perm.len();
            push("points".into(), Partition::points(sys, tol), &mut out);
            if spec.strategy != Strategy::Grid && n > 1 {
                let mut rng = spec.rng(streams::CLASSICAL_PARTITIONS);
                let mut i = 0;
                while out.len() < budget && i < budget * 4 {
                    // random two-block grouping
                    let mask: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
                    let a: Vec<usize> = (0..n).filter(|&x| mask[x]).collect();
                    let b: Vec<usize> = (0..n).filter(|&x| !mask[x]).collect();
                    if !a.is_empty() && !b.is_empty() {
                        push(
                            format!("two-blocks#r{i}"),
                            Partition::point_groups(sys, vec![a, b], tol),
                            &mut out,
                        );
                    }
                    i += 1;
                }
            }
        }
        ClassicalSystem::Dirac { .. } => {
            push("points".into(), Partition::points(sys, tol), &mut out);
        }
    }
    Ok(out)
}

fn random_interval_tail(
    sys: &ClassicalSystem,
    spec: &SearchSpec,
    tol: &Tolerances,
    budget: usize,
    out: &mut Vec<(String, Partition)>,
) {
    if spec.strategy == Strategy::Grid {
        return;
    }
    let mut rng = spec.rng(streams::CLASSICAL_PARTITIONS);
    let sizes = if spec.partition_sizes.is_empty() {
        vec![2]
    } else {
        spec.partition_sizes.clone()
    };
    let mut i = 0;
    while out.len() < budget && i < budget * 4 {
        let m = sizes[i % sizes.len()].max(2);
        let cuts: Vec<f64> = (0..m - 1).map(|_| rng.random::<f64>()).collect();
        if let Ok(p) = Partition::from_thresholds(sys, cuts, tol) {
            if !out.iter().any(|(_, q)| q == &p) {
                out.push((format!("thresholds-{m}#r{i}"), p));
            }
        }
        i += 1;
    }
}

/// Local perturbations of an interval partition for the coordinate-ascent
/// strategy: move every interior threshold by a shrinking step.
pub(crate) fn mutate_interval_partition(
    sys: &ClassicalSystem,
    p: &Partition,
    round: usize,
    tol: &Tolerances,
) -> Vec<(String, Partition)> {
    if !sys.is_interval_kind() {
        return Vec::new();
    }
    let mut cuts: Vec<f64> = Vec::new();
    for cell in p.cells() {
        if let crate::classical::Cell::Intervals(v) = cell {
            for &(a, _) in v {
                if a > 0.0 {
                    cuts.push(a);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let step = 0.25 / (1u64 << round.min(40)) as f64;
    let mut proposals = Vec::new();
    for (i, &c) in cuts.iter().enumerate() {
        for (tag, delta) in [("+", step), ("-", -step)] {
            let mut moved = cuts.clone();
            moved[i] = (c + delta).clamp(1e-6, 1.0 - 1e-6);
            if let Ok(p) = Partition::from_thresholds(sys, moved, tol) {
                proposals.push((format!("ascent{round}:cut{i}{tag}"), p));
            }
        }
    }
    proposals
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn bernoulli_budget_one_is_symbol_partition() {
        let sys = ClassicalSystem::bernoulli(vec![0.25, 0.75], &TOL).unwrap();
        let spec = SearchSpec {
            budget: 1,
            ..SearchSpec::default()
        };
        let cands = classical_partition_candidates(&sys, &spec, &TOL).unwrap();
        assert_eq!(cands.len(), 1);
        assert_eq!(cands[0].0, "symbols");
    }

    #[test]
    fn doubling_stream_order_and_determinism() {
        let sys = ClassicalSystem::DoublingMap;
        let spec = SearchSpec {
            budget: 3,
            ..SearchSpec::default()
        };
        let a = classical_partition_candidates(&sys, &spec, &TOL).unwrap();
        let b = classical_partition_candidates(&sys, &spec, &TOL).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].0, "dyadic-2");
        assert_eq!(a[1].0, "dyadic-4");
        assert!(a[2].0.starts_with("thresholds-"));
        let labels_a: Vec<&String> = a.iter().map(|(l, _)| l).collect();
        let labels_b: Vec<&String> = b.iter().map(|(l, _)| l).collect();
        assert_eq!(labels_a, labels_b);
        for ((_, pa), (_, pb)) in a.iter().zip(b.iter()) {
            assert_eq!(pa, pb);
        }
    }

    #[test]
    fn stream_is_prefix_stable_in_budget() {
        let sys = ClassicalSystem::DoublingMap;
        let small = classical_partition_candidates(
            &sys,
            &SearchSpec {
                budget: 3,
                seed: 9,
                ..SearchSpec::default()
            },
            &TOL,
        )
        .unwrap();
        let large = classical_partition_candidates(
            &sys,
            &SearchSpec {
                budget: 6,
                seed: 9,
                ..SearchSpec::default()
            },
            &TOL,
        )
        .unwrap();
        for (s, l) in small.iter().zip(large.iter()) {
            assert_eq!(s.0, l.0);
            assert_eq!(s.1, l.1);
        }
    }
}

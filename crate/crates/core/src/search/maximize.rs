//! Budgeted maximization over candidate streams.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KsError, Result};

/// One search-trace row: candidate id and score, or the error that sank it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub candidate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome<C, T> {
    pub best_label: String,
    pub best_score: f64,
    pub best_candidate: C,
    pub best_payload: T,
    pub trace: Vec<TraceEntry>,
}

/// Evaluates every candidate and returns the best by score, ties resolved by
/// earliest stream position. Candidates are scored in parallel; the reduction
/// runs in stream order, so the outcome is deterministic. Errors score as
/// minus infinity and are kept in the trace.
pub fn maximize<C, T, F>(candidates: Vec<(String, C)>, evaluator: F) -> Result<SearchOutcome<C, T>>
where
    C: Send,
    T: Send,
    F: Fn(&C) -> Result<(f64, T)> + Sync,
{
    if candidates.is_empty() {
        return Err(KsError::EmptyCandidates);
    }
    let total = candidates.len();
    let results: Vec<(String, C, Result<(f64, T)>)> = candidates
        .into_par_iter()
        .map(|(label, c)| {
            let r = evaluator(&c);
            (label, c, r)
        })
        .collect();

    let mut trace = Vec::with_capacity(total);
    let mut best: Option<(f64, String, C, T)> = None;
    for (label, candidate, result) in results {
        match result {
            Ok((score, payload)) if score.is_finite() => {
                trace.push(TraceEntry {
                    candidate: label.clone(),
                    score: Some(score),
                    error: None,
                });
                let better = match &best {
                    Some((s, _, _, _)) => score > *s,
                    None => true,
                };
                if better {
                    best = Some((score, label, candidate, payload));
                }
            }
            Ok((score, _)) => {
                trace.push(TraceEntry {
                    candidate: label,
                    score: None,
                    error: Some(format!("non-finite score {score}")),
                });
            }
            Err(e) => {
                trace.push(TraceEntry {
                    candidate: label,
                    score: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    match best {
        Some((best_score, best_label, best_candidate, best_payload)) => Ok(SearchOutcome {
            best_label,
            best_score,
            best_candidate,
            best_payload,
            trace,
        }),
        None => Err(KsError::AllCandidatesFailed(total)),
    }
}

/// [`maximize`] followed by rounds of local perturbation around the running
/// best. `mutate(candidate, round)` proposes neighbors at a shrinking scale;
/// an empty proposal list ends the ascent. Used by the coordinate-ascent
/// strategy; deterministic because proposals depend only on the incumbent.
pub fn maximize_with_ascent<C, T, F, G>(
    candidates: Vec<(String, C)>,
    evaluator: F,
    mutate: G,
    rounds: usize,
    ascent_budget: usize,
) -> Result<SearchOutcome<C, T>>
where
    C: Send + Clone,
    T: Send,
    F: Fn(&C) -> Result<(f64, T)> + Sync,
    G: Fn(&C, usize) -> Vec<(String, C)>,
{
    let mut outcome = maximize(candidates, &evaluator)?;
    let mut remaining = ascent_budget;
    for round in 0..rounds {
        if remaining == 0 {
            break;
        }
        let mut proposals = mutate(&outcome.best_candidate, round);
        if proposals.is_empty() {
            break;
        }
        proposals.truncate(remaining);
        remaining -= proposals.len();
        match maximize(proposals, &evaluator) {
            Ok(local) => {
                outcome.trace.extend(local.trace.iter().cloned());
                if local.best_score > outcome.best_score {
                    outcome.best_score = local.best_score;
                    outcome.best_label = local.best_label;
                    outcome.best_candidate = local.best_candidate;
                    outcome.best_payload = local.best_payload;
                }
            }
            Err(KsError::AllCandidatesFailed(_)) | Err(KsError::EmptyCandidates) => break,
            Err(e) => return Err(e),
        }
    }
    Ok(outcome)
}

//! Eligibility of (service, binding) pairs and metric-based selection among
//! competing services.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::naming::binding_fingerprint;
use super::{EngineConfig, InvocationKey};
use crate::descriptions::{Registry, ServiceDescription};
use crate::kb::{has_match, Binding, KnowledgeBase, Variable};

/// A service whose precondition matches, with the matching binding.
#[derive(Clone, Debug)]
pub struct Candidate<'r> {
    pub description: &'r ServiceDescription,
    /// Domain is the precondition's variables, less any optional inputs
    /// that could not be bound.
    pub binding: Binding,
    pub key: InvocationKey,
}

impl Candidate<'_> {
    pub fn name(&self) -> &str {
        &self.description.name
    }
}

/// Every allowed, in-scope, not-yet-invoked (service, binding) pair, ordered
/// by service name then fingerprint.
pub fn eligible_invocations<'r>(
    registry: &'r Registry,
    kb: &KnowledgeBase,
    config: &EngineConfig,
    history: &BTreeSet<InvocationKey>,
) -> Vec<Candidate<'r>> {
    let mut out = Vec::new();
    for d in registry.iter() {
        if let Some(allowed) = &config.allowed_services {
            if !allowed.contains(&d.name) {
                continue;
            }
        }
        for binding in d.precondition_bindings(kb, &Binding::new()) {
            if let Some(scope) = &config.scope_filter {
                if !has_match(scope, kb, &binding) {
                    continue;
                }
            }
            let key = InvocationKey {
                service_name: d.name.clone(),
                binding_fingerprint: binding_fingerprint(&binding),
            };
            if history.contains(&key) {
                continue;
            }
            out.push(Candidate {
                description: d,
                binding,
                key,
            });
        }
    }
    out.sort_by(|a, b| a.key.cmp(&b.key));
    out
}

/// Scores used to rank competitors. The default reads the static metrics in
/// the description; a learned scorer can replace it.
pub trait Scorer {
    fn score(&self, description: &ServiceDescription, metric: &str) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StaticScores;

impl Scorer for StaticScores {
    fn score(&self, description: &ServiceDescription, metric: &str) -> f64 {
        description.score(metric)
    }
}

/// Two candidates compete when they are different services of the same
/// algorithm class whose bindings agree on the (non-empty) set of
/// precondition variables they share.
pub fn competes(a: &Candidate<'_>, b: &Candidate<'_>) -> bool {
    if a.description.name == b.description.name
        || a.description.algorithm_class != b.description.algorithm_class
    {
        return false;
    }
    let shared: Vec<&Variable> = a
        .description
        .precondition
        .vars()
        .intersection(b.description.precondition.vars())
        .collect();
    !shared.is_empty()
        && a.binding.restrict(shared.iter().copied()) == b.binding.restrict(shared.iter().copied())
}

#[derive(Clone, Debug, Default)]
pub struct Selection<'r> {
    pub selected: Vec<Candidate<'r>>,
    pub suppressed: Vec<Candidate<'r>>,
}

/// Keeps a candidate unless some competitor scores higher on `metric`, or
/// scores the same and has a lexicographically smaller name. Input order is
/// preserved in both halves.
pub fn partition_competitors<'r>(
    candidates: Vec<Candidate<'r>>,
    scorer: &dyn Scorer,
    metric: &str,
) -> Selection<'r> {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|c| scorer.score(c.description, metric))
        .collect();
    let beaten: Vec<bool> = (0..candidates.len())
        .map(|i| {
            (0..candidates.len()).any(|j| {
                j != i
                    && competes(&candidates[i], &candidates[j])
                    && (scores[j] > scores[i]
                        || (scores[j] == scores[i] && candidates[j].name() < candidates[i].name()))
            })
        })
        .collect();
    let mut selection = Selection::default();
    for (c, lost) in candidates.into_iter().zip(beaten) {
        if lost {
            selection.suppressed.push(c);
        } else {
            selection.selected.push(c);
        }
    }
    selection
}

/// The surviving candidates under static metric scores.
pub fn select_among_competitors<'r>(candidates: Vec<Candidate<'r>>, metric: &str) -> Vec<Candidate<'r>> {
    partition_competitors(candidates, &StaticScores, metric).selected
}

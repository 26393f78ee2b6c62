//! The data-driven execution engine.
//!
//! Each round freezes the knowledge base, collects every service whose
//! precondition matches it, drops metric-dominated competitors, invokes the
//! survivors, checks every response against its postcondition, and merges
//! the accepted triples in one canonical batch at the round barrier. The run
//! stops when a round neither invokes anything nor adds a triple, or when
//! the round cap is reached. Every (service, binding) pair runs at most once.

mod naming;
mod select;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

pub use naming::{binding_fingerprint, mint_output_iri};
pub use select::{
    competes, eligible_invocations, partition_competitors, select_among_competitors, Candidate,
    Scorer, Selection, StaticScores,
};

use crate::descriptions::{validate_description, Registry, ServiceDescription, Violation};
use crate::kb::{has_match, sort_canonical, Binding, GraphPattern, KnowledgeBase, Triple};

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub max_rounds: u32,
    pub concurrency_width: usize,
    /// Conjoined with every precondition when present.
    pub scope_filter: Option<GraphPattern>,
    pub allowed_services: Option<BTreeSet<String>>,
    pub selection_metric: String,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_rounds: 32,
            concurrency_width: 4,
            scope_filter: None,
            allowed_services: None,
            selection_metric: "accuracy".to_string(),
        }
    }
}

impl EngineConfig {
    pub fn check(&self) -> Result<(), EngineError> {
        if self.max_rounds == 0 {
            return Err(EngineError::InvalidConfig("max_rounds must be at least 1".into()));
        }
        if self.concurrency_width == 0 {
            return Err(EngineError::InvalidConfig("concurrency_width must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvocationKey {
    pub service_name: String,
    pub binding_fingerprint: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Ok,
    RuleShortCircuit,
    HttpError,
    PostconditionViolation,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Ok => "ok",
            Outcome::RuleShortCircuit => "rule_short_circuit",
            Outcome::HttpError => "http_error",
            Outcome::PostconditionViolation => "postcondition_violation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Outcome::Ok,
            Outcome::RuleShortCircuit,
            Outcome::HttpError,
            Outcome::PostconditionViolation,
        ]
        .into_iter()
        .find(|o| o.as_str() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvocationRecord {
    pub key: InvocationKey,
    pub round: u32,
    pub outcome: Outcome,
    pub triples_added: usize,
    pub duration_ms: u64,
    /// Failure message for transport errors and violations.
    pub detail: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    Fixpoint,
    MaxRounds,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Fixpoint => "fixpoint",
            Termination::MaxRounds => "max_rounds",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub rounds_executed: u32,
    pub records: Vec<InvocationRecord>,
    pub final_kb_size: usize,
    pub terminated_by: Termination,
    /// Candidates dropped by competitor selection, in the order decided.
    pub suppressed: Vec<InvocationKey>,
    /// Knowledge-base size after each round's merge.
    pub kb_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error("service `{name}` is invalid: {}", join(.violations))]
    InvalidDescription { name: String, violations: Vec<Violation> },
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// One invocation handed to an [`Invoker`].
#[derive(Clone, Copy, Debug)]
pub struct Call<'a> {
    pub description: &'a ServiceDescription,
    /// Restricted to the precondition's variables.
    pub binding: &'a Binding,
    /// The precondition instantiated under `binding`, canonically sorted.
    pub request_graph: &'a [Triple],
    pub key: &'a InvocationKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallOutcome {
    Response { graph: Vec<Triple>, short_circuited: bool },
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallResult {
    pub outcome: CallOutcome,
    pub duration_ms: u64,
}

/// Executes a batch of calls with at most `width` in flight. Results must
/// come back in call order.
pub trait Invoker {
    fn invoke_all(&self, calls: &[Call<'_>], width: usize) -> Vec<CallResult>;
}

/// Runs calls one at a time through a closure. Durations are reported as 0.
pub struct FnInvoker<F>(pub F);

impl<F> Invoker for FnInvoker<F>
where
    F: Fn(&Call<'_>) -> CallOutcome,
{
    fn invoke_all(&self, calls: &[Call<'_>], _width: usize) -> Vec<CallResult> {
        calls
            .iter()
            .map(|c| CallResult {
                outcome: (self.0)(c),
                duration_ms: 0,
            })
            .collect()
    }
}

/// What a single round produced. `staged` is canonically sorted and holds
/// only triples absent from the snapshot the round ran against.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundOutcome {
    pub records: Vec<InvocationRecord>,
    pub staged: Vec<Triple>,
    pub suppressed: Vec<InvocationKey>,
}

/// Checks that `response`, seeded with the request binding, satisfies `postcondition`.
pub fn satisfies_postcondition(postcondition: &GraphPattern, response: &[Triple], binding: &Binding) -> bool {
    let graph = KnowledgeBase::from_triples(response.iter().cloned());
    has_match(postcondition, &graph, binding)
}

pub fn run_round(
    registry: &Registry,
    kb: &KnowledgeBase,
    config: &EngineConfig,
    history: &mut BTreeSet<InvocationKey>,
    round: u32,
    invoker: &dyn Invoker,
) -> RoundOutcome {
    run_round_with(registry, kb, config, history, round, invoker, &StaticScores)
}

pub fn run_round_with(
    registry: &Registry,
    kb: &KnowledgeBase,
    config: &EngineConfig,
    history: &mut BTreeSet<InvocationKey>,
    round: u32,
    invoker: &dyn Invoker,
    scorer: &dyn Scorer,
) -> RoundOutcome {
    let candidates = eligible_invocations(registry, kb, config, history);
    if candidates.is_empty() {
        return RoundOutcome::default();
    }
    let Selection { selected, suppressed } =
        partition_competitors(candidates, scorer, &config.selection_metric);

    let requests: Vec<Vec<Triple>> = selected
        .iter()
        .map(|c| {
            let mut g = c.description.precondition.instantiate(&c.binding);
            sort_canonical(&mut g);
            g
        })
        .collect();
    let calls: Vec<Call<'_>> = selected
        .iter()
        .zip(&requests)
        .map(|(c, g)| Call {
            description: c.description,
            binding: &c.binding,
            request_graph: g,
            key: &c.key,
        })
        .collect();
    let results = invoker.invoke_all(&calls, config.concurrency_width);
    assert_eq!(results.len(), calls.len(), "invoker must answer every call");

    let mut staged: BTreeSet<Triple> = BTreeSet::new();
    let mut records = Vec::with_capacity(selected.len());
    for (candidate, result) in selected.iter().zip(results) {
        let (outcome, graph, detail) = match result.outcome {
            CallOutcome::Failed(msg) => (Outcome::HttpError, Vec::new(), Some(msg)),
            CallOutcome::Response { graph, short_circuited } => {
                if satisfies_postcondition(&candidate.description.postcondition, &graph, &candidate.binding) {
                    let outcome = if short_circuited {
                        Outcome::RuleShortCircuit
                    } else {
                        Outcome::Ok
                    };
                    (outcome, graph, None)
                } else {
                    (
                        Outcome::PostconditionViolation,
                        Vec::new(),
                        Some("response does not satisfy the postcondition".into()),
                    )
                }
            }
        };
        let mut triples_added = 0;
        for t in graph {
            if !kb.contains(&t) && staged.insert(t) {
                triples_added += 1;
            }
        }
        records.push(InvocationRecord {
            key: candidate.key.clone(),
            round,
            outcome,
            triples_added,
            duration_ms: result.duration_ms,
            detail,
        });
    }

    history.extend(selected.into_iter().map(|c| c.key));
    let suppressed: Vec<InvocationKey> = suppressed.into_iter().map(|c| c.key).collect();
    history.extend(suppressed.iter().cloned());

    let mut staged: Vec<Triple> = staged.into_iter().collect();
    sort_canonical(&mut staged);
    RoundOutcome {
        records,
        staged,
        suppressed,
    }
}

pub fn run_to_fixpoint(
    registry: &Registry,
    kb: &mut KnowledgeBase,
    config: &EngineConfig,
    invoker: &dyn Invoker,
) -> Result<RunReport, EngineError> {
    run_to_fixpoint_with(registry, kb, config, invoker, &StaticScores)
}

pub fn run_to_fixpoint_with(
    registry: &Registry,
    kb: &mut KnowledgeBase,
    config: &EngineConfig,
    invoker: &dyn Invoker,
    scorer: &dyn Scorer,
) -> Result<RunReport, EngineError> {
    config.check()?;
    for d in registry.iter() {
        let violations = validate_description(d);
        if !violations.is_empty() {
            return Err(EngineError::InvalidDescription {
                name: d.name.clone(),
                violations,
            });
        }
    }

    let mut history = BTreeSet::new();
    let mut records = Vec::new();
    let mut suppressed = Vec::new();
    let mut kb_sizes = Vec::new();
    let mut terminated_by = Termination::MaxRounds;
    let mut rounds_executed = 0;
    for round in 1..=config.max_rounds {
        rounds_executed = round;
        let outcome = run_round_with(registry, kb, config, &mut history, round, invoker, scorer);
        let invoked = outcome.records.len();
        let added = kb.insert(outcome.staged);
        records.extend(outcome.records);
        suppressed.extend(outcome.suppressed);
        kb_sizes.push(kb.len());
        if invoked == 0 && added == 0 {
            terminated_by = Termination::Fixpoint;
            break;
        }
    }
    Ok(RunReport {
        rounds_executed,
        records,
        final_kb_size: kb.len(),
        terminated_by,
        suppressed,
        kb_sizes,
    })
}

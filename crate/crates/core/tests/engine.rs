mod support;

use std::cell::RefCell;
use std::collections::BTreeSet;

use proptest::prelude::*;
use smartws_core::descriptions::Registry;
use smartws_core::engine::{
    run_to_fixpoint, Call, CallOutcome, EngineConfig, EngineError, FnInvoker, InvocationKey, Outcome, Termination,
};
use smartws_core::kb::{parse_pattern, KnowledgeBase, Prefixes, Term, Triple};
use support::*;

fn registry(services: Vec<smartws_core::descriptions::ServiceDescription>) -> Registry {
    let mut r = Registry::new();
    for d in services {
        r.register(d).unwrap();
    }
    r
}

fn abc() -> Registry {
    registry(vec![
        chain_service("C", 2, 2, None, 3, 0.5),
        chain_service("A", 0, 0, None, 1, 0.5),
        chain_service("B", 1, 1, None, 2, 0.5),
    ])
}

#[test]
fn chain_runs_in_dependency_order() {
    let mut kb = KnowledgeBase::from_triples([typed(0, 0)]);
    let report = run_to_fixpoint(&abc(), &mut kb, &EngineConfig::default(), &FnInvoker(postcondition_responder)).unwrap();
    // Round 1: A adds 2 triples; round 2: B adds 2; round 3: C adds 2; round 4 is quiet.
    let trace: Vec<(&str, u32, usize)> = report
        .records
        .iter()
        .map(|r| (r.key.service_name.as_str(), r.round, r.triples_added))
        .collect();
    assert_eq!(trace, vec![("A", 1, 2), ("B", 2, 2), ("C", 3, 2)]);
    assert_eq!(report.kb_sizes, vec![3, 5, 7, 7]);
    assert_eq!(report.rounds_executed, 4);
    assert_eq!(report.terminated_by, Termination::Fixpoint);
    assert_eq!(report.final_kb_size, 7);
    assert!(kb.iter().any(|t| t.object == Term::Iri(type_iri(3))));
}

#[test]
fn each_key_is_invoked_once() {
    let calls = RefCell::new(Vec::new());
    let invoker = FnInvoker(|c: &Call<'_>| {
        calls.borrow_mut().push(c.key.clone());
        postcondition_responder(c)
    });
    let mut kb = KnowledgeBase::from_triples([typed(0, 0), typed(1, 0)]);
    let report = run_to_fixpoint(&abc(), &mut kb, &EngineConfig::default(), &invoker).unwrap();
    let calls = calls.into_inner();
    let unique: BTreeSet<&InvocationKey> = calls.iter().collect();
    assert_eq!(calls.len(), 6);
    assert_eq!(unique.len(), 6);
    assert_eq!(report.records.len(), 6);
}

#[test]
fn violations_and_failures_add_nothing() {
    let kb0 = KnowledgeBase::from_triples([typed(0, 0)]);
    for (respond, expected) in [
        (
            Box::new(|_: &Call<'_>| CallOutcome::Response { graph: vec![], short_circuited: false })
                as Box<dyn Fn(&Call<'_>) -> CallOutcome>,
            Outcome::PostconditionViolation,
        ),
        (Box::new(|_: &Call<'_>| CallOutcome::Failed("connection refused".into())), Outcome::HttpError),
    ] {
        let mut kb = kb0.clone();
        let report = run_to_fixpoint(&abc(), &mut kb, &EngineConfig::default(), &FnInvoker(respond)).unwrap();
        assert_eq!(report.records.len(), 1);
        assert_eq!(report.records[0].outcome, expected);
        assert_eq!(report.records[0].triples_added, 0);
        assert!(report.records[0].detail.is_some());
        assert_eq!(kb, kb0);
        assert_eq!(report.terminated_by, Termination::Fixpoint);
    }
}

#[test]
fn short_circuit_is_recorded() {
    let mut kb = KnowledgeBase::from_triples([typed(0, 0)]);
    let invoker = FnInvoker(|c: &Call<'_>| match postcondition_responder(c) {
        CallOutcome::Response { graph, .. } => CallOutcome::Response { graph, short_circuited: true },
        other => other,
    });
    let report = run_to_fixpoint(&abc(), &mut kb, &EngineConfig::default(), &invoker).unwrap();
    assert!(report.records.iter().all(|r| r.outcome == Outcome::RuleShortCircuit));
    assert_eq!(report.records.len(), 3);
}

#[test]
fn scope_filter_restricts_bindings() {
    let patient = iri("http://t.example/patient1");
    let mut kb = KnowledgeBase::from_triples([
        typed(0, 0),
        typed(1, 0),
        Triple::new(resource(0), predicate(0), patient),
    ]);
    let config = EngineConfig {
        scope_filter: Some(parse_pattern("?x <http://t.example/p0> <http://t.example/patient1> .", &Prefixes::new()).unwrap()),
        allowed_services: Some(["A".to_string()].into()),
        ..EngineConfig::default()
    };
    let report = run_to_fixpoint(&abc(), &mut kb, &config, &FnInvoker(postcondition_responder)).unwrap();
    assert_eq!(report.records.len(), 1);
    let derived: Vec<Triple> = kb
        .iter()
        .filter(|t| t.predicate.as_str() == "http://t.example/derivedFrom")
        .collect();
    assert_eq!(derived.len(), 1);
    assert_eq!(derived[0].object, Term::Iri(resource(0)));
}

#[test]
fn competitor_selection_by_score() {
    for (robust, standard, winner) in [(0.9, 0.7, "Robust"), (0.7, 0.9, "Standard"), (0.8, 0.8, "Robust")] {
        let reg = registry(vec![
            chain_service("Robust", 7, 0, None, 1, robust),
            chain_service("Standard", 7, 0, None, 2, standard),
        ]);
        let mut kb = KnowledgeBase::from_triples([typed(0, 0)]);
        let report = run_to_fixpoint(&reg, &mut kb, &EngineConfig::default(), &FnInvoker(postcondition_responder)).unwrap();
        let invoked: Vec<&str> = report.records.iter().map(|r| r.key.service_name.as_str()).collect();
        assert_eq!(invoked, vec![winner]);
        assert_eq!(report.suppressed.len(), 1);
        assert_ne!(report.suppressed[0].service_name, winner);
    }
}

#[test]
fn different_classes_do_not_compete() {
    let reg = registry(vec![
        chain_service("Robust", 7, 0, None, 1, 0.9),
        chain_service("Standard", 8, 0, None, 2, 0.7),
    ]);
    let mut kb = KnowledgeBase::from_triples([typed(0, 0)]);
    let report = run_to_fixpoint(&reg, &mut kb, &EngineConfig::default(), &FnInvoker(postcondition_responder)).unwrap();
    assert_eq!(report.records.len(), 2);
    assert!(report.suppressed.is_empty());
}

#[test]
fn identical_outputs_are_counted_once() {
    let reg = registry(vec![chain_service("A", 0, 0, None, 1, 0.5), chain_service("B", 1, 0, None, 1, 0.5)]);
    let mut kb = KnowledgeBase::from_triples([typed(0, 0)]);
    let fixed = |_: &Call<'_>| CallOutcome::Response {
        graph: vec![typed(9, 1), Triple::new(resource(9), iri("http://t.example/derivedFrom"), resource(0))],
        short_circuited: false,
    };
    let report = run_to_fixpoint(&reg, &mut kb, &EngineConfig::default(), &FnInvoker(fixed)).unwrap();
    let added: Vec<usize> = report.records.iter().map(|r| r.triples_added).collect();
    assert_eq!(added, vec![2, 0]);
    assert_eq!(kb.len(), 3);
}

#[test]
fn invalid_inputs_are_rejected() {
    let mut kb = KnowledgeBase::new();
    let config = EngineConfig { max_rounds: 0, ..EngineConfig::default() };
    assert!(matches!(
        run_to_fixpoint(&abc(), &mut kb, &config, &FnInvoker(postcondition_responder)),
        Err(EngineError::InvalidConfig(_))
    ));
    let empty = Registry::new();
    let report = run_to_fixpoint(&empty, &mut kb, &EngineConfig::default(), &FnInvoker(postcondition_responder)).unwrap();
    assert_eq!(report.rounds_executed, 1);
    assert_eq!(report.terminated_by, Termination::Fixpoint);
}



proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn runs_terminate_without_repeats(
        services in prop::collection::vec(random_service(), 1..=6),
        seed in prop::collection::vec(seed_triple(), 0..=40),
        max_rounds in 1u32..=8,
    ) {
        prop_assert_eq!(check_random_run(&services, &seed, max_rounds), Ok(()));
    }
}

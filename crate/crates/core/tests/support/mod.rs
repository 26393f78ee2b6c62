#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use smartws_core::descriptions::{EvaluationMetric, IoKind, IoSpec, ServiceDescription};
use smartws_core::smartness::{parse_rule, RuleBlock};
use smartws_core::descriptions::Registry;
use smartws_core::engine::{mint_output_iri, run_to_fixpoint, Call, CallOutcome, EngineConfig, FnInvoker, InvocationKey, Termination};
use smartws_core::kb::KnowledgeBase;
use smartws_core::kb::{
    Binding, Datatype, GraphPattern, Iri, Literal, PatternTerm, Prefixes, Term, Triple, TriplePattern, Variable,
};

pub fn iri(s: &str) -> Iri {
    Iri::new(s).unwrap()
}

pub fn var(s: &str) -> Variable {
    Variable::new(s).unwrap()
}

pub fn resource(i: usize) -> Iri {
    iri(&format!("http://t.example/r{i}"))
}

pub fn predicate(i: usize) -> Iri {
    iri(&format!("http://t.example/p{i}"))
}

pub fn small_literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        Just(Literal::string("a")),
        Just(Literal::string("b")),
        Just(Literal::integer(1)),
        Just(Literal::new("1.0", Datatype::Decimal).unwrap()),
    ]
}

pub fn small_object() -> impl Strategy<Value = Term> {
    prop_oneof![
        3 => (0..5usize).prop_map(|i| Term::Iri(resource(i))),
        1 => small_literal().prop_map(Term::Literal),
    ]
}

/// Triples over 5 resources, 3 predicates and 4 literals.
pub fn small_triple() -> impl Strategy<Value = Triple> {
    (0..5usize, 0..3usize, small_object()).prop_map(|(s, p, o)| Triple::new(resource(s), predicate(p), o))
}

pub fn small_graph(max: usize) -> impl Strategy<Value = Vec<Triple>> {
    prop::collection::vec(small_triple(), 0..=max)
}

fn var_term() -> impl Strategy<Value = PatternTerm> {
    (0..4usize).prop_map(|i| PatternTerm::Var(var(&format!("v{i}"))))
}

/// Patterns of up to `max` triples over at most 4 variables `?v0..?v3`.
pub fn small_pattern(max: usize) -> impl Strategy<Value = GraphPattern> {
    let subject = prop_oneof![2 => var_term(), 1 => (0..5usize).prop_map(|i| PatternTerm::Iri(resource(i)))];
    let pred = prop_oneof![1 => var_term(), 2 => (0..3usize).prop_map(|i| PatternTerm::Iri(predicate(i)))];
    let object = prop_oneof![
        3 => var_term(),
        1 => (0..5usize).prop_map(|i| PatternTerm::Iri(resource(i))),
        1 => small_literal().prop_map(PatternTerm::Literal),
    ];
    prop::collection::vec((subject, pred, object), 1..=max).prop_map(|tps| {
        GraphPattern::new(
            tps.into_iter()
                .map(|(s, p, o)| TriplePattern::new(s, p, o).unwrap())
                .collect(),
        )
    })
}

/// Exhaustive-assignment matcher: every map from the pattern's variables to
/// terms occurring in `graph` whose instantiation lies entirely in `graph`,
/// ordered by bound terms in variable-name order.
pub fn oracle_match(pattern: &GraphPattern, graph: &[Triple]) -> Vec<Binding> {
    let mut terms: BTreeSet<Term> = BTreeSet::new();
    for t in graph {
        terms.insert(Term::Iri(t.subject.clone()));
        terms.insert(Term::Iri(t.predicate.clone()));
        terms.insert(t.object.clone());
    }
    let terms: Vec<Term> = terms.into_iter().collect();
    let vars: Vec<Variable> = pattern.vars().iter().cloned().collect();
    let mut out = Vec::new();
    if !vars.is_empty() && terms.is_empty() {
        return out;
    }
    let mut index = vec![0usize; vars.len()];
    loop {
        let b: Binding = vars
            .iter()
            .cloned()
            .zip(index.iter().map(|&i| terms[i].clone()))
            .collect();
        let holds = pattern
            .patterns()
            .iter()
            .all(|tp| tp.instantiate(&b).is_some_and(|t| graph.contains(&t)));
        if holds {
            out.push(b);
        }
        // Odometer increment.
        let mut k = 0;
        loop {
            if k == index.len() {
                out.sort_by_key(|b| b.canonical_terms());
                out.dedup();
                return out;
            }
            index[k] += 1;
            if index[k] < terms.len() {
                break;
            }
            index[k] = 0;
            k += 1;
        }
    }
}

fn io(name: &str) -> IoSpec {
    IoSpec {
        variable: var(name),
        kind: IoKind::File,
        datatype: "resource".into(),
        concept: iri("http://t.example/Concept"),
        format: "application/n-triples".into(),
        required: true,
    }
}

pub fn type_iri(i: usize) -> Iri {
    iri(&format!("http://t.example/T{i}"))
}

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// A service consuming `?x` of type `consumes` (optionally joined to `?y`
/// over a predicate) and producing `?o` of type `produces` derived from `?x`.
pub fn chain_service(name: &str, class: usize, consumes: usize, join: Option<usize>, produces: usize, score: f64) -> ServiceDescription {
    let ty = iri(RDF_TYPE);
    let mut pre = vec![TriplePattern::new(var("x"), ty.clone(), type_iri(consumes)).unwrap()];
    if let Some(p) = join {
        pre.push(TriplePattern::new(var("x"), predicate(p), var("y")).unwrap());
    }
    let post = vec![
        TriplePattern::new(var("o"), ty, type_iri(produces)).unwrap(),
        TriplePattern::new(var("o"), iri("http://t.example/derivedFrom"), var("x")).unwrap(),
    ];
    let mut d = ServiceDescription::new(
        name,
        iri("http://localhost:1"),
        iri(&format!("http://t.example/Class{class}")),
        GraphPattern::new(pre),
        GraphPattern::new(post),
    );
    d.inputs.push(io("x"));
    if join.is_some() {
        d.inputs.push(io("y"));
    }
    d.outputs.push(io("o"));
    d.evaluation_metrics.push(EvaluationMetric {
        metric_name: "accuracy".into(),
        score,
    });
    d
}

/// Answers every call with its postcondition instantiated under the binding
/// plus deterministically minted outputs.
pub fn postcondition_responder(call: &Call<'_>) -> CallOutcome {
    let base = iri("http://t.example/out");
    let mut b = call.binding.clone();
    for o in &call.description.outputs {
        let minted = mint_output_iri(&base, &call.description.name, &call.key.binding_fingerprint, o.variable.name());
        b.insert(o.variable.clone(), Term::Iri(minted));
    }
    CallOutcome::Response {
        graph: call.description.postcondition.instantiate(&b),
        short_circuited: false,
    }
}

pub fn any_literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        "[ -~\\n\\t\\r\"\\\\é☃]{0,12}".prop_map(Literal::string),
        any::<i64>().prop_map(Literal::integer),
        any::<bool>().prop_map(Literal::boolean),
        (any::<i32>(), 0u32..10_000).prop_map(|(i, f)| Literal::new(format!("{i}.{f}"), Datatype::Decimal).unwrap()),
    ]
}

pub fn any_iri() -> impl Strategy<Value = Iri> {
    "(http|urn|ftp):[A-Za-z0-9/#._~%-]{1,16}".prop_map(|s| Iri::new(s).unwrap())
}

pub fn any_triple() -> impl Strategy<Value = Triple> {
    (
        any_iri(),
        any_iri(),
        prop_oneof![any_iri().prop_map(Term::Iri), any_literal().prop_map(Term::Literal)],
    )
        .prop_map(|(s, p, o)| Triple::new(s, p, o))
}

pub fn any_description() -> impl Strategy<Value = ServiceDescription> {
    let formats = prop::sample::subsequence(
        vec!["application/n-triples", "application/json", "text/xml", "image/nrrd", "text/turtle"],
        0..=3,
    );
    (
        prop_oneof![Just("http://h/s"), Just("https://h/s"), Just("ftp://h/s")],
        formats,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(endpoint, formats, pre, post, rule_on)| {
            let mut d = chain_service("S", 0, 0, None, 1, 0.5);
            d.endpoint = Iri::new(endpoint).unwrap();
            d.declared_formats = formats.into_iter().map(String::from).collect();
            if !pre {
                d.precondition = GraphPattern::empty();
                d.inputs.clear();
            }
            if !post {
                d.postcondition = GraphPattern::empty();
                d.outputs.clear();
            }
            if rule_on {
                d.rules.push(
                    parse_rule(
                        &RuleBlock {
                            name: "r".into(),
                            condition: "?x <http://t.example/p0> ?y .".into(),
                            guards: vec![],
                            emit: "?x <http://t.example/p1> \"done\" .".into(),
                        },
                        &Prefixes::new(),
                    )
                    .unwrap(),
                );
            }
            d
        })
}

#[derive(Clone, Debug)]
pub struct RandomService {
    pub class: usize,
    pub consumes: usize,
    pub join: Option<usize>,
    pub produces: usize,
    pub score: f64,
    /// 0 answers correctly, 1 fails in transport, 2 violates the postcondition.
    pub mode: u8,
}

pub fn random_service() -> impl Strategy<Value = RandomService> {
    (0..3usize, 0..4usize, prop::option::of(0..3usize), 0..4usize, 0.0f64..=1.0, prop_oneof![6 => Just(0u8), 1 => Just(1u8), 1 => Just(2u8)])
        .prop_map(|(class, consumes, join, produces, score, mode)| RandomService { class, consumes, join, produces, score, mode })
}

pub fn seed_triple() -> impl Strategy<Value = Triple> {
    prop_oneof![
        (0..6usize, 0..4usize).prop_map(|(r, t)| typed(r, t)),
        (0..6usize, 0..3usize, 0..6usize).prop_map(|(a, p, b)| Triple::new(resource(a), predicate(p), resource(b))),
    ]
}

pub fn typed(r: usize, t: usize) -> Triple {
    Triple::new(resource(r), iri(RDF_TYPE), type_iri(t))
}

/// Runs a random registry over `seed` and checks termination, memoization
/// and monotone growth.
pub fn check_random_run(services: &[RandomService], seed: &[Triple], max_rounds: u32) -> Result<(), String> {
    let mut registry = Registry::new();
    for (i, s) in services.iter().enumerate() {
        registry
            .register(chain_service(&format!("S{i}"), s.class, s.consumes, s.join, s.produces, s.score))
            .map_err(|v| format!("{v:?}"))?;
    }
    let invoker = FnInvoker(|c: &Call<'_>| {
        let i: usize = c.description.name[1..].parse().unwrap();
        match services[i].mode {
            0 => postcondition_responder(c),
            1 => CallOutcome::Failed("unreachable".into()),
            _ => CallOutcome::Response { graph: vec![typed(0, 0)], short_circuited: false },
        }
    });
    let mut kb = KnowledgeBase::from_triples(seed.iter().cloned());
    let start = kb.len();
    let config = EngineConfig { max_rounds, ..EngineConfig::default() };
    let report = run_to_fixpoint(&registry, &mut kb, &config, &invoker).map_err(|e| e.to_string())?;

    let ensure = |ok: bool, what: &str| if ok { Ok(()) } else { Err(what.to_string()) };
    ensure(report.rounds_executed <= max_rounds, "ran past max_rounds")?;
    let keys: BTreeSet<&InvocationKey> = report.records.iter().map(|r| &r.key).collect();
    ensure(keys.len() == report.records.len(), "an invocation key was repeated")?;
    ensure(report.suppressed.iter().all(|k| !keys.contains(k)), "a suppressed key was invoked")?;
    let mut previous = start;
    for &size in &report.kb_sizes {
        ensure(size >= previous, "knowledge base shrank")?;
        previous = size;
    }
    ensure(report.kb_sizes.len() as u32 == report.rounds_executed, "one size per round")?;
    ensure(report.final_kb_size == kb.len(), "final size mismatch")?;
    match report.terminated_by {
        Termination::Fixpoint => ensure(
            report.records.iter().all(|r| r.round < report.rounds_executed),
            "fixpoint round invoked something",
        )?,
        Termination::MaxRounds => ensure(report.rounds_executed == max_rounds, "stopped early")?,
    }
    ensure(seed.iter().all(|t| kb.contains(t)), "seed triple lost")
}

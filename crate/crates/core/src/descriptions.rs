//! Service descriptions: non-functional metadata, typed inputs and outputs,
//! pre/postcondition patterns, and a registry keyed by service name.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::kb::{match_seeded, Binding, GraphPattern, Iri, KnowledgeBase, Variable};
use crate::smartness::SmartRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IoKind {
    File,
    Parameter,
}

impl IoKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IoKind::File => "file",
            IoKind::Parameter => "parameter",
        }
    }
}

/// One declared input or output of a service.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IoSpec {
    pub variable: Variable,
    pub kind: IoKind,
    pub datatype: String,
    pub concept: Iri,
    pub format: String,
    pub required: bool,
}

/// A static quality score; higher is better.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationMetric {
    pub metric_name: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ServiceDescription {
    pub name: String,
    pub contributors: Vec<String>,
    pub description: String,
    pub evaluation_metrics: Vec<EvaluationMetric>,
    pub source_code: Vec<Iri>,
    pub implementation_languages: Vec<String>,
    pub endpoint: Iri,
    pub example_requests: Vec<Iri>,
    pub example_responses: Vec<Iri>,
    pub inputs: Vec<IoSpec>,
    pub outputs: Vec<IoSpec>,
    pub precondition: GraphPattern,
    pub postcondition: GraphPattern,
    pub algorithm_class: Iri,
    pub rules: Vec<SmartRule>,
    pub declared_formats: Vec<String>,
}

impl ServiceDescription {
    /// A description with only the required fields populated.
    pub fn new(
        name: impl Into<String>,
        endpoint: Iri,
        algorithm_class: Iri,
        precondition: GraphPattern,
        postcondition: GraphPattern,
    ) -> Self {
        ServiceDescription {
            name: name.into(),
            contributors: Vec::new(),
            description: String::new(),
            evaluation_metrics: Vec::new(),
            source_code: Vec::new(),
            implementation_languages: Vec::new(),
            endpoint,
            example_requests: Vec::new(),
            example_responses: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            precondition,
            postcondition,
            algorithm_class,
            rules: Vec::new(),
            declared_formats: Vec::new(),
        }
    }

    /// Score on `metric`, 0 when the metric is not declared.
    pub fn score(&self, metric: &str) -> f64 {
        self.evaluation_metrics
            .iter()
            .find(|m| m.metric_name == metric)
            .map_or(0.0, |m| m.score)
    }

    pub fn input_vars(&self) -> BTreeSet<&Variable> {
        self.inputs.iter().map(|io| &io.variable).collect()
    }

    pub fn output_vars(&self) -> BTreeSet<&Variable> {
        self.outputs.iter().map(|io| &io.variable).collect()
    }

    /// Variables of inputs declared `required: false`.
    pub fn optional_vars(&self) -> BTreeSet<&Variable> {
        self.inputs.iter().filter(|io| !io.required).map(|io| &io.variable).collect()
    }

    /// The precondition without the patterns that mention an optional input.
    pub fn mandatory_precondition(&self) -> GraphPattern {
        let optional = self.optional_vars();
        if optional.is_empty() {
            return self.precondition.clone();
        }
        GraphPattern::new(
            self.precondition
                .patterns()
                .iter()
                .filter(|tp| !tp.vars().any(|v| optional.contains(v)))
                .cloned()
                .collect(),
        )
    }

    /// Solutions of the mandatory precondition over `kb`, each extended by
    /// the full precondition where possible. A solution that cannot be
    /// extended is kept without the optional variables.
    pub fn precondition_bindings(&self, kb: &KnowledgeBase, seed: &Binding) -> Vec<Binding> {
        let core = self.mandatory_precondition();
        if core.len() == self.precondition.len() {
            return match_seeded(&self.precondition, kb, seed);
        }
        let mut out = Vec::new();
        for b in match_seeded(&core, kb, seed) {
            let extended = match_seeded(&self.precondition, kb, &b);
            if extended.is_empty() {
                out.push(b);
            } else {
                out.extend(extended);
            }
        }
        out.sort_by_cached_key(Binding::canonical);
        out.dedup();
        out
    }

    pub fn has_http_endpoint(&self) -> bool {
        let scheme = self.endpoint.scheme();
        scheme.eq_ignore_ascii_case("http") || scheme.eq_ignore_ascii_case("https")
    }
}

/// A broken invariant, named by field and rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: &str, rule: impl Into<String>) -> Self {
        Violation {
            field: field.to_string(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Input variables missing from the precondition and output variables
/// missing from the postcondition. These two checks are structural and also
/// run when a description file is parsed.
pub fn io_violations(d: &ServiceDescription) -> Vec<Violation> {
    let mut out = Vec::new();
    for io in &d.inputs {
        if !d.precondition.vars().contains(&io.variable) {
            out.push(Violation::new(
                "inputs",
                alloc::format!("input {} does not occur in the precondition", io.variable),
            ));
        }
    }
    for io in &d.outputs {
        if !d.postcondition.vars().contains(&io.variable) {
            out.push(Violation::new(
                "outputs",
                alloc::format!("output {} does not occur in the postcondition", io.variable),
            ));
        }
    }
    out
}

/// Every broken invariant; empty iff the description is valid.
pub fn validate_description(d: &ServiceDescription) -> Vec<Violation> {
    let mut out = Vec::new();
    if d.name.is_empty() {
        out.push(Violation::new("name", "must not be empty"));
    }
    if !d.has_http_endpoint() {
        out.push(Violation::new(
            "endpoint",
            alloc::format!("scheme `{}` is not http or https", d.endpoint.scheme()),
        ));
    }
    if d.precondition.is_empty() {
        out.push(Violation::new("precondition", "must contain at least one triple pattern"));
    }
    if !d.precondition.is_empty() && d.mandatory_precondition().is_empty() {
        out.push(Violation::new(
            "precondition",
            "every pattern mentions an optional input; no mandatory pattern remains",
        ));
    }
    if d.postcondition.is_empty() {
        out.push(Violation::new("postcondition", "must contain at least one triple pattern"));
    }
    for m in &d.evaluation_metrics {
        if !(0.0..=1.0).contains(&m.score) {
            out.push(Violation::new("evaluation_metrics", "score out of [0,1]"));
        }
    }
    out.extend(io_violations(d));
    let outputs = d.output_vars();
    for v in d.postcondition.vars() {
        if !outputs.contains(v) && !d.precondition.vars().contains(v) {
            out.push(Violation::new(
                "postcondition",
                alloc::format!("variable {v} is neither an output nor a precondition variable"),
            ));
        }
    }
    for rule in &d.rules {
        for v in rule.fresh_vars() {
            if !outputs.contains(v) {
                out.push(Violation::new(
                    "rules",
                    alloc::format!("rule `{}` mints {v}, which is not a declared output", rule.name()),
                ));
            }
        }
    }
    out
}

/// Services by unique name.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    services: BTreeMap<String, ServiceDescription>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates and stores `d`, replacing any service with the same name.
    /// On failure the registry is unchanged.
    pub fn register(&mut self, d: ServiceDescription) -> Result<(), Vec<Violation>> {
        let violations = validate_description(&d);
        if !violations.is_empty() {
            return Err(violations);
        }
        self.services.insert(d.name.clone(), d);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&ServiceDescription> {
        self.services.get(name)
    }

    pub fn len(&self) -> usize {
        self.services.len()
    }

    pub fn is_empty(&self) -> bool {
        self.services.is_empty()
    }

    /// Services in name order.
    pub fn iter(&self) -> impl Iterator<Item = &ServiceDescription> {
        self.services.values()
    }

    /// All services of `class`, sorted by name.
    pub fn find_by_class(&self, class: &Iri) -> Vec<&ServiceDescription> {
        self.services
            .values()
            .filter(|d| &d.algorithm_class == class)
            .collect()
    }
}

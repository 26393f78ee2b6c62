//! Three-level maturity classification of a service.
//!
//! Level 1 is technical (HTTP endpoint, standard exchange format, uniform
//! resource interface), level 2 semantic (RDF payloads, non-empty pre- and
//! postconditions, a retrievable machine-readable description), level 3
//! smart (at least one valid embedded rule). Levels are cumulative and every
//! criterion is evaluated and reported even above the first failing level.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::descriptions::ServiceDescription;

pub const RDF_FORMATS: &[&str] = &[
    "rdf",
    "rdf/xml",
    "application/rdf+xml",
    "turtle",
    "text/turtle",
    "n-triples",
    "application/n-triples",
    "n3",
    "text/n3",
    "json-ld",
    "application/ld+json",
    "trig",
    "application/trig",
    "n-quads",
    "application/n-quads",
];

pub const XML_FORMATS: &[&str] = &["xml", "application/xml", "text/xml"];
pub const JSON_FORMATS: &[&str] = &["json", "application/json"];

fn is_one_of(format: &str, set: &[&str]) -> bool {
    set.iter().any(|f| f.eq_ignore_ascii_case(format.trim()))
}

pub fn is_rdf_format(format: &str) -> bool {
    is_one_of(format, RDF_FORMATS)
}

pub fn is_standard_format(format: &str) -> bool {
    is_rdf_format(format) || is_one_of(format, XML_FORMATS) || is_one_of(format, JSON_FORMATS)
}

/// Outcome of one live check against a hosted service.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeCheck {
    pub passed: bool,
    pub evidence: String,
}

impl ProbeCheck {
    pub fn pass(evidence: impl Into<String>) -> Self {
        ProbeCheck {
            passed: true,
            evidence: evidence.into(),
        }
    }

    pub fn fail(evidence: impl Into<String>) -> Self {
        ProbeCheck {
            passed: false,
            evidence: evidence.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeResults {
    /// `GET /health` answered 200.
    pub health: ProbeCheck,
    /// `GET /description` answered 200 with a parseable description.
    pub description: ProbeCheck,
    /// `/invoke` advertises `application/n-triples` for POST.
    pub invoke_content_type: ProbeCheck,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriterionResult {
    pub criterion_id: String,
    pub level: u8,
    pub passed: bool,
    pub evidence: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaturityReport {
    pub level: u8,
    pub criteria: Vec<CriterionResult>,
    pub probed: bool,
}

impl MaturityReport {
    pub fn criterion(&self, id: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.criterion_id == id)
    }
}

pub const HTTP_ENDPOINT: &str = "L1.http-endpoint";
pub const STANDARD_FORMAT: &str = "L1.standard-format";
pub const REST_INTERFACE: &str = "L1.rest-interface";
pub const RDF_IO: &str = "L2.rdf-io";
pub const PRE_POST_CONDITIONS: &str = "L2.pre-post-conditions";
pub const MACHINE_READABLE_DESCRIPTION: &str = "L2.machine-readable-description";
pub const SMART_RULE: &str = "L3.smart-rule";

fn criterion(id: &str, level: u8, passed: bool, evidence: String) -> CriterionResult {
    CriterionResult {
        criterion_id: id.to_string(),
        level,
        passed,
        evidence,
    }
}

fn list(formats: &[&String]) -> String {
    formats.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
}

pub fn classify(d: &ServiceDescription, probe: Option<&ProbeResults>) -> MaturityReport {
    let mut criteria = Vec::with_capacity(7);

    let http = d.has_http_endpoint();
    criteria.push(criterion(
        HTTP_ENDPOINT,
        1,
        http,
        if http {
            alloc::format!("endpoint {} uses {}", d.endpoint.as_str(), d.endpoint.scheme())
        } else {
            alloc::format!("endpoint scheme `{}` is not http or https", d.endpoint.scheme())
        },
    ));

    let standard: Vec<&String> = d.declared_formats.iter().filter(|f| is_standard_format(f)).collect();
    criteria.push(criterion(
        STANDARD_FORMAT,
        1,
        !standard.is_empty(),
        if standard.is_empty() {
            alloc::format!(
                "no XML, JSON or RDF format among declared formats [{}]",
                list(&d.declared_formats.iter().collect::<Vec<_>>())
            )
        } else {
            alloc::format!("declares standard formats: {}", list(&standard))
        },
    ));

    let rest = match probe {
        None if http => (
            true,
            "HTTP endpoint bound to the uniform contract: GET /health, GET /description, POST /invoke".to_string(),
        ),
        None => (false, "no HTTP endpoint exposing resource paths".to_string()),
        Some(p) => {
            let passed = http && p.health.passed && p.invoke_content_type.passed;
            (
                passed,
                alloc::format!(
                    "GET /health: {}; /invoke: {}",
                    p.health.evidence, p.invoke_content_type.evidence
                ),
            )
        }
    };
    criteria.push(criterion(REST_INTERFACE, 1, rest.0, rest.1));

    let rdf: Vec<&String> = d.declared_formats.iter().filter(|f| is_rdf_format(f)).collect();
    criteria.push(criterion(
        RDF_IO,
        2,
        !rdf.is_empty(),
        if rdf.is_empty() {
            "no RDF serialization declared for inputs and outputs".to_string()
        } else {
            alloc::format!("RDF input/output via {}", list(&rdf))
        },
    ));

    let conditions = !d.precondition.is_empty() && !d.postcondition.is_empty();
    criteria.push(criterion(
        PRE_POST_CONDITIONS,
        2,
        conditions,
        alloc::format!(
            "precondition has {} pattern(s), postcondition has {}",
            d.precondition.len(),
            d.postcondition.len()
        ),
    ));

    let described = match probe {
        None => (true, "description available as a structured document".to_string()),
        Some(p) => (p.description.passed, alloc::format!("GET /description: {}", p.description.evidence)),
    };
    criteria.push(criterion(MACHINE_READABLE_DESCRIPTION, 2, described.0, described.1));

    let outputs = d.output_vars();
    let valid_rules: Vec<&str> = d
        .rules
        .iter()
        .filter(|r| r.fresh_vars().iter().all(|v| outputs.contains(v)))
        .map(|r| r.name())
        .collect();
    criteria.push(criterion(
        SMART_RULE,
        3,
        !valid_rules.is_empty(),
        if valid_rules.is_empty() {
            alloc::format!("no valid rule attached ({} declared)", d.rules.len())
        } else {
            alloc::format!("rules: {}", valid_rules.join(", "))
        },
    ));

    let level = (1..=3u8)
        .take_while(|&n| criteria.iter().filter(|c| c.level == n).all(|c| c.passed))
        .last()
        .unwrap_or(0);

    MaturityReport {
        level,
        criteria,
        probed: probe.is_some(),
    }
}

//! On-disk formats: JSON service descriptions, knowledge-base text files and
//! registry directories.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smartws_core::descriptions::{
    io_violations, EvaluationMetric, IoKind, IoSpec, Registry, ServiceDescription, Violation,
};
use smartws_core::kb::{
    parse_document, parse_pattern, well_known_prefixes, Iri, KbError, KnowledgeBase, ParseError,
    Prefixes, Triple, Variable,
};
use smartws_core::smartness::{parse_rule, RuleBlock, RuleError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DescriptionError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Pattern { field: &'static str, source: ParseError },
    #[error("{field}: {source}")]
    Term { field: &'static str, source: KbError },
    #[error("{field}: unknown kind `{value}` (expected file or parameter)")]
    Kind { field: &'static str, value: String },
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Structure(Vec<Violation>),
}

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Kb { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Description { path: PathBuf, source: DescriptionError },
    #[error("{path}: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid { path: PathBuf, violations: Vec<Violation> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct DescriptionFile {
    name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    prefixes: BTreeMap<String, String>,
    #[serde(default)]
    contributors: Vec<String>,
    #[serde(default)]
    description: String,
    #[serde(default)]
    evaluation_metrics: Vec<MetricFile>,
    #[serde(default)]
    source_code: Vec<String>,
    #[serde(default)]
    implementation_languages: Vec<String>,
    endpoint: String,
    #[serde(default)]
    example_requests: Vec<String>,
    #[serde(default)]
    example_responses: Vec<String>,
    inputs: Vec<IoFile>,
    outputs: Vec<IoFile>,
    precondition: String,
    postcondition: String,
    algorithm_class: String,
    #[serde(default)]
    rules: Vec<RuleFile>,
    #[serde(default)]
    declared_formats: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    metric: String,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IoFile {
    variable: String,
    kind: String,
    datatype: String,
    concept: String,
    format: String,
    required: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleFile {
    name: String,
    condition: String,
    #[serde(default)]
    guards: Vec<String>,
    emit: String,
}

/// `<iri>`, `prefix:local` with a known prefix, or an absolute IRI.
fn resolve_iri(field: &'static str, value: &str, prefixes: &Prefixes) -> Result<Iri, DescriptionError> {
    let term_err = |source| DescriptionError::Term { field, source };
    if let Some(inner) = value.strip_prefix('<').and_then(|v| v.strip_suffix('>')) {
        return Iri::new(inner).map_err(term_err);
    }
    if let Some((prefix, local)) = value.split_once(':') {
        if let Some(ns) = prefixes.get(prefix) {
            return Iri::new(format!("{ns}{local}")).map_err(term_err);
        }
    }
    Iri::new(value).map_err(term_err)
}

fn absolute_iri(field: &'static str, value: &str) -> Result<Iri, DescriptionError> {
    Iri::new(value).map_err(|source| DescriptionError::Term { field, source })
}

fn io_spec(field: &'static str, f: IoFile, prefixes: &Prefixes) -> Result<IoSpec, DescriptionError> {
    let name = f.variable.strip_prefix('?').unwrap_or(&f.variable);
    let variable = Variable::new(name).map_err(|source| DescriptionError::Term { field, source })?;
    let kind = match f.kind.as_str() {
        "file" => IoKind::File,
        "parameter" => IoKind::Parameter,
        _ => return Err(DescriptionError::Kind { field, value: f.kind }),
    };
    Ok(IoSpec {
        variable,
        kind,
        datatype: f.datatype,
        concept: resolve_iri(field, &f.concept, prefixes)?,
        format: f.format,
        required: f.required,
    })
}

/// Parses a JSON description. Embedded patterns and rules use the file's
/// `prefixes` on top of `rdf:`, `rdfs:`, `xsd:` and `dc:`. Inputs must occur
/// in the precondition and outputs in the postcondition; the remaining
/// invariants are left to [`smartws_core::descriptions::validate_description`].
pub fn parse_description(document: &[u8]) -> Result<ServiceDescription, DescriptionError> {
    let file: DescriptionFile = serde_json::from_slice(document)?;
    let mut prefixes = well_known_prefixes();
    prefixes.extend(file.prefixes);

    let precondition = parse_pattern(&file.precondition, &prefixes)
        .map_err(|source| DescriptionError::Pattern { field: "precondition", source })?;
    let postcondition = parse_pattern(&file.postcondition, &prefixes)
        .map_err(|source| DescriptionError::Pattern { field: "postcondition", source })?;
    let inputs = file
        .inputs
        .into_iter()
        .map(|f| io_spec("inputs", f, &prefixes))
        .collect::<Result<Vec<_>, _>>()?;
    let outputs = file
        .outputs
        .into_iter()
        .map(|f| io_spec("outputs", f, &prefixes))
        .collect::<Result<Vec<_>, _>>()?;
    let rules = file
        .rules
        .into_iter()
        .map(|r| {
            let block = RuleBlock {
                name: r.name,
                condition: r.condition,
                guards: r.guards,
                emit: r.emit,
            };
            parse_rule(&block, &prefixes)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let iris = |field: &'static str, values: Vec<String>| {
        values
            .iter()
            .map(|v| absolute_iri(field, v))
            .collect::<Result<Vec<_>, _>>()
    };

    let d = ServiceDescription {
        name: file.name,
        contributors: file.contributors,
        description: file.description,
        evaluation_metrics: file
            .evaluation_metrics
            .into_iter()
            .map(|m| EvaluationMetric {
                metric_name: m.metric,
                score: m.score,
            })
            .collect(),
        source_code: iris("sourceCode", file.source_code)?,
        implementation_languages: file.implementation_languages,
        endpoint: absolute_iri("endpoint", &file.endpoint)?,
        example_requests: iris("exampleRequests", file.example_requests)?,
        example_responses: iris("exampleResponses", file.example_responses)?,
        inputs,
        outputs,
        precondition,
        postcondition,
        algorithm_class: resolve_iri("algorithmClass", &file.algorithm_class, &prefixes)?,
        rules,
        declared_formats: file.declared_formats,
    };
    let structural = io_violations(&d);
    if !structural.is_empty() {
        return Err(DescriptionError::Structure(structural));
    }
    Ok(d)
}

fn io_file(io: &IoSpec) -> IoFile {
    IoFile {
        variable: io.variable.to_string(),
        kind: io.kind.as_str().to_string(),
        datatype: io.datatype.clone(),
        concept: io.concept.as_str().to_string(),
        format: io.format.clone(),
        required: io.required,
    }
}

/// Pretty JSON with expanded IRIs; [`parse_description`] reads it back to an
/// equal value.
pub fn emit_description(d: &ServiceDescription) -> String {
    let strings = |iris: &[Iri]| iris.iter().map(|i| i.as_str().to_string()).collect();
    let file = DescriptionFile {
        name: d.name.clone(),
        prefixes: BTreeMap::new(),
        contributors: d.contributors.clone(),
        description: d.description.clone(),
        evaluation_metrics: d
            .evaluation_metrics
            .iter()
            .map(|m| MetricFile {
                metric: m.metric_name.clone(),
                score: m.score,
            })
            .collect(),
        source_code: strings(&d.source_code),
        implementation_languages: d.implementation_languages.clone(),
        endpoint: d.endpoint.as_str().to_string(),
        example_requests: strings(&d.example_requests),
        example_responses: strings(&d.example_responses),
        inputs: d.inputs.iter().map(io_file).collect(),
        outputs: d.outputs.iter().map(io_file).collect(),
        precondition: d.precondition.to_string(),
        postcondition: d.postcondition.to_string(),
        algorithm_class: d.algorithm_class.as_str().to_string(),
        rules: d
            .rules
            .iter()
            .map(|r| {
                let b = r.to_block();
                RuleFile {
                    name: b.name,
                    condition: b.condition,
                    guards: b.guards,
                    emit: b.emit,
                }
            })
            .collect(),
        declared_formats: d.declared_formats.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("description serializes");
    out.push('\n');
    out
}

fn read(path: &Path) -> Result<Vec<u8>, FileError> {
    fs::read(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads one description file.
pub fn load_description(path: &Path) -> Result<(ServiceDescription, Vec<u8>), FileError> {
    let bytes = read(path)?;
    let d = parse_description(&bytes).map_err(|source| FileError::Description {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((d, bytes))
}

/// Reads every `*.json` description in `dir` (name order) into a registry.
pub fn load_registry(dir: &Path) -> Result<Registry, FileError> {
    let entries = fs::read_dir(dir).map_err(|source| FileError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| FileError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "json") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut registry = Registry::new();
    for path in paths {
        let (d, _) = load_description(&path)?;
        registry
            .register(d)
            .map_err(|violations| FileError::Invalid { path, violations })?;
    }
    Ok(registry)
}

/// Reads a knowledge-base text file with `prefixes` predeclared.
pub fn load_triples(path: &Path, prefixes: &Prefixes) -> Result<Vec<Triple>, FileError> {
    let bytes = read(path)?;
    let text = String::from_utf8_lossy(&bytes);
    parse_document(&text, prefixes).map_err(|source| FileError::Kb {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_kb(path: &Path, prefixes: &Prefixes) -> Result<KnowledgeBase, FileError> {
    load_triples(path, prefixes).map(KnowledgeBase::from_triples)
}

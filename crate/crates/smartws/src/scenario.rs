//! Mock backends for the tumor progression mapping (TPM) pipeline and a
//! temperature/heater device, plus their vocabulary.
//!
//! The mocks do no image processing. Each one mints its outputs from the
//! invocation fingerprint and links them to their inputs with
//! `sws:derivedFrom`, so the same binding always yields the same graph.

use std::collections::BTreeSet;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use smartws_core::descriptions::{Registry, ServiceDescription};
use smartws_core::kb::{
    well_known_prefixes, Binding, Iri, KnowledgeBase, Literal, Prefixes, Term, Triple, Variable, DC, RDF,
};
use smartws_core::smartness::compare_numeric;

use crate::transport::{
    host_service, BackendError, HandlerContext, HostConfig, HostHandle, LocalInvoker, ServiceHandler,
    TransportError,
};

pub const SP: &str = "http://surgipedia.sfb25.de/wiki/Special:URIResolver/";
pub const SWS: &str = "http://smartws.example.org/ns#";
pub const IOT: &str = "http://smartws.example.org/iot#";

pub const HEADSCAN: &str = "Category-3AHeadscan";
pub const BRAIN_ATLAS_IMAGE: &str = "Category-3ABrainAtlasImage";
pub const BRAIN_ATLAS_MASK: &str = "Category-3ABrainAtlasMask";
pub const BRAIN_IMAGE: &str = "Category-3ABrainImage";
pub const BRAIN_MASK: &str = "Category-3ABrainMask";
pub const REGISTERED_IMAGE: &str = "Category-3ARegisteredImage";
pub const NORMALIZED_IMAGE: &str = "Category-3ANormalizedImage";
pub const TUMOR_SEGMENTATION: &str = "Category-3ATumorSegmentation";
pub const PROGRESSION_MAP: &str = "Category-3AProgressionMap";

pub const NRRD: &str = "image/nrrd";
pub const PNG: &str = "image/png";

fn iri(s: &str) -> Iri {
    Iri::new(s).expect("vocabulary IRIs are valid")
}

pub fn sp(local: &str) -> Iri {
    iri(&format!("{SP}{local}"))
}

pub fn sws(local: &str) -> Iri {
    iri(&format!("{SWS}{local}"))
}

pub fn iot(local: &str) -> Iri {
    iri(&format!("{IOT}{local}"))
}

pub fn rdf_type() -> Iri {
    iri(&format!("{RDF}type"))
}

pub fn dc_format() -> Iri {
    iri(&format!("{DC}format"))
}

pub fn derived_from() -> Iri {
    sws("derivedFrom")
}

/// `rdf:`, `rdfs:`, `xsd:`, `dc:` plus `sp:`, `sws:` and `iot:`.
pub fn prefixes() -> Prefixes {
    let mut p = well_known_prefixes();
    p.insert("sp".into(), SP.into());
    p.insert("sws".into(), SWS.into());
    p.insert("iot".into(), IOT.into());
    p
}

/// Stand-in for an artifact payload: a digest of the producing service and
/// the sorted inputs it was derived from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MockArtifactContent {
    pub content_hash: String,
    pub lineage: Vec<Iri>,
}

impl MockArtifactContent {
    pub fn new(service_name: &str, mut lineage: Vec<Iri>) -> Self {
        lineage.sort();
        lineage.dedup();
        let mut h = Sha256::new();
        h.update(service_name.as_bytes());
        for i in &lineage {
            h.update(b"\n");
            h.update(i.as_str().as_bytes());
        }
        let content_hash = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        MockArtifactContent { content_hash, lineage }
    }
}

/// Every resource reachable from `start` over `sws:derivedFrom`, excluding `start`.
pub fn lineage_closure(kb: &KnowledgeBase, start: &Iri) -> BTreeSet<Iri> {
    let p = derived_from();
    let mut seen = BTreeSet::new();
    let mut stack = vec![start.clone()];
    while let Some(s) = stack.pop() {
        for t in kb.iter().filter(|t| t.subject == s && t.predicate == p) {
            if let Term::Iri(o) = t.object {
                if seen.insert(o.clone()) {
                    stack.push(o);
                }
            }
        }
    }
    seen
}

fn input(binding: &Binding, var: &str) -> Result<Iri, BackendError> {
    let v = Variable::new(var).map_err(|e| BackendError::Internal(e.to_string()))?;
    match binding.get(&v) {
        Some(Term::Iri(i)) => Ok(i.clone()),
        Some(Term::Literal(_)) => Err(BackendError::InvalidInput(format!("?{var} must be a resource"))),
        None => Err(BackendError::InvalidInput(format!("?{var} is not bound"))),
    }
}

/// A minted resource with its type, format and lineage.
fn artifact(ctx: &HandlerContext, var: &str, concept: &str, format: &str, sources: &[&Iri]) -> (Iri, Vec<Triple>) {
    let out = ctx.mint(var);
    let mut g = vec![
        Triple::new(out.clone(), rdf_type(), sp(concept)),
        Triple::new(out.clone(), dc_format(), Literal::string(format)),
    ];
    for s in sources {
        g.push(Triple::new(out.clone(), derived_from(), (*s).clone()));
    }
    (out, g)
}

pub fn brain_mask_generation(ctx: &HandlerContext, _: &[Triple], b: &Binding) -> Result<Vec<Triple>, BackendError> {
    let scan = input(b, "inputImage")?;
    input(b, "brainAtlasImage")?;
    input(b, "brainAtlasMask")?;
    let (_, mut g) = artifact(ctx, "brainImage", BRAIN_IMAGE, NRRD, &[&scan]);
    g.extend(artifact(ctx, "brainMask", BRAIN_MASK, NRRD, &[&scan]).1);
    Ok(g)
}

pub fn batched_folder_registration(
    ctx: &HandlerContext,
    _: &[Triple],
    b: &Binding,
) -> Result<Vec<Triple>, BackendError> {
    let image = input(b, "brainImage")?;
    let mask = input(b, "brainMask")?;
    Ok(artifact(ctx, "registeredImage", REGISTERED_IMAGE, NRRD, &[&image, &mask]).1)
}

fn normalization(ctx: &HandlerContext, b: &Binding, method: &str) -> Result<Vec<Triple>, BackendError> {
    let registered = input(b, "registeredImage")?;
    let annotation = input(b, "annotation").ok();
    let mut sources = vec![&registered];
    sources.extend(annotation.as_ref());
    let (out, mut g) = artifact(ctx, "normalizedImage", NORMALIZED_IMAGE, NRRD, &sources);
    g.push(Triple::new(out, sws("normalizationMethod"), Literal::string(method)));
    Ok(g)
}

pub fn robust_normalization(ctx: &HandlerContext, _: &[Triple], b: &Binding) -> Result<Vec<Triple>, BackendError> {
    normalization(ctx, b, "robust")
}

pub fn standard_normalization(ctx: &HandlerContext, _: &[Triple], b: &Binding) -> Result<Vec<Triple>, BackendError> {
    normalization(ctx, b, "standard")
}

pub fn tumor_segmentation(ctx: &HandlerContext, _: &[Triple], b: &Binding) -> Result<Vec<Triple>, BackendError> {
    let normalized = input(b, "normalizedImage")?;
    Ok(artifact(ctx, "segmentation", TUMOR_SEGMENTATION, NRRD, &[&normalized]).1)
}

pub fn map_generation(ctx: &HandlerContext, _: &[Triple], b: &Binding) -> Result<Vec<Triple>, BackendError> {
    let segmentation = input(b, "segmentation")?;
    let normalized = input(b, "normalizedImage")?;
    Ok(artifact(ctx, "progressionMap", PROGRESSION_MAP, PNG, &[&segmentation, &normalized]).1)
}

pub const HEATER_THRESHOLD: i64 = 20;

/// Turns the heater on below the threshold. Readings at or above it are
/// normally answered by the attached rule before this runs.
pub fn temperature_device(ctx: &HandlerContext, _: &[Triple], b: &Binding) -> Result<Vec<Triple>, BackendError> {
    let v = Variable::new("v").expect("valid");
    let reading = match b.get(&v) {
        Some(Term::Literal(l)) if l.datatype().is_numeric() => l.clone(),
        Some(other) => return Err(BackendError::InvalidInput(format!("reading {other} is not numeric"))),
        None => return Err(BackendError::InvalidInput("?v is not bound".into())),
    };
    let below = compare_numeric(reading.lexical(), &HEATER_THRESHOLD.to_string()).is_lt();
    let state = if below { "on" } else { "off" };
    Ok(vec![Triple::new(ctx.mint("h"), iot("hasState"), Literal::string(state))])
}

/// Returns the request graph unchanged.
pub fn echo(_: &HandlerContext, graph: &[Triple], _: &Binding) -> Result<Vec<Triple>, BackendError> {
    Ok(graph.to_vec())
}

type MockFn = fn(&HandlerContext, &[Triple], &Binding) -> Result<Vec<Triple>, BackendError>;

/// Handler names with their backends and the service each one implements.
pub const CATALOG: &[(&str, &str, MockFn)] = &[
    ("batched_folder_registration", "BatchedFolderRegistration", batched_folder_registration),
    ("brain_mask", "BrainMaskGeneration", brain_mask_generation),
    ("echo", "Echo", echo),
    ("map_generation", "MapGeneration", map_generation),
    ("robust_normalization", "RobustNormalization", robust_normalization),
    ("standard_normalization", "StandardNormalization", standard_normalization),
    ("temperature_device", "TemperatureDevice", temperature_device),
    ("tumor_segmentation", "TumorSegmentation", tumor_segmentation),
];

pub fn handler_names() -> Vec<&'static str> {
    CATALOG.iter().map(|(n, _, _)| *n).collect()
}

/// Catalog handler name for a service name.
pub fn handler_name_for(service_name: &str) -> Option<&'static str> {
    CATALOG.iter().find(|(_, s, _)| *s == service_name).map(|(n, _, _)| *n)
}

/// A fresh handler for `name` carrying the rules of `description`.
pub fn handler(name: &str, description: &ServiceDescription) -> Option<ServiceHandler> {
    let (_, _, f) = CATALOG.iter().find(|(n, _, _)| *n == name)?;
    Some(ServiceHandler::new(*f).with_rules(description.rules.clone()))
}

/// An in-process invoker for every registry service that has a catalog handler.
pub fn local_invoker(registry: &Registry, base_iri: Iri) -> LocalInvoker {
    let mut inv = LocalInvoker::new(base_iri);
    for d in registry.iter() {
        if let Some(h) = handler_name_for(&d.name).and_then(|n| handler(n, d)) {
            inv.add(d.name.clone(), Arc::new(h));
        }
    }
    inv
}

/// Hosts every registry service on an ephemeral port and returns a registry
/// whose endpoints point at the live hosts.
pub fn host_registry(registry: &Registry, base_iri: &Iri) -> Result<(Registry, Vec<HostHandle>), TransportError> {
    let mut live = Registry::new();
    let mut hosts = Vec::new();
    for d in registry.iter() {
        let Some(h) = handler_name_for(&d.name).and_then(|n| handler(n, d)) else {
            continue;
        };
        let mut config = HostConfig::new(0);
        config.base_iri = base_iri.clone();
        let host = host_service(d.clone(), Arc::new(h), config)?;
        let mut d = d.clone();
        d.endpoint = host.endpoint();
        live.register(d).map_err(TransportError::InvalidDescription)?;
        hosts.push(host);
    }
    Ok((live, hosts))
}

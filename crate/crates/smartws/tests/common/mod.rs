#![allow(dead_code)]

use std::path::PathBuf;

use smartws::files::{load_description, load_kb, load_registry};
use smartws::scenario::{host_registry, prefixes};
use smartws::transport::{HostHandle, HttpInvoker, DEFAULT_BASE_IRI};
use smartws_core::descriptions::{Registry, ServiceDescription};
use smartws_core::engine::{run_to_fixpoint, EngineConfig, RunReport};
use smartws_core::kb::{Iri, KnowledgeBase};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

pub fn base() -> Iri {
    Iri::new(DEFAULT_BASE_IRI).unwrap()
}

pub fn seed_kb() -> KnowledgeBase {
    load_kb(&fixture("kb/seed.nt"), &prefixes()).unwrap()
}

pub fn tpm_registry() -> Registry {
    load_registry(&fixture("descriptions")).unwrap()
}

pub fn description(rel: &str) -> ServiceDescription {
    load_description(&fixture(rel)).unwrap().0
}

/// The TPM registry hosted on ephemeral ports.
pub fn hosted_tpm() -> (Registry, Vec<HostHandle>) {
    host_registry(&tpm_registry(), &base()).unwrap()
}

pub fn run_hosted(config: &EngineConfig) -> (RunReport, KnowledgeBase) {
    let (registry, _hosts) = hosted_tpm();
    let mut kb = seed_kb();
    let report = run_to_fixpoint(&registry, &mut kb, config, &HttpInvoker::default()).unwrap();
    (report, kb)
}

pub fn blessing() -> bool {
    std::env::var_os("SMARTWS_BLESS").is_some()
}

//! Binding fingerprints and deterministic names for produced resources.

use alloc::string::String;
use core::fmt::Write;

use sha2::{Digest, Sha256};

use crate::kb::{Binding, Iri};

/// Lower-case hex SHA-256 of the binding's canonical text.
pub fn binding_fingerprint(binding: &Binding) -> String {
    let digest = Sha256::digest(binding.canonical().as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest.iter() {
        write!(out, "{byte:02x}").expect("writing to a String");
    }
    out
}

/// `base/service/fingerprint[..12]/variable`, with path segments
/// percent-encoded outside the unreserved set.
pub fn mint_output_iri(base: &Iri, service_name: &str, fingerprint: &str, output_variable: &str) -> Iri {
    let prefix: String = fingerprint.chars().take(12).collect();
    let mut value = String::from(base.as_str().trim_end_matches('/'));
    for segment in [service_name, prefix.as_str(), output_variable] {
        value.push('/');
        push_encoded(&mut value, segment);
    }
    Iri::new(value).expect("a valid base IRI extended with encoded segments stays valid")
}

fn push_encoded(out: &mut String, segment: &str) {
    for byte in segment.bytes() {
        if byte.is_ascii_alphanumeric() || matches!(byte, b'-' | b'.' | b'_' | b'~') {
            out.push(byte as char);
        } else {
            write!(out, "%{byte:02X}").expect("writing to a String");
        }
    }
}

//! Live maturity checks against a hosted service. Only GET requests are
//! issued, so probing never runs a backend.

use std::time::Duration;

use smartws_core::kb::Iri;
use smartws_core::maturity::{ProbeCheck, ProbeResults};

use crate::files::parse_description;
use crate::transport::{agent, url, CONTENT_TYPE};

fn failure(e: &ureq::Error) -> ProbeCheck {
    match e {
        ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::ConnectionRefused => {
            ProbeCheck::fail(format!("connection refused: {io}"))
        }
        ureq::Error::ConnectionFailed => ProbeCheck::fail("connection refused"),
        other => ProbeCheck::fail(format!("unreachable: {other}")),
    }
}

pub fn probe_endpoint(endpoint: &Iri) -> ProbeResults {
    probe_with_timeout(endpoint, Duration::from_secs(5))
}

pub fn probe_with_timeout(endpoint: &Iri, timeout: Duration) -> ProbeResults {
    let agent = agent(timeout);

    let health = match agent.get(url(endpoint, "/health")).call() {
        Ok(r) if r.status().as_u16() == 200 => ProbeCheck::pass("200 ok"),
        Ok(r) => ProbeCheck::fail(format!("status {}", r.status().as_u16())),
        Err(e) => failure(&e),
    };

    let description = match agent.get(url(endpoint, "/description")).call() {
        Ok(mut r) if r.status().as_u16() == 200 => match r.body_mut().read_to_vec() {
            Ok(bytes) => match parse_description(&bytes) {
                Ok(d) => ProbeCheck::pass(format!("200, parsed description of `{}`", d.name)),
                Err(e) => ProbeCheck::fail(format!("200 but malformed description: {e}")),
            },
            Err(e) => ProbeCheck::fail(format!("unreadable body: {e}")),
        },
        Ok(r) => ProbeCheck::fail(format!("status {}", r.status().as_u16())),
        Err(e) => failure(&e),
    };

    let invoke_content_type = match agent.get(url(endpoint, "/invoke")).call() {
        Ok(r) => {
            let status = r.status().as_u16();
            let accepts = r
                .headers()
                .get("accept-post")
                .and_then(|v| v.to_str().ok())
                .unwrap_or("")
                .to_string();
            if status == 405 && accepts.to_ascii_lowercase().contains(CONTENT_TYPE) {
                ProbeCheck::pass(format!("405 for GET, accepts POST {accepts}"))
            } else {
                ProbeCheck::fail(format!("GET status {status}, Accept-Post `{accepts}`"))
            }
        }
        Err(e) => failure(&e),
    };

    ProbeResults {
        health,
        description,
        invoke_content_type,
    }
}

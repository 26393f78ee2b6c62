//! JSON forms of run and maturity reports.

use serde_json::{json, Value};
use smartws_core::engine::{InvocationKey, RunReport};
use smartws_core::maturity::MaturityReport;

fn key(k: &InvocationKey) -> Value {
    json!({ "service": k.service_name, "fingerprint": k.binding_fingerprint })
}

pub fn run_report_json(r: &RunReport) -> Value {
    json!({
        "roundsExecuted": r.rounds_executed,
        "terminatedBy": r.terminated_by.as_str(),
        "finalKbSize": r.final_kb_size,
        "kbSizes": r.kb_sizes,
        "records": r.records.iter().map(|rec| json!({
            "key": key(&rec.key),
            "round": rec.round,
            "outcome": rec.outcome.as_str(),
            "triplesAdded": rec.triples_added,
            "durationMs": rec.duration_ms,
            "detail": rec.detail,
        })).collect::<Vec<_>>(),
        "suppressed": r.suppressed.iter().map(key).collect::<Vec<_>>(),
    })
}

/// Zeroes every `durationMs` so reports from different runs compare equal.
pub fn without_durations(mut v: Value) -> Value {
    if let Some(records) = v.get_mut("records").and_then(Value::as_array_mut) {
        for r in records {
            if let Some(d) = r.get_mut("durationMs") {
                *d = json!(0);
            }
        }
    }
    v
}

pub fn maturity_report_json(r: &MaturityReport) -> Value {
    json!({
        "level": r.level,
        "probed": r.probed,
        "criteria": r.criteria.iter().map(|c| json!({
            "id": c.criterion_id,
            "level": c.level,
            "passed": c.passed,
            "evidence": c.evidence,
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

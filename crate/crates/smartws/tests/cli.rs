mod common;

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::*;
use proptest::prelude::*;
use smartws::files::emit_description;
use smartws_core::kb::{serialize, KnowledgeBase};
use support::{oracle_match, small_graph, small_pattern};

fn smartws(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smartws")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Hosts the TPM services and writes their live descriptions to a directory.
fn live_registry() -> (tempfile::TempDir, Vec<smartws::transport::HostHandle>) {
    let (registry, hosts) = hosted_tpm();
    let dir = tempfile::tempdir().unwrap();
    for d in registry.iter() {
        std::fs::write(dir.path().join(format!("{}.json", d.name)), emit_description(d)).unwrap();
    }
    (dir, hosts)
}

#[test]
fn run_full_pipeline() {
    let (dir, _hosts) = live_registry();
    let out = tempfile::tempdir().unwrap();
    let report = out.path().join("report.json");
    let final_kb = out.path().join("final.nt");
    let o = smartws(&[
        "run",
        "--kb",
        path(&fixture("kb/seed.nt")),
        "--registry",
        path(dir.path()),
        "--report",
        path(&report),
        "--final-kb",
        path(&final_kb),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        std::fs::read_to_string(&final_kb).unwrap(),
        std::fs::read_to_string(fixture("expected/final_kb.nt")).unwrap()
    );
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["terminatedBy"], "fixpoint");
    let services: Vec<&str> = json["records"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["key"]["service"].as_str().unwrap())
        .collect();
    assert_eq!(
        services,
        ["BrainMaskGeneration", "BatchedFolderRegistration", "RobustNormalization", "TumorSegmentation", "MapGeneration"]
    );
    let golden: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("expected/report.json")).unwrap()).unwrap();
    assert_eq!(smartws::report::without_durations(json), golden);
    assert!(stdout(&o).contains("terminated by fixpoint after 6 round(s)"));
    assert!(stdout(&o).contains("suppressed: StandardNormalization"));
}

#[test]
fn run_allow_list_round_cap_and_scope() {
    let (dir, _hosts) = live_registry();
    let seed = fixture("kb/seed.nt");
    let base_args = ["run", "--kb", path(&seed), "--registry", path(dir.path())];

    let o = smartws(&[&base_args[..], &["--only", "BrainMaskGeneration"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).matches("round ").count(), 1);

    let o = smartws(&[&base_args[..], &["--max-rounds", "1"]].concat());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("terminated by max_rounds"));

    let o = smartws(&[&base_args[..], &["--only", ""]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("after 1 round(s)"));

    let o = smartws(&[&base_args[..], &["--only", "Nope"]].concat());
    assert_eq!(o.status.code(), Some(2));

    let scope = "?inputImage <http://example.org/neverThere> ?x .";
    let o = smartws(&[&base_args[..], &["--scope", scope, "--only", "BrainMaskGeneration"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("round ").count(), 0);
}

#[test]
fn run_usage_errors() {
    let o = smartws(&["run", "--kb", "/nonexistent/seed.nt", "--registry", path(&fixture("descriptions"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/seed.nt"));
    let o = smartws(&["run", "--kb", path(&fixture("kb/seed.nt"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = smartws(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = smartws(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn unreachable_services_are_tolerated() {
    // Fixture endpoints point at ports nobody listens on.
    let dir = tempfile::tempdir().unwrap();
    let mut d = description("descriptions/brain_mask_generation.json");
    d.endpoint = smartws_core::kb::Iri::new("http://127.0.0.1:9").unwrap();
    std::fs::write(dir.path().join("bm.json"), emit_description(&d)).unwrap();
    let report = dir.path().join("r.json");
    let o = smartws(&[
        "run",
        "--kb",
        path(&fixture("kb/seed.nt")),
        "--registry",
        path(dir.path()),
        "--report",
        path(&report),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["records"][0]["outcome"], "http_error");
    assert!(json["records"][0]["detail"].as_str().unwrap().contains("connection"));
}

#[test]
fn match_prints_table() {
    let seed = fixture("kb/seed.nt");
    let d = description("descriptions/brain_mask_generation.json");
    let o = smartws(&["match", "--kb", path(&seed), "--pattern", &d.precondition.to_string()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "?brainAtlasImage\t?brainAtlasMask\t?inputImage");
    assert!(lines[1].ends_with("<http://smartws.example.org/data/patient-001/headscan-2019-03-14>"));

    let o = smartws(&["match", "--kb", path(&seed), "--pattern", "?x rdf:type sp:Category-3AProgressionMap ."]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "?x\n");

    let o = smartws(&["match", "--kb", path(&seed), "--pattern", "?x rdf:type"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn match_agrees_with_oracle(graph in small_graph(12), pattern in small_pattern(3)) {
        let dir = tempfile::tempdir().unwrap();
        let kb_path = dir.path().join("kb.nt");
        std::fs::write(&kb_path, serialize(&KnowledgeBase::from_triples(graph.iter().cloned()))).unwrap();
        let o = smartws(&["match", "--kb", path(&kb_path), "--pattern", &pattern.to_string()]);
        prop_assert_eq!(o.status.code(), Some(0));
        let mut expected = String::new();
        let header: Vec<String> = pattern.vars().iter().map(|v| v.to_string()).collect();
        expected.push_str(&header.join("\t"));
        expected.push('\n');
        for b in oracle_match(&pattern, &graph) {
            expected.push_str(&b.canonical_terms().join("\t"));
            expected.push('\n');
        }
        prop_assert_eq!(stdout(&o), expected);
    }
}

#[test]
fn classify_fixtures() {
    for (file, level) in [
        ("maturity/weather_feed.json", 1),
        ("descriptions/brain_mask_generation.json", 2),
        ("maturity/temperature_device.json", 3),
    ] {
        let o = smartws(&["classify", "--desc", path(&fixture(file))]);
        assert_eq!(o.status.code(), Some(0));
        let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(json["level"], level, "{file}");
        assert_eq!(json["probed"], false);
        assert_eq!(json["criteria"].as_array().unwrap().len(), 7);
    }
    let o = smartws(&["classify", "--desc", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed.json");
    let text = std::fs::read_to_string(fixture("maturity/temperature_device.json")).unwrap();
    std::fs::write(&closed, text.replace("127.0.0.1:8090", "127.0.0.1:9")).unwrap();
    let o = smartws(&["classify", "--desc", path(&closed), "--probe"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["probed"], true);
    assert_eq!(json["level"], 0);
}

#[test]
fn kb_dump_and_diff() {
    let dir = tempfile::tempdir().unwrap();
    let messy = dir.path().join("messy.nt");
    std::fs::write(
        &messy,
        "@prefix ex: <http://example.org/> .\nex:b ex:p \"2\"^^integer .\nex:a ex:p ex:c .\nex:a ex:p ex:c .\n",
    )
    .unwrap();
    let o = smartws(&["kb-dump", path(&messy)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "<http://example.org/a> <http://example.org/p> <http://example.org/c> .\n\
         <http://example.org/b> <http://example.org/p> \"2\"^^integer .\n"
    );
    let canonical = dir.path().join("canonical.nt");
    std::fs::write(&canonical, stdout(&o)).unwrap();
    assert_eq!(smartws(&["kb-diff", path(&messy), path(&canonical)]).status.code(), Some(0));

    let o = smartws(&["kb-diff", path(&fixture("kb/seed.nt")), path(&fixture("expected/final_kb.nt"))]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("+ ")).count(), 21);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("- ")).count(), 0);

    assert_eq!(smartws(&["kb-dump", "/nonexistent.nt"]).status.code(), Some(2));
}

#[test]
fn serve_hosts_a_catalog_handler() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_smartws"))
        .args(["serve", "--desc", path(&fixture("maturity/temperature_device.json")), "--handler", "temperature_device"])
        .env("SMARTWS_BASE_IRI", "http://base.test/minted")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.split("http://").nth(1).unwrap().split_whitespace().next().unwrap().to_string();
    let endpoint = smartws_core::kb::Iri::new(format!("http://{addr}")).unwrap();
    let request = smartws::transport::InvocationRequest {
        graph: smartws_core::kb::parse_document(
            "<http://room/t> rdf:type iot:Temperature .\n<http://room/t> iot:hasValue \"12\"^^integer .\n",
            &smartws::scenario::prefixes(),
        )
        .unwrap(),
        binding: Default::default(),
    };
    let response = smartws::transport::invoke(&endpoint, &request);
    let _ = child.kill();
    let _ = child.wait();
    let response = response.unwrap();
    assert!(response.graph[0].subject.as_str().starts_with("http://base.test/minted/TemperatureDevice/"));
}

#[test]
fn serve_errors() {
    let o = smartws(&["serve", "--desc", path(&fixture("maturity/temperature_device.json")), "--handler", "toaster"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("brain_mask"), "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": 3\n}\n").unwrap();
    let o = smartws(&["serve", "--desc", path(&bad), "--handler", "echo"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

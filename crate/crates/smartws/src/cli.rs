//! The `smartws` command line.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage or unreadable input.
//! Knowledge-base files and patterns may use the `rdf:`, `rdfs:`, `xsd:`,
//! `dc:`, `sp:`, `sws:` and `iot:` prefixes without declaring them.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use smartws_core::engine::{run_to_fixpoint, EngineConfig, Termination};
use smartws_core::kb::{match_pattern, parse_pattern, serialize, sort_canonical, GraphPattern, KnowledgeBase};
use smartws_core::maturity::classify;

use crate::files::{load_description, load_kb, load_registry, FileError};
use crate::probe::probe_endpoint;
use crate::report::{maturity_report_json, run_report_json, to_text};
use crate::scenario::{handler, handler_names, prefixes};
use crate::transport::{base_iri_from_env, host_service, HostConfig, HttpInvoker};

#[derive(Debug, Parser)]
#[command(name = "smartws", version, about = "Host, compose and classify semantic web services")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Host one description with a catalog handler until interrupted.
    Serve {
        #[arg(long)]
        desc: PathBuf,
        #[arg(long)]
        handler: String,
        /// 0 picks a free port.
        #[arg(long, default_value_t = 0)]
        port: u16,
    },
    /// Run the data-driven engine to a fixpoint.
    Run {
        #[arg(long)]
        kb: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long, default_value_t = 32)]
        max_rounds: u32,
        /// Where to write the JSON run report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Where to write the final knowledge base.
        #[arg(long)]
        final_kb: Option<PathBuf>,
        /// Extra pattern conjoined with every precondition (text or file).
        #[arg(long)]
        scope: Option<String>,
        /// Comma-separated allow-list of service names.
        #[arg(long)]
        only: Option<String>,
        #[arg(long, default_value_t = 4)]
        concurrency: usize,
        #[arg(long, default_value = "accuracy")]
        metric: String,
    },
    /// Print the solutions of a pattern as a tab-separated table.
    Match {
        #[arg(long)]
        kb: PathBuf,
        /// Pattern text or a file containing it.
        #[arg(long)]
        pattern: String,
    },
    /// Print the maturity report of a description.
    Classify {
        #[arg(long)]
        desc: PathBuf,
        /// Also check the live endpoint.
        #[arg(long)]
        probe: bool,
    },
    /// Show triples only in A (`-`) or only in B (`+`); exit 1 if they differ.
    KbDiff { a: PathBuf, b: PathBuf },
    /// Print a knowledge base in canonical form.
    KbDump { file: PathBuf },
}

enum Failure {
    Domain(String),
    Usage(String),
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Invalid { .. } => Failure::Domain(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn pattern_arg(arg: &str) -> Result<GraphPattern, Failure> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?
    } else {
        arg.to_string()
    };
    parse_pattern(&text, &prefixes()).map_err(|e| Failure::Usage(format!("pattern: {e}")))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match command {
        Command::Serve { desc, handler: name, port } => serve(&desc, &name, port, out),
        Command::Run {
            kb,
            registry,
            max_rounds,
            report,
            final_kb,
            scope,
            only,
            concurrency,
            metric,
        } => {
            let mut kb = load_kb(&kb, &prefixes())?;
            let registry = load_registry(&registry)?;
            let mut config = EngineConfig {
                max_rounds,
                concurrency_width: concurrency,
                selection_metric: metric,
                ..EngineConfig::default()
            };
            if let Some(s) = scope {
                config.scope_filter = Some(pattern_arg(&s)?);
            }
            if let Some(only) = only {
                let names: BTreeSet<String> = only
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect();
                if let Some(unknown) = names.iter().find(|n| registry.get(n).is_none()) {
                    return Err(Failure::Usage(format!("--only: no service named `{unknown}` in the registry")));
                }
                config.allowed_services = Some(names);
            }
            let report = {
                let r = run_to_fixpoint(&registry, &mut kb, &config, &HttpInvoker::default())
                    .map_err(|e| Failure::Domain(e.to_string()))?;
                if let Some(path) = &report {
                    write_file(path, &to_text(&run_report_json(&r)))?;
                }
                r
            };
            if let Some(path) = &final_kb {
                write_file(path, &serialize(&kb))?;
            }
            for rec in &report.records {
                let _ = writeln!(
                    out,
                    "round {}: {} {} (+{} triples)",
                    rec.round,
                    rec.key.service_name,
                    rec.outcome.as_str(),
                    rec.triples_added
                );
                if let Some(d) = &rec.detail {
                    let _ = writeln!(err, "  {}: {d}", rec.key.service_name);
                }
            }
            for k in &report.suppressed {
                let _ = writeln!(out, "suppressed: {}", k.service_name);
            }
            let _ = writeln!(
                out,
                "terminated by {} after {} round(s); knowledge base has {} triples",
                report.terminated_by.as_str(),
                report.rounds_executed,
                report.final_kb_size
            );
            Ok(match report.terminated_by {
                Termination::Fixpoint => 0,
                Termination::MaxRounds => 1,
            })
        }
        Command::Match { kb, pattern } => {
            let kb = load_kb(&kb, &prefixes())?;
            let pattern = pattern_arg(&pattern)?;
            let header: Vec<String> = pattern.vars().iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "{}", header.join("\t"));
            for b in match_pattern(&pattern, &kb) {
                let _ = writeln!(out, "{}", b.canonical_terms().join("\t"));
            }
            Ok(0)
        }
        Command::Classify { desc, probe } => {
            let (d, _) = load_description(&desc)?;
            let probed = probe.then(|| probe_endpoint(&d.endpoint));
            let report = classify(&d, probed.as_ref());
            let _ = write!(out, "{}", to_text(&maturity_report_json(&report)));
            Ok(0)
        }
        Command::KbDiff { a, b } => {
            let a = load_kb(&a, &prefixes())?;
            let b = load_kb(&b, &prefixes())?;
            let mut only_a: Vec<_> = a.iter().filter(|t| !b.contains(t)).collect();
            let mut only_b: Vec<_> = b.iter().filter(|t| !a.contains(t)).collect();
            sort_canonical(&mut only_a);
            sort_canonical(&mut only_b);
            for t in &only_a {
                let _ = writeln!(out, "- {t}");
            }
            for t in &only_b {
                let _ = writeln!(out, "+ {t}");
            }
            Ok(if only_a.is_empty() && only_b.is_empty() { 0 } else { 1 })
        }
        Command::KbDump { file } => {
            let kb: KnowledgeBase = load_kb(&file, &prefixes())?;
            let _ = write!(out, "{}", serialize(&kb));
            Ok(0)
        }
    }
}

fn serve(desc: &Path, name: &str, port: u16, out: &mut dyn Write) -> Outcome {
    let (d, bytes) = load_description(desc).map_err(|e| Failure::Domain(e.to_string()))?;
    let Some(h) = handler(name, &d) else {
        return Err(Failure::Domain(format!(
            "unknown handler `{name}`; available: {}",
            handler_names().join(", ")
        )));
    };
    let mut config = HostConfig::new(port);
    config.base_iri = base_iri_from_env();
    config.description_document = Some(String::from_utf8_lossy(&bytes).into_owned());
    let host = host_service(d.clone(), Arc::new(h), config).map_err(|e| Failure::Domain(e.to_string()))?;
    let _ = writeln!(out, "serving {} on http://{} (port {})", d.name, host.addr(), host.addr().port());
    let _ = out.flush();
    host.wait();
    Ok(0)
}

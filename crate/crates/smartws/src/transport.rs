//! HTTP hosting and invocation of services.
//!
//! A hosted service answers `GET /health`, `GET /description` and
//! `POST /invoke`. Request and response bodies are knowledge-base text
//! (`application/n-triples`). The request carries the instantiated
//! precondition plus one `<urn:smartws:var:NAME> <urn:smartws:binds> term`
//! statement per bound variable.

use std::net::{SocketAddr, TcpListener};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use smartws_core::descriptions::{validate_description, ServiceDescription, Violation};
use smartws_core::engine::{binding_fingerprint, Call, CallOutcome, CallResult, Invoker};
use smartws_core::kb::{
    parse_document, serialize_triples, sort_canonical, Binding, Iri, KnowledgeBase,
    Prefixes, Triple, Variable,
};
use smartws_core::smartness::{evaluate_rules, MintContext, SmartRule};
use thiserror::Error;

pub const CONTENT_TYPE: &str = "application/n-triples";
pub const SHORT_CIRCUIT_HEADER: &str = "X-SmartWS-Short-Circuit";
pub const BINDS: &str = "urn:smartws:binds";
pub const VAR_PREFIX: &str = "urn:smartws:var:";
pub const BASE_IRI_ENV: &str = "SMARTWS_BASE_IRI";
pub const DEFAULT_BASE_IRI: &str = "http://smartws.example.org/resource";

/// Minting base from `SMARTWS_BASE_IRI`, falling back to [`DEFAULT_BASE_IRI`].
pub fn base_iri_from_env() -> Iri {
    std::env::var(BASE_IRI_ENV)
        .ok()
        .and_then(|v| Iri::new(v).ok())
        .unwrap_or_else(|| Iri::new(DEFAULT_BASE_IRI).expect("default base is valid"))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvocationRequest {
    pub graph: Vec<Triple>,
    pub binding: Binding,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvocationResponse {
    pub graph: Vec<Triple>,
    pub short_circuited: bool,
}

#[derive(Debug, Error)]
pub enum WireError {
    #[error("malformed body: {0}")]
    Parse(#[from] smartws_core::kb::ParseError),
    #[error("malformed binding statement: {0}")]
    Binding(String),
}

fn binds() -> Iri {
    Iri::new(BINDS).expect("valid")
}

/// Canonical body for a request: graph and binding statements, sorted.
pub fn encode_request(request: &InvocationRequest) -> String {
    let mut all = request.graph.clone();
    for (var, term) in request.binding.iter() {
        let subject = Iri::new(format!("{VAR_PREFIX}{}", var.name())).expect("variable names are IRI-safe");
        all.push(Triple::new(subject, binds(), term.clone()));
    }
    sort_canonical(&mut all);
    serialize_triples(&all)
}

pub fn decode_request(body: &str) -> Result<InvocationRequest, WireError> {
    let mut request = InvocationRequest::default();
    for t in parse_document(body, &Prefixes::new())? {
        if t.predicate.as_str() == BINDS {
            let name = t
                .subject
                .as_str()
                .strip_prefix(VAR_PREFIX)
                .ok_or_else(|| WireError::Binding(t.to_string()))?;
            let var = Variable::new(name).map_err(|_| WireError::Binding(t.to_string()))?;
            if request.binding.insert(var, t.object.clone()).is_some() {
                return Err(WireError::Binding(format!("{name} bound twice")));
            }
        } else {
            request.graph.push(t);
        }
    }
    sort_canonical(&mut request.graph);
    Ok(request)
}

pub fn encode_graph(graph: &[Triple]) -> String {
    let mut g = graph.to_vec();
    sort_canonical(&mut g);
    serialize_triples(&g)
}

pub fn decode_graph(body: &str) -> Result<Vec<Triple>, WireError> {
    let mut g = parse_document(body, &Prefixes::new())?;
    sort_canonical(&mut g);
    Ok(g)
}

/// Per-invocation context handed to a backend.
#[derive(Clone, Debug)]
pub struct HandlerContext {
    pub base_iri: Iri,
    pub service_name: String,
    pub fingerprint: String,
}

impl HandlerContext {
    /// `{base}/{service}/{fingerprint[..12]}/{var}`, matching rule-minted IRIs.
    pub fn mint(&self, var: &str) -> Iri {
        smartws_core::engine::mint_output_iri(&self.base_iri, &self.service_name, &self.fingerprint, var)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Backend =
    dyn Fn(&HandlerContext, &[Triple], &Binding) -> Result<Vec<Triple>, BackendError> + Send + Sync;

/// A service implementation: the backend function, the rules evaluated ahead
/// of it, and a counter of backend executions.
pub struct ServiceHandler {
    backend: Box<Backend>,
    rules: Vec<SmartRule>,
    executions: AtomicU64,
}

impl ServiceHandler {
    pub fn new<F>(backend: F) -> Self
    where
        F: Fn(&HandlerContext, &[Triple], &Binding) -> Result<Vec<Triple>, BackendError> + Send + Sync + 'static,
    {
        ServiceHandler {
            backend: Box::new(backend),
            rules: Vec::new(),
            executions: AtomicU64::new(0),
        }
    }

    pub fn with_rules(mut self, rules: Vec<SmartRule>) -> Self {
        self.rules = rules;
        self
    }

    pub fn rules(&self) -> &[SmartRule] {
        &self.rules
    }

    /// How many times the backend ran; rule short-circuits are not counted.
    pub fn executions(&self) -> u64 {
        self.executions.load(Ordering::SeqCst)
    }
}

/// An HTTP-level answer from [`handle_invoke`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub status: u16,
    pub short_circuited: bool,
    pub body: String,
}

impl Reply {
    fn error(status: u16, message: impl Into<String>) -> Self {
        let mut body = message.into();
        body.push('\n');
        Reply {
            status,
            short_circuited: false,
            body,
        }
    }
}

/// Serves one `POST /invoke` body.
pub fn handle_invoke(d: &ServiceDescription, handler: &ServiceHandler, base_iri: &Iri, body: &str) -> Reply {
    let request = match decode_request(body) {
        Ok(r) => r,
        Err(e) => return Reply::error(400, e.to_string()),
    };
    if let Some(v) = request.binding.vars().find(|v| !d.precondition.vars().contains(*v)) {
        return Reply::error(422, format!("binding variable {v} is not a precondition variable"));
    }
    let graph = KnowledgeBase::from_triples(request.graph.iter().cloned());
    let Some(binding) = d.precondition_bindings(&graph, &request.binding).into_iter().next() else {
        return Reply::error(422, "request does not satisfy the precondition");
    };
    let binding = binding.restrict(d.precondition.vars());
    let fingerprint = binding_fingerprint(&binding);

    let fired = evaluate_rules(
        &handler.rules,
        &request.graph,
        &binding,
        MintContext {
            base: base_iri,
            service_name: &d.name,
            fingerprint: &fingerprint,
        },
    );
    if fired.fired {
        return Reply {
            status: 200,
            short_circuited: true,
            body: encode_graph(&fired.emitted),
        };
    }

    let ctx = HandlerContext {
        base_iri: base_iri.clone(),
        service_name: d.name.clone(),
        fingerprint,
    };
    handler.executions.fetch_add(1, Ordering::SeqCst);
    let result = catch_unwind(AssertUnwindSafe(|| (handler.backend)(&ctx, &request.graph, &binding)));
    match result {
        Ok(Ok(graph)) => Reply {
            status: 200,
            short_circuited: false,
            body: encode_graph(&graph),
        },
        Ok(Err(BackendError::InvalidInput(m))) => Reply::error(422, m),
        Ok(Err(BackendError::Internal(m))) => Reply::error(500, m),
        Err(_) => Reply::error(500, "handler panicked"),
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("cannot bind port {port}: {source}")]
    Bind { port: u16, source: std::io::Error },
    #[error("invalid description: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidDescription(Vec<Violation>),
    #[error("cannot start runtime: {0}")]
    Runtime(std::io::Error),
}

#[derive(Clone, Debug)]
pub struct HostConfig {
    /// 0 picks an ephemeral port.
    pub port: u16,
    pub base_iri: Iri,
    /// Served verbatim by `GET /description`; defaults to the emitted form.
    pub description_document: Option<String>,
}

impl HostConfig {
    pub fn new(port: u16) -> Self {
        HostConfig {
            port,
            base_iri: base_iri_from_env(),
            description_document: None,
        }
    }
}

struct Hosted {
    description: ServiceDescription,
    document: String,
    handler: Arc<ServiceHandler>,
    base_iri: Iri,
}

/// A running service; stops when dropped.
pub struct HostHandle {
    addr: SocketAddr,
    handler: Arc<ServiceHandler>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<thread::JoinHandle<()>>,
}

impl HostHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn endpoint(&self) -> Iri {
        Iri::new(format!("http://{}", self.addr)).expect("valid")
    }

    pub fn handler(&self) -> &ServiceHandler {
        &self.handler
    }

    /// Blocks until the server stops.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for HostHandle {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

async fn health() -> &'static str {
    "ok"
}

async fn description_doc(State(h): State<Arc<Hosted>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], h.document.clone()).into_response()
}

async fn invoke_get() -> Response {
    (
        StatusCode::METHOD_NOT_ALLOWED,
        [(header::ALLOW, "POST"), (header::HeaderName::from_static("accept-post"), CONTENT_TYPE)],
        "use POST with an application/n-triples body\n",
    )
        .into_response()
}

async fn invoke_post(State(h): State<Arc<Hosted>>, headers: HeaderMap, body: String) -> Response {
    if let Some(ct) = headers.get(header::CONTENT_TYPE) {
        let ct = ct.to_str().unwrap_or("");
        let essence = ct.split(';').next().unwrap_or("").trim();
        if !essence.eq_ignore_ascii_case(CONTENT_TYPE) {
            return (
                StatusCode::UNSUPPORTED_MEDIA_TYPE,
                [(header::ACCEPT, CONTENT_TYPE)],
                format!("unsupported content type `{ct}`\n"),
            )
                .into_response();
        }
    }
    let reply = handle_invoke(&h.description, &h.handler, &h.base_iri, &body);
    let status = StatusCode::from_u16(reply.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let content_type = if status.is_success() { CONTENT_TYPE } else { "text/plain" };
    let mut response = (status, [(header::CONTENT_TYPE, content_type)], reply.body).into_response();
    if reply.short_circuited {
        response
            .headers_mut()
            .insert(SHORT_CIRCUIT_HEADER, HeaderValue::from_static("true"));
    }
    response
}

/// Starts serving `description` on 127.0.0.1 in a background thread.
pub fn host_service(
    description: ServiceDescription,
    handler: Arc<ServiceHandler>,
    config: HostConfig,
) -> Result<HostHandle, TransportError> {
    let violations = validate_description(&description);
    if !violations.is_empty() {
        return Err(TransportError::InvalidDescription(violations));
    }
    let listener = TcpListener::bind(("127.0.0.1", config.port)).map_err(|source| TransportError::Bind {
        port: config.port,
        source,
    })?;
    listener.set_nonblocking(true).map_err(TransportError::Runtime)?;
    let addr = listener.local_addr().map_err(TransportError::Runtime)?;
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_io()
        .build()
        .map_err(TransportError::Runtime)?;

    let document = config
        .description_document
        .unwrap_or_else(|| crate::files::emit_description(&description));
    let state = Arc::new(Hosted {
        description,
        document,
        handler: handler.clone(),
        base_iri: config.base_iri,
    });
    let app = Router::new()
        .route("/health", get(health))
        .route("/description", get(description_doc))
        .route("/invoke", get(invoke_get).post(invoke_post))
        .with_state(state);

    let (tx, rx) = tokio::sync::oneshot::channel::<()>();
    let thread = thread::spawn(move || {
        runtime.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).expect("listener registers");
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
    });
    Ok(HostHandle {
        addr,
        handler,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}

#[derive(Debug, Error)]
pub enum InvokeError {
    #[error("connection failed: {0}")]
    Connection(String),
    #[error("precondition rejected by service: {0}")]
    Validation(String),
    #[error("HTTP {code}: {message}")]
    Status { code: u16, message: String },
    #[error("unreadable response: {0}")]
    Body(String),
}

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(timeout))
        .build()
        .into()
}

pub(crate) fn url(endpoint: &Iri, path: &str) -> String {
    format!("{}{path}", endpoint.as_str().trim_end_matches('/'))
}

/// POSTs `request` to `{endpoint}/invoke`.
pub fn invoke(endpoint: &Iri, request: &InvocationRequest) -> Result<InvocationResponse, InvokeError> {
    invoke_with(&agent(Duration::from_secs(30)), endpoint, request)
}

fn invoke_with(
    agent: &ureq::Agent,
    endpoint: &Iri,
    request: &InvocationRequest,
) -> Result<InvocationResponse, InvokeError> {
    let mut response = agent
        .post(url(endpoint, "/invoke"))
        .header("Content-Type", CONTENT_TYPE)
        .header("Accept", CONTENT_TYPE)
        .send(encode_request(request))
        .map_err(|e| InvokeError::Connection(e.to_string()))?;
    let code = response.status().as_u16();
    let short_circuited = response
        .headers()
        .get(SHORT_CIRCUIT_HEADER)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.eq_ignore_ascii_case("true"));
    let body = response
        .body_mut()
        .read_to_string()
        .map_err(|e| InvokeError::Body(e.to_string()))?;
    match code {
        200..=299 => {}
        422 => return Err(InvokeError::Validation(body.trim().to_string())),
        _ => {
            return Err(InvokeError::Status {
                code,
                message: body.trim().to_string(),
            })
        }
    }
    let graph = decode_graph(&body).map_err(|e| InvokeError::Body(e.to_string()))?;
    Ok(InvocationResponse { graph, short_circuited })
}

/// Runs `f` over `calls` with at most `width` worker threads, keeping order.
fn bounded<F>(calls: &[Call<'_>], width: usize, f: F) -> Vec<CallResult>
where
    F: Fn(&Call<'_>) -> CallOutcome + Sync,
{
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CallResult>>> = Mutex::new(vec![None; calls.len()]);
    let workers = width.max(1).min(calls.len());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(call) = calls.get(i) else { break };
                let start = Instant::now();
                let outcome = f(call);
                let duration_ms = start.elapsed().as_millis() as u64;
                results.lock().expect("no poisoned workers")[i] = Some(CallResult { outcome, duration_ms });
            });
        }
    });
    results
        .into_inner()
        .expect("no poisoned workers")
        .into_iter()
        .map(|r| r.expect("every call answered"))
        .collect()
}

fn outcome_of(result: Result<InvocationResponse, InvokeError>) -> CallOutcome {
    match result {
        Ok(r) => CallOutcome::Response {
            graph: r.graph,
            short_circuited: r.short_circuited,
        },
        Err(e) => CallOutcome::Failed(e.to_string()),
    }
}

fn request_of(call: &Call<'_>) -> InvocationRequest {
    InvocationRequest {
        graph: call.request_graph.to_vec(),
        binding: call.binding.clone(),
    }
}

/// Dispatches calls to each description's HTTP endpoint.
pub struct HttpInvoker {
    agent: ureq::Agent,
}

impl HttpInvoker {
    pub fn new(timeout: Duration) -> Self {
        HttpInvoker { agent: agent(timeout) }
    }
}

impl Default for HttpInvoker {
    fn default() -> Self {
        Self::new(Duration::from_secs(30))
    }
}

impl Invoker for HttpInvoker {
    fn invoke_all(&self, calls: &[Call<'_>], width: usize) -> Vec<CallResult> {
        bounded(calls, width, |call| {
            outcome_of(invoke_with(&self.agent, &call.description.endpoint, &request_of(call)))
        })
    }
}

/// Dispatches calls in-process to registered handlers, through the same
/// wire encoding as HTTP.
pub struct LocalInvoker {
    handlers: std::collections::BTreeMap<String, Arc<ServiceHandler>>,
    base_iri: Iri,
}

impl LocalInvoker {
    pub fn new(base_iri: Iri) -> Self {
        LocalInvoker {
            handlers: Default::default(),
            base_iri,
        }
    }

    pub fn add(&mut self, service_name: impl Into<String>, handler: Arc<ServiceHandler>) {
        self.handlers.insert(service_name.into(), handler);
    }

    pub fn handler(&self, service_name: &str) -> Option<&Arc<ServiceHandler>> {
        self.handlers.get(service_name)
    }
}

impl Invoker for LocalInvoker {
    fn invoke_all(&self, calls: &[Call<'_>], width: usize) -> Vec<CallResult> {
        bounded(calls, width, |call| {
            let Some(handler) = self.handlers.get(&call.description.name) else {
                return CallOutcome::Failed(format!("no handler for `{}`", call.description.name));
            };
            let reply = handle_invoke(call.description, handler, &self.base_iri, &encode_request(&request_of(call)));
            let result = match reply.status {
                200 => decode_graph(&reply.body)
                    .map(|graph| InvocationResponse {
                        graph,
                        short_circuited: reply.short_circuited,
                    })
                    .map_err(|e| InvokeError::Body(e.to_string())),
                422 => Err(InvokeError::Validation(reply.body.trim().to_string())),
                code => Err(InvokeError::Status {
                    code,
                    message: reply.body.trim().to_string(),
                }),
            };
            outcome_of(result)
        })
    }
}

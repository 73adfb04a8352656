//! The batch and live HTTP servers.

use std::collections::BTreeMap;
use std::future::Future;
use std::io;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::Engine;
use serde_json::{json, Value};
use texmath::pipeline::{convert_cancellable, Profile, ProfileError, ProfileOptions, ProfileRegistry, VERSION};
use thiserror::Error;
use tokio::net::TcpListener;

use crate::config::ServiceConfig;
use crate::envelope::{ConvertRequest, ConvertResponse, ResponseStatus, PROTOCOL};
use crate::examples::{load_examples, shipped_examples, Example};
use crate::pool::WorkerPool;
use crate::zipjob::{run_job, JobError};
use crate::ws;

/// Options naming server-side files; clients may not set them.
pub const SERVER_ONLY_OPTIONS: &[&str] = &["preload", "lexicon"];

const B64: base64::engine::GeneralPurpose = base64::engine::general_purpose::STANDARD;

#[derive(Debug, Error)]
pub enum StartError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("examples: {0}")]
    Examples(String),
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: io::Error },
}

pub struct AppState {
    pub config: ServiceConfig,
    pub registry: ProfileRegistry,
    pub pool: WorkerPool,
    pub examples: Vec<Example>,
    started: Instant,
    requests: AtomicU64,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Result<Arc<Self>, StartError> {
        let mut registry = ProfileRegistry::with_builtins();
        if let Some(dir) = &config.profiles {
            registry.load_dir(dir)?;
        }
        let examples = match &config.examples {
            Some(path) => load_examples(path).map_err(StartError::Examples)?,
            None => shipped_examples(),
        };
        let pool = WorkerPool::new(config.workers, config.recycle_after);
        Ok(Arc::new(AppState { config, registry, pool, examples, started: Instant::now(), requests: AtomicU64::new(0) }))
    }

    fn request_id(&self) -> String {
        format!("r-{:08}", self.requests.fetch_add(1, Ordering::Relaxed))
    }

    fn profile(&self, name: &str, options: &ProfileOptions) -> Result<Arc<Profile>, Box<ConvertResponse>> {
        if let Some(key) = options.0.keys().find(|k| SERVER_ONLY_OPTIONS.contains(&k.as_str())) {
            return Err(Box::new(ConvertResponse::error(Value::Null, "invalid-option", format!("option {key:?} cannot be set by clients"))));
        }
        self.registry.load_registered(name, options).map_err(|e| {
            let available = match &e {
                ProfileError::Unknown { available, .. } => available.clone(),
                _ => Vec::new(),
            };
            Box::new(ConvertResponse::error(Value::Null, e.category(), e.to_string()).with_available(available))
        })
    }

    /// Answer one request. A set `cancel` flag yields a `superseded` response.
    pub async fn handle(&self, req: ConvertRequest, cancel: Arc<AtomicBool>) -> (StatusCode, ConvertResponse) {
        let id = req.id.clone();
        let with_id = |mut r: ConvertResponse| {
            r.id = id.clone();
            r
        };
        let default_profile = if req.archive.is_some() { "standard" } else { "math" };
        let profile_name = req.profile.clone().unwrap_or_else(|| default_profile.to_string());
        let profile = match self.profile(&profile_name, &req.options) {
            Ok(p) => p,
            Err(e) => return (StatusCode::UNPROCESSABLE_ENTITY, with_id(*e)),
        };
        let outcome = match (req.source, req.archive) {
            (Some(source), None) => {
                self.pool
                    .run(move || convert_cancellable(&source, "input", &profile, None, &cancel).map(|r| (StatusCode::OK, ConvertResponse::from_result(Value::Null, r))))
                    .await
            }
            (None, Some(archive)) => {
                let Ok(bytes) = B64.decode(archive.trim()) else {
                    return (StatusCode::BAD_REQUEST, with_id(ConvertResponse::error(Value::Null, "malformed-request", "archive is not valid base64")));
                };
                let limits = self.config.zip_limits;
                self.pool
                    .run(move || {
                        if cancel.load(Ordering::SeqCst) {
                            return None;
                        }
                        Some(match run_job(&bytes, &profile, limits) {
                            Ok(out) => {
                                (StatusCode::OK, ConvertResponse::new(Value::Null, out.manifest.status().into(), B64.encode(&out.archive)))
                            }
                            Err(e) => (StatusCode::BAD_REQUEST, job_error(&e)),
                        })
                    })
                    .await
            }
            _ => {
                let msg = "exactly one of source and archive must be present";
                return (StatusCode::BAD_REQUEST, with_id(ConvertResponse::error(Value::Null, "malformed-request", msg)));
            }
        };
        match outcome {
            Ok(Some((code, r))) => (code, with_id(r)),
            Ok(None) => (StatusCode::OK, with_id(ConvertResponse::superseded(Value::Null))),
            Err(e) => {
                let rid = self.request_id();
                let msg = format!("internal error ({e}); request id {rid}");
                (StatusCode::INTERNAL_SERVER_ERROR, with_id(ConvertResponse::error(Value::Null, "internal-error", msg)))
            }
        }
    }

    fn health(&self, role: &str) -> Value {
        let stats = self.pool.stats();
        json!({
            "status": "ok",
            "role": role,
            "version": VERSION,
            "protocol": PROTOCOL,
            "uptime_ms": self.started.elapsed().as_millis() as u64,
            "workers": { "size": stats.size, "spawned": stats.spawned, "completed": stats.completed },
            "profiles": self.registry.names(),
        })
    }
}

fn job_error(e: &JobError) -> ConvertResponse {
    let mut r = ConvertResponse::error(Value::Null, e.category(), e.to_string());
    if let JobError::NoMainFile(candidates) = e {
        r = r.with_available(candidates.clone());
    }
    r
}

/// Decode a JSON or form-encoded request body.
pub fn parse_request(headers: &HeaderMap, body: &[u8]) -> Result<ConvertRequest, String> {
    let content_type = headers.get(header::CONTENT_TYPE).and_then(|v| v.to_str().ok()).unwrap_or("");
    if content_type.starts_with("application/x-www-form-urlencoded") {
        let mut req = ConvertRequest::default();
        for (k, v) in form_urlencoded::parse(body) {
            match k.as_ref() {
                "id" => req.id = Value::String(v.into_owned()),
                "source" | "src" => req.source = Some(v.into_owned()),
                "archive" => req.archive = Some(v.into_owned()),
                "profile" => req.profile = Some(v.into_owned()),
                "supersede-key" => req.supersede_key = Some(v.into_owned()),
                _ => {
                    req.options.set(k.into_owned(), v.into_owned());
                }
            }
        }
        return Ok(req);
    }
    serde_json::from_slice(body).map_err(|e| format!("malformed JSON request: {e}"))
}

async fn convert_http(State(st): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Response {
    let req = match parse_request(&headers, &body) {
        Ok(r) => r,
        Err(msg) => return (StatusCode::BAD_REQUEST, Json(ConvertResponse::error(Value::Null, "malformed-request", msg))).into_response(),
    };
    let (code, resp) = st.handle(req, Arc::new(AtomicBool::new(false))).await;
    (code, Json(resp)).into_response()
}

/// `POST /job`: a raw ZIP body; `profile` and option overrides in the query.
async fn job_http(State(st): State<Arc<AppState>>, Query(mut query): Query<BTreeMap<String, String>>, body: Bytes) -> Response {
    let profile_name = query.remove("profile").unwrap_or_else(|| "standard".into());
    let profile = match st.profile(&profile_name, &ProfileOptions(query)) {
        Ok(p) => p,
        Err(e) => return (StatusCode::UNPROCESSABLE_ENTITY, Json(*e)).into_response(),
    };
    let limits = st.config.zip_limits;
    match st.pool.run(move || run_job(&body, &profile, limits)).await {
        Ok(Ok(out)) => {
            let status = ResponseStatus::from(out.manifest.status());
            let status = serde_json::to_value(status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            let headers = [
                (header::CONTENT_TYPE, "application/zip".to_string()),
                (header::HeaderName::from_static("x-texmath-status"), status),
                (header::HeaderName::from_static("x-texmath-version"), VERSION.to_string()),
            ];
            (StatusCode::OK, headers, out.archive).into_response()
        }
        Ok(Err(e)) => (StatusCode::BAD_REQUEST, Json(job_error(&e))).into_response(),
        Err(e) => {
            let msg = format!("internal error ({e}); request id {}", st.request_id());
            (StatusCode::INTERNAL_SERVER_ERROR, Json(ConvertResponse::error(Value::Null, "internal-error", msg))).into_response()
        }
    }
}

async fn examples(State(st): State<Arc<AppState>>) -> Json<Vec<Example>> {
    Json(st.examples.clone())
}

async fn health_batch(State(st): State<Arc<AppState>>) -> Json<Value> {
    Json(st.health("batch"))
}

async fn health_live(State(st): State<Arc<AppState>>) -> Json<Value> {
    Json(st.health("live"))
}

/// `POST /convert`, `POST /job`, `GET /examples`, `GET /health`.
pub fn batch_router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_body;
    Router::new()
        .route("/convert", post(convert_http))
        .route("/job", post(job_http))
        .route("/examples", get(examples))
        .route("/health", get(health_batch))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

/// `POST /convert`, `GET /examples`, `GET /health` and the `/editor` websocket.
pub fn live_router(state: Arc<AppState>) -> Router {
    let limit = state.config.max_body;
    Router::new()
        .route("/convert", post(convert_http))
        .route("/examples", get(examples))
        .route("/health", get(health_live))
        .route("/editor", get(ws::editor))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Role {
    Batch,
    Live,
    Both,
}

/// Bind the configured addresses for `role` and serve until `shutdown` resolves.
pub async fn serve(state: Arc<AppState>, role: Role, shutdown: impl Future<Output = ()> + Send + 'static) -> Result<(), StartError> {
    let (stop_tx, stop_rx) = tokio::sync::watch::channel(false);
    tokio::spawn(async move {
        shutdown.await;
        let _ = stop_tx.send(true);
    });
    let mut servers = Vec::new();
    let wanted = [(Role::Batch, state.config.batch_addr), (Role::Live, state.config.live_addr)];
    for (which, addr) in wanted {
        if role != Role::Both && role != which {
            continue;
        }
        let listener = TcpListener::bind(addr).await.map_err(|source| StartError::Bind { addr: addr.to_string(), source })?;
        let router = if which == Role::Batch { batch_router(state.clone()) } else { live_router(state.clone()) };
        eprintln!("texmath {} server listening on http://{}", if which == Role::Batch { "batch" } else { "live" }, listener.local_addr().unwrap_or(addr));
        let mut rx = stop_rx.clone();
        servers.push(tokio::spawn(async move {
            axum::serve(listener, router)
                .with_graceful_shutdown(async move {
                    let _ = rx.wait_for(|stop| *stop).await;
                })
                .await
        }));
    }
    for s in servers {
        let _ = s.await;
    }
    Ok(())
}

/// Serve `router` on an ephemeral local port; returns the bound address.
pub async fn spawn_local(router: Router) -> io::Result<std::net::SocketAddr> {
    let listener = TcpListener::bind("127.0.0.1:0").await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move {
        let _ = axum::serve(listener, router).await;
    });
    Ok(addr)
}

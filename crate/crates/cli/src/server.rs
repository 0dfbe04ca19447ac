//! HTTP front end for [`Session`]s.
//!
//! Bodies are JSON in both directions. Errors come back as
//! `{"error": {"code": ..., "message": ..., ...}}` with a status derived from the code.
//! Mutations on one session are serialized by a per-session lock; the work itself runs on the
//! blocking pool so long layout runs do not stall the reactor.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use patrolscope_core::layout::LayoutParams;
use patrolscope_core::session::{
    AgentsRequest, CreateRequest, CreateResponse, CursorRequest, DistributionRequest,
    LayoutStepRequest, ModeRequest, RuleRequest, ThresholdRequest,
};
use patrolscope_core::{Error, Session};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use tower_http::cors::CorsLayer;

pub const DEFAULT_PORT: u16 = 8750;

#[derive(Default)]
pub struct AppState {
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    next_id: AtomicU64,
}

#[derive(Debug)]
pub enum ApiError {
    SessionNotFound(String),
    Core(Error),
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError::Core(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::SessionNotFound(id) => (
                StatusCode::NOT_FOUND,
                json!({
                    "code": "SessionNotFound",
                    "message": format!("no session `{id}`"),
                    "session": id,
                }),
            ),
            ApiError::Core(e) => {
                let status = match &e {
                    Error::UnknownReference { .. } => StatusCode::NOT_FOUND,
                    Error::NotIrreducible { .. } | Error::Unreachable { .. } => StatusCode::CONFLICT,
                    e if e.is_validation() => StatusCode::UNPROCESSABLE_ENTITY,
                    Error::InvalidArgument(_) | Error::CursorOutOfRange { .. } => {
                        StatusCode::BAD_REQUEST
                    }
                    _ => StatusCode::INTERNAL_SERVER_ERROR,
                };
                (status, e.diagnostic())
            }
        };
        (status, Json(json!({ "error": body }))).into_response()
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body)
        .map_err(|e| ApiError::Core(Error::MalformedDocument(e.to_string())))
}

/// Like [`parse`], but an empty body means the default request.
fn parse_or_default<T: DeserializeOwned + Default>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        Ok(T::default())
    } else {
        parse(body)
    }
}

fn session(state: &AppState, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
    state
        .sessions
        .read()
        .expect("session map lock")
        .get(id)
        .cloned()
        .ok_or_else(|| ApiError::SessionNotFound(id.to_owned()))
}

/// Runs `f` on the session under its lock, on the blocking pool.
async fn with_session<T, F>(state: Arc<AppState>, id: String, f: F) -> ApiResult
where
    T: Serialize + Send + 'static,
    F: FnOnce(&mut Session) -> Result<T, Error> + Send + 'static,
{
    let handle = session(&state, &id)?;
    let result = tokio::task::spawn_blocking(move || {
        let mut guard = handle.lock().unwrap_or_else(|p| p.into_inner());
        f(&mut guard)
    })
    .await
    .expect("session task panicked")?;
    Ok(Json(result).into_response())
}

fn seed_or_random(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

async fn create(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let request: CreateRequest = parse(&body)?;
    let layout_seed = seed_or_random(request.layout_seed);
    let created = tokio::task::spawn_blocking(move || {
        let strategy = request.strategy.into_strategy()?;
        let params = LayoutParams {
            seed: layout_seed,
            ..Default::default()
        };
        Session::new(strategy, params)
    })
    .await
    .expect("session task panicked")?;
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed) + 1);
    let response = CreateResponse {
        session: id.clone(),
        revision: created.revision(),
        name: created.strategy().name().to_owned(),
        layout_seed,
        nodes: created.strategy().node_count(),
        locations: created.strategy().locations().len(),
        warnings: created.strategy().warnings(),
    };
    state
        .sessions
        .write()
        .expect("session map lock")
        .insert(id, Arc::new(Mutex::new(created)));
    Ok((StatusCode::CREATED, Json(response)).into_response())
}

async fn close(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    match state.sessions.write().expect("session map lock").remove(&id) {
        Some(_) => Ok(Json(json!({ "session": id, "closed": true })).into_response()),
        None => Err(ApiError::SessionNotFound(id)),
    }
}

async fn graph(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    with_session(state, id, |s| Ok(s.graph())).await
}

async fn threshold(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let r: ThresholdRequest = parse(&body)?;
    with_session(state, id, move |s| s.set_threshold(r.threshold)).await
}

async fn toggle(
    State(state): State<Arc<AppState>>,
    Path((id, location)): Path<(String, String)>,
) -> ApiResult {
    with_session(state, id, move |s| s.toggle_location(&location)).await
}

async fn rule(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let r: RuleRequest = parse(&body)?;
    with_session(state, id, move |s| s.set_rule(r.rule)).await
}

async fn mode(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let r: ModeRequest = parse(&body)?;
    with_session(state, id, move |s| s.set_mode(r.mode)).await
}

async fn distribution(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let r: DistributionRequest = parse(&body)?;
    with_session(state, id, move |s| s.distribution(&r)).await
}

async fn matrix(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    with_session(state, id, |s| Ok(s.matrix())).await
}

async fn agents(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let r: AgentsRequest = parse(&body)?;
    let seed = seed_or_random(r.seed);
    with_session(state, id, move |s| s.spawn_agents(&r.start, r.count, r.horizon, seed)).await
}

async fn occupancy(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    with_session(state, id, |s| s.occupancy()).await
}

async fn cursor(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let r: CursorRequest = parse(&body)?;
    with_session(state, id, move |s| s.set_cursor(r.t)).await
}

async fn layout_step(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult {
    let r: LayoutStepRequest = parse_or_default(&body)?;
    with_session(state, id, move |s| s.step_layout(&r)).await
}

async fn not_found() -> Response {
    (
        StatusCode::NOT_FOUND,
        Json(json!({ "error": { "code": "NotFound", "message": "no such endpoint" } })),
    )
        .into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/session", post(create))
        .route("/session/{id}", axum::routing::delete(close))
        .route("/session/{id}/graph", get(graph))
        .route("/session/{id}/threshold", post(threshold))
        .route("/session/{id}/location/{loc}/toggle", post(toggle))
        .route("/session/{id}/rule", post(rule))
        .route("/session/{id}/mode", post(mode))
        .route("/session/{id}/distribution", post(distribution))
        .route("/session/{id}/matrix", get(matrix))
        .route("/session/{id}/agents", post(agents))
        .route("/session/{id}/agents/occupancy", get(occupancy).post(cursor))
        .route("/session/{id}/layout/step", post(layout_step))
        .fallback(not_found)
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Serves on `127.0.0.1:port` until Ctrl-C.
pub async fn serve(port: u16) -> std::io::Result<()> {
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "{}",
        json!({ "level": "info", "message": "listening", "address": listener.local_addr()?.to_string() })
    );
    axum::serve(listener, router(Arc::new(AppState::default())))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}


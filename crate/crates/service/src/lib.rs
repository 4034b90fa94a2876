//! HTTP API over authoring sessions.
//!
//! A session holds one specification's graph, the Pareto front of its last
//! optimization and an edited copy of the selected member. Edits propagate
//! through the color groups and hierarchy links without re-running the
//! search.

mod error;
mod store;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use mvcolor_core::document::{Assignment, CostSummary};
use mvcolor_core::evaluator::report;
use mvcolor_core::session::WorkingCopy;
use mvcolor_core::spec::GaOverrides;
use mvcolor_core::{build_graph, optimize, Color, GaConfig, MvSpec, PaletteLibrary, ParamsStore, Session, Weights};

pub use error::ApiError;
pub use store::{SessionStore, Slot};

pub const DEFAULT_CAPACITY: usize = 64;
pub const DEFAULT_DEV_ORIGINS: [&str; 2] = ["http://localhost:5173", "http://127.0.0.1:5173"];

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    /// Maximum number of live sessions before the least recently used is dropped.
    pub capacity: usize,
    pub palettes: PaletteLibrary,
    /// Extrema file updated after every optimization; in memory only when unset.
    pub params_path: Option<PathBuf>,
    /// Directory with the UI bundle, served under `/`.
    pub static_dir: Option<PathBuf>,
    pub cors_origins: Vec<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            capacity: DEFAULT_CAPACITY,
            palettes: PaletteLibrary::bundled(),
            params_path: None,
            static_dir: None,
            cors_origins: DEFAULT_DEV_ORIGINS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

struct Inner {
    sessions: SessionStore,
    palettes: Arc<PaletteLibrary>,
    params: Mutex<ParamsStore>,
    params_path: Option<PathBuf>,
    next_id: AtomicU64,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

impl AppState {
    pub fn new(config: &ServiceConfig) -> Result<AppState, mvcolor_core::ParamsError> {
        let params = match &config.params_path {
            Some(path) => ParamsStore::load(path)?,
            None => ParamsStore::new(),
        };
        Ok(AppState(Arc::new(Inner {
            sessions: SessionStore::new(config.capacity),
            palettes: Arc::new(config.palettes.clone()),
            params: Mutex::new(params),
            params_path: config.params_path.clone(),
            next_id: AtomicU64::new(1),
        })))
    }

    pub fn sessions(&self) -> &SessionStore {
        &self.0.sessions
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.0.sessions.get(id).ok_or_else(|| ApiError::not_found("unknown_session", format!("no session {id:?}")))
    }
}

pub fn router(config: &ServiceConfig) -> Result<Router, mvcolor_core::ParamsError> {
    let state = AppState::new(config)?;
    Ok(router_with_state(state, config))
}

pub fn router_with_state(state: AppState, config: &ServiceConfig) -> Router {
    let origins: Vec<HeaderValue> = config.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
    let cors = CorsLayer::new()
        .allow_origin(AllowOrigin::list(origins))
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE]);
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/optimize", post(run_optimize))
        .route("/sessions/{id}/front", get(get_front))
        .route("/sessions/{id}/select", post(select))
        .route("/sessions/{id}/edit", post(edit))
        .route("/sessions/{id}/export", get(export))
        .route("/palettes", get(palettes))
        .with_state(state);
    let app = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.layer(cors)
}

pub async fn serve(config: ServiceConfig, addr: SocketAddr) -> std::io::Result<()> {
    let app = router(&config).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app).await
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let bytes: &[u8] = if body.iter().all(u8::is_ascii_whitespace) { b"{}" } else { body };
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request(e.to_string()))
}

#[derive(Deserialize)]
struct CreateRequest {
    spec: Value,
    #[serde(default)]
    case_id: Option<String>,
}

async fn create_session(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateRequest = parse(&body)?;
    let spec = MvSpec::from_json(&req.spec.to_string())?;
    let graph = Arc::new(build_graph(&spec)?);
    let id = format!("s{}", state.0.next_id.fetch_add(1, Ordering::Relaxed));
    let case_id = req.case_id.unwrap_or_else(|| id.clone());
    let config = spec.ga.as_ref().map_or_else(GaConfig::default, |o| GaConfig::default().with_overrides(o));
    let session = Session::new(Arc::clone(&graph), case_id.clone(), spec.weights(), config, state.0.palettes.len());
    state.0.sessions.insert(id.clone(), Slot::new(session));
    let views: Vec<Value> = (0..graph.view_count())
        .map(|v| json!({ "id": graph.view(v).id, "group": graph.view_group[v], "derived": graph.is_derived(graph.view_group[v]) }))
        .collect();
    let body = json!({ "id": id, "case_id": case_id, "views": views, "groups": graph.groups.len(), "hierarchy_links": graph.hierarchy_links.len() });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptimizeRequest {
    #[serde(default)]
    weights: Option<Weights>,
    #[serde(default)]
    ga: Option<GaOverrides>,
}

async fn run_optimize(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<FrontView>, ApiError> {
    let req: OptimizeRequest = parse(&body)?;
    let slot = state.slot(&id)?;
    let _guard = slot.claim().ok_or_else(ApiError::busy)?;
    let (graph, case_id, weights, config) = {
        let s = slot.session.lock().await;
        let config = req.ga.as_ref().map_or_else(|| s.config.clone(), |o| s.config.clone().with_overrides(o));
        (Arc::clone(&s.graph), s.case_id.clone(), req.weights.unwrap_or(s.weights), config)
    };
    weights.validate().map_err(ApiError::bad_request)?;
    config.validate()?;
    let prior = state.0.params.lock().expect("params poisoned").case(&case_id);
    let palettes = Arc::clone(&state.0.palettes);
    let (g, w, c) = (Arc::clone(&graph), weights, config.clone());
    let result = tokio::task::spawn_blocking(move || optimize(&g, &palettes, &prior, &w, &c))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    {
        let mut params = state.0.params.lock().expect("params poisoned");
        params.merge(&case_id, &result.observed);
        if let Some(path) = &state.0.params_path {
            params.save(path).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "params_write", e.to_string()))?;
        }
    }
    let mut s = slot.session.lock().await;
    s.weights = weights;
    s.config = config;
    s.set_result(result);
    Ok(Json(front_view(&s)))
}

#[derive(Serialize)]
struct MemberView {
    index: usize,
    c_sv: f64,
    c_mv: f64,
    assignment: Assignment,
    eval: mvcolor_core::EvalReport,
}

#[derive(Serialize)]
struct FrontView {
    selected: Option<usize>,
    members: Vec<MemberView>,
}

fn front_view(s: &Session) -> FrontView {
    let members = s
        .front()
        .iter()
        .enumerate()
        .map(|(index, m)| MemberView {
            index,
            c_sv: m.cost.c_sv,
            c_mv: m.cost.c_mv,
            assignment: Assignment::from_views(&s.graph, &m.views),
            eval: report(&m.views, &s.graph),
        })
        .collect();
    FrontView { selected: s.selected(), members }
}

async fn get_front(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<FrontView>, ApiError> {
    let slot = state.slot(&id)?;
    let s = slot.session.lock().await;
    Ok(Json(front_view(&s)))
}

#[derive(Serialize)]
struct WorkingView {
    selected: Option<usize>,
    assignment: Assignment,
    cost: CostSummary,
    eval: mvcolor_core::EvalReport,
}

fn working_view(s: &Session, w: &WorkingCopy) -> WorkingView {
    WorkingView { selected: s.selected(), assignment: Assignment::from_views(&s.graph, &w.views), cost: CostSummary::from(&w.cost), eval: w.eval.clone() }
}

#[derive(Deserialize)]
struct SelectRequest {
    index: usize,
}

async fn select(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<WorkingView>, ApiError> {
    let req: SelectRequest = parse(&body)?;
    let slot = state.slot(&id)?;
    if slot.is_busy() {
        return Err(ApiError::busy());
    }
    let mut s = slot.session.lock().await;
    if !s.select(req.index) {
        return Err(ApiError::not_found("unknown_index", format!("front has no member {}", req.index)));
    }
    let w = s.working().expect("selected");
    Ok(Json(working_view(&s, w)))
}

#[derive(Deserialize)]
struct EditRequest {
    view: String,
    key: String,
    color: String,
}

#[derive(Serialize)]
struct EditView {
    updated_views: Vec<String>,
    gamut_warning: bool,
    floor_violation: bool,
    #[serde(flatten)]
    working: WorkingView,
}

async fn edit(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<EditView>, ApiError> {
    let req: EditRequest = parse(&body)?;
    let color = Color::from_hex(&req.color).map_err(|e| ApiError::bad_request(e.to_string()))?;
    let slot = state.slot(&id)?;
    if slot.is_busy() {
        return Err(ApiError::busy());
    }
    let mut s = slot.session.lock().await;
    let outcome = s.propagate_edit(&req.view, &req.key, color)?;
    let working = working_view(&s, s.working().expect("edited"));
    Ok(Json(EditView { updated_views: outcome.updated_views, gamut_warning: outcome.gamut_warning, floor_violation: outcome.floor_violation, working }))
}

async fn export(State(state): State<AppState>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let slot = state.slot(&id)?;
    let s = slot.session.lock().await;
    if s.front().is_empty() {
        return Err(ApiError::not_found("no_front", "the session has not been optimized yet"));
    }
    Ok(([(header::CONTENT_TYPE, "application/json")], s.export().to_json()).into_response())
}

async fn palettes(State(state): State<AppState>) -> Json<PaletteLibrary> {
    Json((*state.0.palettes).clone())
}

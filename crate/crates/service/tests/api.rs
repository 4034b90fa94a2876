use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use mvcolor_core::evaluator::evaluate_assignment;
use mvcolor_core::{build_graph, Assignment, MvSpec};
use mvcolor_service::{router_with_state, AppState, ServiceConfig};

const PETS: &str = include_str!("../../core/cases/case2_pets.json");

fn app() -> (Router, AppState) {
    let config = ServiceConfig::default();
    let state = AppState::new(&config).unwrap();
    (router_with_state(state.clone(), &config), state)
}

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = send_raw(app, method, uri, body.map(|b| b.to_string())).await;
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn send_raw(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(body.map_or_else(Body::empty, Body::from))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

fn small_ga() -> Value {
    json!({ "ga": { "pop_size": 12, "generations": 5, "n_best": 4, "seed": 7 } })
}

async fn optimized_session(app: &Router) -> String {
    let spec: Value = serde_json::from_str(PETS).unwrap();
    let (status, created) = send(app, "POST", "/sessions", Some(json!({ "spec": spec, "case_id": "pets" }))).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = created["id"].as_str().unwrap().to_string();
    let (status, front) = send(app, "POST", &format!("/sessions/{id}/optimize"), Some(small_ga())).await;
    assert_eq!(status, StatusCode::OK, "{front}");
    id
}

fn color_of(assignment: &Value, view: &str, key: &str) -> String {
    assignment["views"][view]["colors"][key].as_str().unwrap().to_string()
}

#[tokio::test]
async fn create_optimize_front() {
    let (app, _) = app();
    let id = optimized_session(&app).await;
    let (status, front) = send(&app, "GET", &format!("/sessions/{id}/front"), None).await;
    assert_eq!(status, StatusCode::OK);
    let members = front["members"].as_array().unwrap();
    assert!(!members.is_empty());
    assert_eq!(front["selected"], 0);
    assert!(members[0]["eval"]["wcd"].is_number());
}

#[tokio::test]
async fn select_out_of_range_is_404() {
    let (app, _) = app();
    let id = optimized_session(&app).await;
    let (status, body) = send(&app, "POST", &format!("/sessions/{id}/select"), Some(json!({ "index": 999 }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "unknown_index");
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/select"), Some(json!({ "index": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn unknown_session_is_404() {
    let (app, _) = app();
    let (status, body) = send(&app, "GET", "/sessions/nope/front", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "unknown_session");
}

#[tokio::test]
async fn malformed_bodies_are_400() {
    let (app, _) = app();
    let (status, _) = send_raw(&app, "POST", "/sessions", Some("{not json".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send(&app, "POST", "/sessions", Some(json!({ "spec": { "views": [] } }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let id = optimized_session(&app).await;
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/edit"), Some(json!({ "view": "pie", "key": "cat", "color": "red" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn graph_errors_are_422_with_code() {
    let (app, _) = app();
    let view = |id: &str, field: &str, keys: [&str; 2], x: f64| {
        json!({
            "id": id, "bbox": { "x": x, "y": 0, "width": 100, "height": 100 },
            "color_field": field, "field_kind": "categorical", "domain": keys, "colormap_kind": "discrete"
        })
    };
    let spec = json!({
        "canvas": { "width": 600, "height": 200 },
        "views": [view("a", "r", ["x", "y"], 0.0), view("b", "x", ["p", "q"], 200.0), view("c", "p", ["r", "s"], 400.0)],
        "relations": [
            { "a": "a", "b": "b", "kind": "hierarchy", "parent": "x" },
            { "a": "b", "b": "c", "kind": "hierarchy", "parent": "p" },
            { "a": "c", "b": "a", "kind": "hierarchy", "parent": "r" }
        ]
    });
    let (status, body) = send(&app, "POST", "/sessions", Some(json!({ "spec": spec }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    let code = body["error"]["code"].as_str().unwrap();
    assert!(["cyclic_hierarchy", "conflicting_hierarchy", "invalid_relation", "ambiguous_relation"].contains(&code), "{code}");
}

#[tokio::test]
async fn mutations_during_optimize_are_409() {
    let (app, state) = app();
    let id = optimized_session(&app).await;
    let slot = state.sessions().get(&id).unwrap();
    let guard = slot.claim().unwrap();
    let (status, body) = send(&app, "POST", &format!("/sessions/{id}/edit"), Some(json!({ "view": "pie", "key": "cat", "color": "#aa2233" }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "optimize_running");
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/optimize"), Some(small_ga())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/select"), Some(json!({ "index": 0 }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    // reads still work
    let (status, _) = send(&app, "GET", &format!("/sessions/{id}/front"), None).await;
    assert_eq!(status, StatusCode::OK);
    drop(guard);
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/select"), Some(json!({ "index": 0 }))).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn edit_updates_linked_views_and_exports() {
    let (app, _) = app();
    let id = optimized_session(&app).await;
    let (status, edited) = send(&app, "POST", &format!("/sessions/{id}/edit"), Some(json!({ "view": "pie", "key": "dog", "color": "#1f7a3d" }))).await;
    assert_eq!(status, StatusCode::OK, "{edited}");
    let a = &edited["assignment"];
    assert_eq!(color_of(a, "pie", "dog"), "#1f7a3d");
    assert_eq!(color_of(a, "bar", "dog"), "#1f7a3d");
    let updated: Vec<&str> = edited["updated_views"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert!(updated.contains(&"map_dog"));
    assert!(!updated.contains(&"birds"));

    let (status, derived) = send(&app, "POST", &format!("/sessions/{id}/edit"), Some(json!({ "view": "birds", "key": "finch", "color": "#000000" }))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(derived["error"]["code"], "derived_entity");
    let (status, _) = send(&app, "POST", &format!("/sessions/{id}/edit"), Some(json!({ "view": "pie", "key": "fish", "color": "#000000" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, bytes) = send_raw(&app, "GET", &format!("/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    let text = String::from_utf8(bytes).unwrap();
    let exported: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(color_of(&exported["front"][0]["assignment"], "bar", "dog"), "#1f7a3d");
    let g = build_graph(&MvSpec::from_json(PETS).unwrap()).unwrap();
    let assignment = Assignment::from_json(&text).unwrap();
    let report = evaluate_assignment(&assignment, &g).unwrap();
    assert_eq!(serde_json::to_value(&report).unwrap(), exported["front"][0]["eval"]);
}

#[tokio::test]
async fn export_before_optimize_is_404() {
    let (app, _) = app();
    let spec: Value = serde_json::from_str(PETS).unwrap();
    let (_, created) = send(&app, "POST", "/sessions", Some(json!({ "spec": spec }))).await;
    let id = created["id"].as_str().unwrap();
    let (status, body) = send(&app, "GET", &format!("/sessions/{id}/export"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "no_front");
}

#[tokio::test]
async fn palettes_are_listed() {
    let (app, _) = app();
    let (status, body) = send(&app, "GET", "/palettes", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = body.as_array().unwrap();
    assert!(list.len() >= 20);
    assert!(list[0]["colors"][0].as_str().unwrap().starts_with('#'));
}

#[tokio::test]
async fn cors_allows_dev_origin() {
    let (app, _) = app();
    let req = Request::builder().uri("/palettes").header(header::ORIGIN, "http://localhost:5173").body(Body::empty()).unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap(), "http://localhost:5173");
}

#[tokio::test]
async fn least_recently_used_session_is_evicted() {
    let config = ServiceConfig { capacity: 2, ..ServiceConfig::default() };
    let state = AppState::new(&config).unwrap();
    let app = router_with_state(state.clone(), &config);
    let spec: Value = serde_json::from_str(PETS).unwrap();
    let mut ids = Vec::new();
    for _ in 0..2 {
        let (_, created) = send(&app, "POST", "/sessions", Some(json!({ "spec": spec }))).await;
        ids.push(created["id"].as_str().unwrap().to_string());
    }
    // touch the first so the second becomes the eviction candidate
    let (status, _) = send(&app, "GET", &format!("/sessions/{}/front", ids[0]), None).await;
    assert_eq!(status, StatusCode::OK);
    send(&app, "POST", "/sessions", Some(json!({ "spec": spec }))).await;
    assert_eq!(state.sessions().len(), 2);
    assert_eq!(send(&app, "GET", &format!("/sessions/{}/front", ids[1]), None).await.0, StatusCode::NOT_FOUND);
    assert_eq!(send(&app, "GET", &format!("/sessions/{}/front", ids[0]), None).await.0, StatusCode::OK);
}

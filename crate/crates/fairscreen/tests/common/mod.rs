#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use fairscreen::analysis::Workspace;
use fairscreen::docs::{Group, StructuredJsonExtractor};
use fairscreen::service::{router, AppState, ManualClock, ServiceOptions};
use fairscreen::synth::{self, Fixture};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub fn workspace(fixture: &Fixture) -> Workspace {
    let here = Path::new("<synthetic>");
    let group = Group::from_file(&fixture.group, here, &StructuredJsonExtractor).unwrap();
    let tables = fixture.tables.clone().into_tables(here).unwrap();
    Workspace::new(group, tables)
}

pub fn fresh_service(seed: u64) -> (Router, AppState, Arc<ManualClock>, Fixture) {
    let fixture = synth::fixture(seed, 40);
    let clock = Arc::new(ManualClock::new(0));
    let state = AppState::new(workspace(&fixture), ServiceOptions::default(), clock.clone());
    (router(state.clone()), state, clock, fixture)
}

/// A service whose session already holds the fixture log.
pub fn scored_service(seed: u64, dir: &Path) -> (Router, AppState, Fixture) {
    let fixture = synth::fixture(seed, 40);
    fairscreen::eventlog::write_log(&dir.join("session.log"), &fixture.log).unwrap();
    let options = ServiceOptions { data_dir: Some(dir.to_path_buf()), ..ServiceOptions::default() };
    let clock = Arc::new(ManualClock::new(fixture.log.last().unwrap().timestamp));
    let state = AppState::open(workspace(&fixture), options, Some(clock)).unwrap();
    (router(state.clone()), state, fixture)
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => builder.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => builder.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    call(app, Method::GET, uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    call(app, Method::POST, uri, Some(body)).await
}

pub fn kind(body: &Value) -> &str {
    body["error"]["kind"].as_str().unwrap_or("")
}

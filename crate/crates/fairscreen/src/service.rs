//! HTTP service over one screening session.
//!
//! Reads share an `RwLock` over the session; every mutation takes the write
//! side, so appends to the log are serialized. Training runs on the blocking
//! pool with at most one job per section, and `GET /model` reports whether a
//! job is still running.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::Instant;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, FromRequestParts, Path as UrlPath, Request, State};
use axum::http::request::Parts;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fairscreen_core::attributes::AttributeVector;
use fairscreen_core::inconsistency::{
    classify_deviations, find_inversions, flag_time_anomalies, DeviationClass, InversionPair, TimeAnomaly,
};
use fairscreen_core::layout::LayoutError;
use fairscreen_core::prefmodel::{top_attributes, AttributeReport, ModelError};
use fairscreen_core::session::{Origin, Phase, ScoreEvent, Session, SessionError, SessionSnapshot, SubmitPhase};
use fairscreen_core::stats::{box_stats, section_durations, BoxStats};
use fairscreen_core::{derive_attributes, AppId, Application, Score, ScoreSheet, Section};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{self, Workspace};
use crate::config::Config;
use crate::docs::{read_json, Group, ModelDocument, SnapshotDocument, TablesFile, TrainResponse, SNAPSHOT_VERSION};
use crate::error::{Error, ErrorBody, ErrorRecord};
use crate::eventlog::EventLogFile;

pub const API_VERSION: &str = "api-v1";
pub const TOKEN_HEADER: &str = "x-session-token";

/// Source of event timestamps, in milliseconds since the session started.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

/// Wall-clock time elapsed since construction, plus a fixed offset so a
/// restored session continues after its last event.
#[derive(Debug)]
pub struct SystemClock {
    start: Instant,
    offset: u64,
}

impl SystemClock {
    pub fn starting_at(offset: u64) -> Self {
        SystemClock { start: Instant::now(), offset }
    }
}

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        self.offset + self.start.elapsed().as_millis() as u64
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start: u64) -> Self {
        ManualClock(AtomicU64::new(start))
    }

    pub fn advance(&self, millis: u64) {
        self.0.fetch_add(millis, Ordering::SeqCst);
    }

    pub fn set(&self, millis: u64) {
        self.0.store(millis, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceOptions {
    pub tau: f64,
    pub c: f64,
    pub seed: u64,
    pub perplexity: f64,
    pub token: Option<String>,
    /// Where the log, snapshots and models are persisted; in-memory only
    /// when absent.
    pub data_dir: Option<PathBuf>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        let config = Config::default();
        ServiceOptions {
            tau: config.tau,
            c: config.c,
            seed: config.seed,
            perplexity: config.perplexity,
            token: None,
            data_dir: None,
        }
    }
}

impl From<&Config> for ServiceOptions {
    fn from(config: &Config) -> Self {
        ServiceOptions {
            tau: config.tau,
            c: config.c,
            seed: config.seed,
            perplexity: config.perplexity,
            token: config.token.clone(),
            data_dir: Some(config.data_dir.clone()),
        }
    }
}

struct SessionStore {
    session: Session,
    log_file: Option<EventLogFile>,
}

struct Shared {
    ws: Workspace,
    options: ServiceOptions,
    clock: Arc<dyn Clock>,
    store: RwLock<SessionStore>,
    models: RwLock<BTreeMap<Section, ModelDocument>>,
    training: Mutex<BTreeSet<Section>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

/// Clears the in-progress mark of a training job when dropped.
struct TrainingGuard {
    state: AppState,
    section: Section,
}

impl Drop for TrainingGuard {
    fn drop(&mut self) {
        self.state.0.training.lock().expect("training set").remove(&self.section);
    }
}

fn snapshot_path(dir: &Path, phase: SubmitPhase) -> PathBuf {
    dir.join("snapshots").join(format!("phase-{}.json", phase_name(phase)))
}

fn phase_name(phase: SubmitPhase) -> &'static str {
    match phase {
        SubmitPhase::I => "I",
        SubmitPhase::II => "II",
    }
}

impl AppState {
    /// A fresh in-memory session.
    pub fn new(ws: Workspace, options: ServiceOptions, clock: Arc<dyn Clock>) -> Self {
        let session = Session::new(ws.group.ids());
        Self::assemble(ws, options, clock, SessionStore { session, log_file: None })
    }

    /// Opens (or starts) the session stored under `options.data_dir`.
    pub fn open(ws: Workspace, options: ServiceOptions, clock: Option<Arc<dyn Clock>>) -> crate::Result<Self> {
        let dir = options.data_dir.clone().ok_or_else(|| Error::Usage("no data directory".into()))?;
        std::fs::create_dir_all(dir.join("snapshots")).map_err(|e| Error::io(&dir, e))?;
        std::fs::create_dir_all(dir.join("models")).map_err(|e| Error::io(&dir, e))?;
        let (log_file, events) = EventLogFile::open_or_create(&dir.join("session.log"))?;
        let mut snapshots = Vec::new();
        for phase in [SubmitPhase::I, SubmitPhase::II] {
            let path = snapshot_path(&dir, phase);
            if path.exists() {
                snapshots.push(read_json::<SnapshotDocument>(&path)?.snapshot);
            }
        }
        let last = events.last().map_or(0, |e| e.timestamp);
        let session = Session::restore(ws.group.ids(), events, snapshots)?;
        let clock = clock.unwrap_or_else(|| Arc::new(SystemClock::starting_at(last)));
        Ok(Self::assemble(ws, options, clock, SessionStore { session, log_file: Some(log_file) }))
    }

    fn assemble(ws: Workspace, options: ServiceOptions, clock: Arc<dyn Clock>, store: SessionStore) -> Self {
        AppState(Arc::new(Shared {
            ws,
            options,
            clock,
            store: RwLock::new(store),
            models: RwLock::new(BTreeMap::new()),
            training: Mutex::new(BTreeSet::new()),
        }))
    }

    /// Marks a training job for `section` as running. `None` when one is
    /// already in progress.
    fn begin_training(&self, section: Section) -> Option<TrainingGuard> {
        let mut running = self.0.training.lock().expect("training set");
        running.insert(section).then(|| TrainingGuard { state: self.clone(), section })
    }

    /// Holds the training slot for `section` until the returned value is
    /// dropped, as a running job would.
    pub fn hold_training_slot(&self, section: Section) -> Option<impl Drop> {
        self.begin_training(section)
    }

    pub fn log(&self) -> Vec<ScoreEvent> {
        self.0.store.read().expect("store").session.log().to_vec()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/group", get(get_group))
        .route("/applications/{id}", get(get_application))
        .route("/scores", post(post_score))
        .route("/model/train", post(post_train))
        .route("/model", get(get_model))
        .route("/summary", get(get_summary))
        .route("/layout", get(get_layout))
        .route("/stats", get(get_stats))
        .route("/submit", post(post_submit))
        .route("/snapshots/{phase}", get(get_snapshot))
        .route("/log", get(get_log))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    record: ErrorRecord,
}

impl ApiError {
    fn new(status: StatusCode, kind: &str, message: impl ToString) -> Self {
        ApiError {
            status,
            record: ErrorRecord { error: ErrorBody { kind: kind.into(), message: message.to_string() } },
        }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            Error::UnknownApp(_) => StatusCode::NOT_FOUND,
            Error::Session(
                SessionError::SessionClosed | SessionError::WrongPhase { .. } | SessionError::StaleSeq { .. },
            ) => StatusCode::CONFLICT,
            Error::Layout(LayoutError::NoScoredApps) => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError { status, record: e.record() }
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        Error::Model(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.record)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

/// JSON body extractor whose rejections use the service error document.
pub struct ApiJson<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for ApiJson<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(ApiJson(v)),
            Err(JsonRejection::JsonDataError(e)) => {
                Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidBody", e.body_text()))
            }
            Err(e) => Err(ApiError::new(StatusCode::BAD_REQUEST, "MalformedBody", e.body_text())),
        }
    }
}

/// Query-string extractor whose rejections use the service error document.
pub struct ApiQuery<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for ApiQuery<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Query::<T>::from_request_parts(parts, state)
            .await
            .map(|q| ApiQuery(q.0))
            .map_err(|e: QueryRejection| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidQuery", e.body_text()))
    }
}

fn authorize(state: &AppState, headers: &HeaderMap) -> Result<(), ApiError> {
    match &state.0.options.token {
        None => Ok(()),
        Some(expected) => {
            let given = headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok());
            if given == Some(expected.as_str()) {
                Ok(())
            } else {
                Err(ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "missing or wrong session token"))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupEntry {
    pub app_id: AppId,
    pub name: String,
    pub school: String,
    pub major: String,
    pub sheet: ScoreSheet,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupView {
    pub schema_version: String,
    pub group_id: String,
    pub phase: Phase,
    pub applications: Vec<GroupEntry>,
}

async fn get_group(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<GroupView> {
    authorize(&state, &headers)?;
    let store = state.0.store.read().expect("store");
    let board = store.session.board();
    let applications = state
        .0
        .ws
        .group
        .applications
        .iter()
        .map(|a| GroupEntry {
            app_id: a.app_id,
            name: a.name.clone(),
            school: a.basic.school.clone(),
            major: a.basic.major.clone(),
            sheet: board.sheet(a.app_id).cloned().unwrap_or_else(|| ScoreSheet::new(a.app_id)),
        })
        .collect();
    Ok(Json(GroupView {
        schema_version: API_VERSION.into(),
        group_id: state.0.ws.group.group_id.clone(),
        phase: store.session.phase(),
        applications,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApplicationView {
    pub schema_version: String,
    pub application: Application,
    pub attributes: Vec<AttributeVector>,
    pub sheet: ScoreSheet,
    /// Box statistics of the group's assigned scores, per section with at
    /// least one.
    pub score_stats: BTreeMap<Section, BoxStats>,
}

async fn get_application(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<u64>,
) -> ApiResult<ApplicationView> {
    authorize(&state, &headers)?;
    let id = AppId(id);
    let app = state.0.ws.group.get(id).ok_or(Error::UnknownApp(id))?;
    let store = state.0.store.read().expect("store");
    let board = store.session.board();
    let mut score_stats = BTreeMap::new();
    for section in Section::ALL {
        let assigned: Vec<f64> = board.assigned(section).iter().map(|(_, s)| f64::from(s.value())).collect();
        if let Ok(stats) = box_stats(&assigned) {
            score_stats.insert(section, stats);
        }
    }
    Ok(Json(ApplicationView {
        schema_version: API_VERSION.into(),
        application: app.clone(),
        attributes: Section::ALL.iter().map(|s| derive_attributes(app, &state.0.ws.tables, *s)).collect(),
        sheet: board.sheet(id).cloned().unwrap_or_else(|| ScoreSheet::new(id)),
        score_stats,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub app_id: AppId,
    pub section: Section,
    pub score: u8,
    #[serde(default = "manual")]
    pub origin: Origin,
}

fn manual() -> Origin {
    Origin::Manual
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreAck {
    pub seq: u64,
    pub timestamp: u64,
}

async fn post_score(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<ScoreRequest>,
) -> ApiResult<ScoreAck> {
    authorize(&state, &headers)?;
    let score = Score::new(req.score).ok_or_else(|| {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidScore", format!("score {} outside 0..=5", req.score))
    })?;
    if state.0.ws.group.get(req.app_id).is_none() {
        return Err(Error::UnknownApp(req.app_id).into());
    }
    let mut store = state.0.store.write().expect("store");
    let event = store.session.next_event(state.0.clock.now_ms(), req.app_id, req.section, score, req.origin);
    store.session.check(&event).map_err(Error::from)?;
    if let Some(file) = store.log_file.as_mut() {
        file.append(&event)?;
    }
    let seq = store.session.append(event).map_err(Error::from)?;
    Ok(Json(ScoreAck { seq, timestamp: event.timestamp }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRequest {
    #[serde(default)]
    pub session_token: Option<String>,
    pub section: Section,
    pub app_ids: Vec<AppId>,
    #[serde(rename = "C", default)]
    pub c: Option<f64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

async fn post_train(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<TrainRequest>,
) -> ApiResult<TrainResponse> {
    authorize(&state, &headers)?;
    if let (Some(expected), Some(given)) = (&state.0.options.token, &req.session_token) {
        if expected != given {
            return Err(ApiError::new(StatusCode::UNAUTHORIZED, "Unauthorized", "wrong session token"));
        }
    }
    let guard = state.begin_training(req.section).ok_or_else(|| {
        ApiError::new(
            StatusCode::CONFLICT,
            "TrainingInProgress",
            format!("a {} model is already training", req.section),
        )
    })?;
    let board = state.0.store.read().expect("store").session.board().clone();
    let c = req.c.unwrap_or(state.0.options.c);
    let seed = req.seed.unwrap_or(state.0.options.seed);
    let job_state = state.clone();
    let ids = req.app_ids.clone();
    let doc =
        tokio::task::spawn_blocking(move || analysis::train_model(&job_state.0.ws, &board, req.section, &ids, c, seed))
            .await
            .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "TrainingFailed", e))??;
    if let Some(dir) = &state.0.options.data_dir {
        let path = dir.join("models").join(format!("{}.json", doc.version));
        crate::docs::write_json(&doc, Some(&path), false)?;
    }
    let response = TrainResponse {
        model_version: doc.version.clone(),
        section: doc.section,
        report: top_attributes(&doc.to_model()),
        training_ids: doc.training_ids.clone(),
    };
    state.0.models.write().expect("models").insert(doc.section, doc);
    drop(guard);
    Ok(Json(response))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionQuery {
    pub section: Section,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelStatus {
    Training,
    Ready,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelView {
    pub schema_version: String,
    pub status: ModelStatus,
    /// Latest finished model, also while a newer one is training.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDocument>,
}

async fn get_model(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<SectionQuery>,
) -> ApiResult<ModelView> {
    authorize(&state, &headers)?;
    let model = state.0.models.read().expect("models").get(&q.section).cloned();
    let training = state.0.training.lock().expect("training set").contains(&q.section);
    let status = match (training, &model) {
        (true, _) => ModelStatus::Training,
        (false, Some(_)) => ModelStatus::Ready,
        (false, None) => {
            return Err(ApiError::new(StatusCode::NOT_FOUND, "NoModel", format!("no {} model", q.section)))
        }
    };
    Ok(Json(ModelView { schema_version: API_VERSION.into(), status, model }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortKey {
    #[default]
    Id,
    Name,
    Score,
    Mitigate,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SortOrder {
    #[default]
    Asc,
    Desc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SummaryQuery {
    pub section: Section,
    pub tau: Option<f64>,
    #[serde(default)]
    pub sort: SortKey,
    #[serde(default)]
    pub order: SortOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub app_id: AppId,
    pub name: String,
    /// Seconds spent per section.
    pub durations: BTreeMap<Section, f64>,
    pub total_seconds: f64,
    pub scores: BTreeMap<Section, Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mitigate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryResponse {
    pub schema_version: String,
    pub section: Section,
    pub tau: f64,
    pub phase: Phase,
    pub rows: Vec<SummaryRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_version: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub training_ids: Option<Vec<AppId>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribute_report: Option<AttributeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviations: Option<Vec<DeviationClass>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inversions: Option<Vec<InversionPair>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_anomalies: Option<Vec<TimeAnomaly>>,
    pub layout: String,
}

async fn get_summary(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<SummaryQuery>,
) -> ApiResult<SummaryResponse> {
    authorize(&state, &headers)?;
    let tau = q.tau.unwrap_or(state.0.options.tau);
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "InvalidQuery", "tau must be nonnegative"));
    }
    let (board, log, phase) = {
        let store = state.0.store.read().expect("store");
        (store.session.board().clone(), store.session.log().to_vec(), store.session.phase())
    };
    let model = state.0.models.read().expect("models").get(&q.section).cloned();
    if q.sort == SortKey::Mitigate && model.is_none() {
        return Err(ApiError::new(StatusCode::CONFLICT, "NoModel", format!("no {} model to sort by", q.section)));
    }
    let ws = &state.0.ws;
    let durations = section_durations(&log);
    let mut by_app: BTreeMap<AppId, BTreeMap<Section, f64>> = BTreeMap::new();
    for d in &durations {
        by_app.entry(d.app_id).or_default().insert(d.section, d.seconds);
    }
    let predictions = model.as_ref().map(|m| analysis::predictions(ws, &board, m)).transpose()?;
    let mut rows: Vec<SummaryRow> = ws
        .group
        .applications
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let durations = by_app.remove(&a.app_id).unwrap_or_default();
            SummaryRow {
                app_id: a.app_id,
                name: a.name.clone(),
                total_seconds: durations.values().sum(),
                durations,
                scores: Section::ALL.iter().map(|s| (*s, board.score(a.app_id, *s))).collect(),
                mitigate: predictions.as_ref().map(|p| p.predictions[k].s_prime),
            }
        })
        .collect();
    let key = |r: &SummaryRow| -> f64 {
        match q.sort {
            SortKey::Score => f64::from(r.scores[&q.section].value()),
            SortKey::Mitigate => r.mitigate.unwrap_or(0.0),
            SortKey::Time => r.total_seconds,
            SortKey::Id | SortKey::Name => 0.0,
        }
    };
    rows.sort_by(|a, b| {
        let primary = match q.sort {
            SortKey::Name => a.name.cmp(&b.name),
            _ => key(a).total_cmp(&key(b)),
        };
        let primary = if q.order == SortOrder::Desc { primary.reverse() } else { primary };
        primary.then(a.app_id.cmp(&b.app_id))
    });

    let mine: Vec<_> = durations.iter().filter(|d| d.section == q.section).cloned().collect();
    let time_anomalies = flag_time_anomalies(&mine).ok();
    let mut response = SummaryResponse {
        schema_version: API_VERSION.into(),
        section: q.section,
        tau,
        phase,
        rows,
        model_version: None,
        training_ids: None,
        attribute_report: None,
        deviations: None,
        inversions: None,
        time_anomalies,
        layout: format!("/layout?section={}", q.section),
    };
    if let (Some(model), Some(preds)) = (model, predictions) {
        let ids: Vec<AppId> = preds.predictions.iter().map(|p| p.app_id).collect();
        let human: Vec<f64> = preds.predictions.iter().map(|p| f64::from(p.human.value())).collect();
        let mitigate: Vec<f64> = preds.predictions.iter().map(|p| p.s_prime).collect();
        response.deviations = Some(classify_deviations(q.section, &ids, &human, &mitigate, tau).map_err(Error::from)?);
        response.inversions = Some(find_inversions(&ids, &human, &mitigate).map_err(Error::from)?);
        response.attribute_report = Some(top_attributes(&model.to_model()));
        response.training_ids = Some(model.training_ids.clone());
        response.model_version = Some(model.version);
    }
    Ok(Json(response))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutQuery {
    pub section: Section,
    pub seed: Option<u64>,
    pub perplexity: Option<f64>,
}

async fn get_layout(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<LayoutQuery>,
) -> Result<Response, ApiError> {
    authorize(&state, &headers)?;
    let board = state.0.store.read().expect("store").session.board().clone();
    let mut config = fairscreen_core::layout::EmbeddingConfig {
        perplexity: q.perplexity.unwrap_or(state.0.options.perplexity),
        seed: q.seed.unwrap_or(state.0.options.seed),
        ..Default::default()
    };
    if !(config.perplexity.is_finite() && config.perplexity > 0.0) {
        config.perplexity = state.0.options.perplexity;
    }
    let job = state.clone();
    let doc = tokio::task::spawn_blocking(move || analysis::layout(&job.0.ws, &board, q.section, &config))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "LayoutFailed", e))??;
    Ok(Json(doc).into_response())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsQuery {
    pub selected: Option<u64>,
}

async fn get_stats(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiQuery(q): ApiQuery<StatsQuery>,
) -> Result<Response, ApiError> {
    authorize(&state, &headers)?;
    let doc = analysis::stats(&state.0.ws, q.selected.map(AppId))?;
    Ok(Json(doc).into_response())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmitRequest {
    pub phase: SubmitPhase,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitAck {
    pub snapshot_id: String,
    pub phase: SubmitPhase,
    pub last_seq: u64,
    pub submitted_at: u64,
}

async fn post_submit(
    State(state): State<AppState>,
    headers: HeaderMap,
    ApiJson(req): ApiJson<SubmitRequest>,
) -> ApiResult<SubmitAck> {
    authorize(&state, &headers)?;
    let model_version = {
        let models = state.0.models.read().expect("models");
        (!models.is_empty()).then(|| models.values().map(|m| m.version.as_str()).collect::<Vec<_>>().join(","))
    };
    let mut store = state.0.store.write().expect("store");
    let snapshot =
        store.session.prepare_submit(req.phase, state.0.clock.now_ms(), model_version).map_err(Error::from)?;
    if let Some(dir) = &state.0.options.data_dir {
        let doc = SnapshotDocument { schema_version: SNAPSHOT_VERSION.into(), snapshot: snapshot.clone() };
        crate::docs::write_json(&doc, Some(&snapshot_path(dir, req.phase)), false)?;
    }
    let snapshot =
        store.session.submit(req.phase, snapshot.submitted_at, snapshot.model_version).map_err(Error::from)?;
    Ok(Json(SubmitAck {
        snapshot_id: format!("phase-{}", phase_name(req.phase)),
        phase: snapshot.phase,
        last_seq: snapshot.last_seq,
        submitted_at: snapshot.submitted_at,
    }))
}

async fn get_snapshot(
    State(state): State<AppState>,
    headers: HeaderMap,
    UrlPath(id): UrlPath<String>,
) -> ApiResult<SessionSnapshot> {
    authorize(&state, &headers)?;
    let phase = match id.as_str() {
        "phase-I" | "I" => SubmitPhase::I,
        "phase-II" | "II" => SubmitPhase::II,
        _ => return Err(ApiError::new(StatusCode::NOT_FOUND, "UnknownSnapshot", format!("no snapshot `{id}`"))),
    };
    let store = state.0.store.read().expect("store");
    store
        .session
        .snapshots()
        .iter()
        .find(|s| s.phase == phase)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownSnapshot", format!("phase {id} not submitted")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogView {
    pub schema_version: String,
    pub events: Vec<ScoreEvent>,
}

async fn get_log(State(state): State<AppState>, headers: HeaderMap) -> ApiResult<LogView> {
    authorize(&state, &headers)?;
    Ok(Json(LogView { schema_version: API_VERSION.into(), events: state.log() }))
}

/// Loads the configured group and session and serves until interrupted.
pub async fn serve(config: Config) -> anyhow::Result<()> {
    let group = Group::load(&config.resolve(&config.group))?;
    let tables = TablesFile::load(&config.resolve(&config.tables))?;
    let state = AppState::open(Workspace::new(group, tables), ServiceOptions::from(&config), None)?;
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await?;
    Ok(())
}

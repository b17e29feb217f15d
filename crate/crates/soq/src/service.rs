//! HTTP service under `/api/v1`.
//!
//! One writer task owns the [`SoQState`]; handlers send it commands and await
//! the reply. After every successful mutation the writer publishes an
//! immutable snapshot (read by the GET handlers) and a sequence-numbered
//! event (streamed by `GET /events`).

use std::convert::Infallible;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{SecondsFormat, Utc};
use futures::{Stream, StreamExt};
use serde::{Deserialize, Serialize};
use soq_core::pipeline::{ClusterQualityMetrics, SoQState, StageRecord, UpdateEvent};
use soq_core::types::QualityClass;
use soq_core::Error;
use tokio::sync::{broadcast, mpsc, oneshot, watch};
use tokio_stream::wrappers::BroadcastStream;

use crate::error::{ErrorBody, SoqError};

/// What readers see: the state plus service-only wall-clock stamps of the
/// update events, index-aligned with `state.events()`.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub state: SoQState,
    pub wall_times: Vec<String>,
}

impl Snapshot {
    fn stamped(&self, i: usize, event: &UpdateEvent) -> UpdateEvent {
        UpdateEvent {
            wall_time: self.wall_times.get(i).cloned(),
            ..event.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceEvent {
    pub seq: u64,
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestResponse {
    pub stage: usize,
    pub accepted: usize,
    pub total_records: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordsBody {
    pub records: Vec<StageRecord>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinalRunBody {
    /// Defaults to the records of the last ingested stage.
    #[serde(default)]
    pub records: Option<Vec<StageRecord>>,
    #[serde(default)]
    pub min_cluster: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelBody {
    pub candidate: usize,
    pub label: QualityClass,
}

type Reply<T> = oneshot::Sender<Result<T, Error>>;

enum Command {
    Ingest(usize, Vec<StageRecord>, Reply<IngestResponse>),
    Analyze(usize, Reply<ClusterQualityMetrics>),
    FinalRun(FinalRunBody, Reply<serde_json::Value>),
    Label(LabelBody, Reply<UpdateEvent>),
}

#[derive(Clone)]
pub struct AppState {
    commands: mpsc::Sender<Command>,
    snapshot: watch::Receiver<Arc<Snapshot>>,
    events: broadcast::Sender<ServiceEvent>,
}

struct Writer {
    snapshot: Snapshot,
    seq: u64,
    publish: watch::Sender<Arc<Snapshot>>,
    events: broadcast::Sender<ServiceEvent>,
}

impl Writer {
    fn commit(&mut self, kind: &str, stage: Option<usize>) {
        self.seq += 1;
        self.publish.send_replace(Arc::new(self.snapshot.clone()));
        // no subscribers is fine
        let _ = self.events.send(ServiceEvent {
            seq: self.seq,
            kind: kind.to_string(),
            stage,
        });
    }

    fn handle(&mut self, command: Command) {
        let state = &mut self.snapshot.state;
        match command {
            Command::Ingest(stage, records, reply) => {
                let result = state.ingest_stage(stage, &records).map(|()| IngestResponse {
                    stage,
                    accepted: records.len(),
                    total_records: state.records().len(),
                });
                if result.is_ok() {
                    self.commit("records_ingested", Some(stage));
                }
                let _ = reply.send(result);
            }
            Command::Analyze(stage, reply) => {
                let params = state.config().mapper;
                let result = state.analyze_stage(stage, &params).map(|a| a.metrics.clone());
                if result.is_ok() {
                    self.commit("stage_analyzed", Some(stage));
                }
                let _ = reply.send(result);
            }
            Command::FinalRun(body, reply) => {
                let batch = body.records.unwrap_or_else(|| {
                    let last = state.last_stage();
                    state.records().iter().filter(|r| r.stage == last).cloned().collect()
                });
                let min_cluster = body.min_cluster.unwrap_or(state.config().min_cluster);
                let result = state.run_final_stage(&batch, min_cluster);
                let stage = result.as_ref().ok().map(|r| r.stage);
                let result = result.map(|r| serde_json::to_value(r).expect("report serializes"));
                if result.is_ok() {
                    self.commit("final_run", stage);
                }
                let _ = reply.send(result);
            }
            Command::Label(body, reply) => {
                let result = state.apply_label_update(body.candidate, body.label).cloned();
                if let Ok(event) = &result {
                    let stamp = Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true);
                    self.snapshot.wall_times.push(stamp.clone());
                    let stage = event.stage;
                    self.commit("label_applied", Some(stage));
                }
                let result = result.map(|e| UpdateEvent {
                    wall_time: self.snapshot.wall_times.last().cloned(),
                    ..e
                });
                let _ = reply.send(result);
            }
        }
    }
}

/// Builds the router and spawns the writer task. Must run inside a Tokio runtime.
pub fn router(initial: SoQState) -> Router {
    let snapshot = Snapshot {
        state: initial,
        wall_times: Vec::new(),
    };
    let (publish, watch_rx) = watch::channel(Arc::new(snapshot.clone()));
    let (events, _) = broadcast::channel(1024);
    let (commands, mut rx) = mpsc::channel::<Command>(64);
    let mut writer = Writer {
        snapshot,
        seq: 0,
        publish,
        events: events.clone(),
    };
    tokio::spawn(async move {
        while let Some(command) = rx.recv().await {
            writer.handle(command);
        }
    });
    let app = AppState {
        commands,
        snapshot: watch_rx,
        events,
    };
    Router::new()
        .route("/api/v1/stages/{stage}/records", post(post_records))
        .route("/api/v1/stages/{stage}/analyze", post(post_analyze))
        .route("/api/v1/graph/{stage}", get(get_graph))
        .route("/api/v1/metrics/{stage}", get(get_metrics))
        .route("/api/v1/final/run", post(post_final_run))
        .route("/api/v1/novelty", get(get_novelty))
        .route("/api/v1/labels", post(post_labels))
        .route("/api/v1/report", get(get_report))
        .route("/api/v1/events", get(get_events))
        .with_state(app)
}

pub struct ApiError(pub Error);

pub fn status_for(e: &Error) -> StatusCode {
    match e {
        Error::UnknownCandidate(_) | Error::UnknownStage(_) | Error::NoPendingReport => StatusCode::NOT_FOUND,
        Error::EmptyHistory
        | Error::StageGap { .. }
        | Error::UnanalyzedPredecessor(_)
        | Error::StageAlreadyAnalyzed(_)
        | Error::UncalibratedReps
        | Error::EmptyModel
        | Error::DuplicateId(_) => StatusCode::CONFLICT,
        e if e.is_input_error() => StatusCode::BAD_REQUEST,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            code: self.0.code().to_string(),
            message: self.0.to_string(),
        };
        (status_for(&self.0), Json(body)).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse_body<T: serde::de::DeserializeOwned>(bytes: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(|e| {
        ApiError(Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    })
}

fn parse_stage(raw: &str) -> Result<usize, ApiError> {
    raw.parse().map_err(|_| {
        ApiError(Error::Parse {
            line: 0,
            message: format!("invalid stage `{raw}`"),
        })
    })
}

async fn send<T>(app: &AppState, make: impl FnOnce(Reply<T>) -> Command) -> Result<T, ApiError> {
    let (tx, rx) = oneshot::channel();
    app.commands.send(make(tx)).await.expect("writer task is alive");
    Ok(rx.await.expect("writer task replies")?)
}

fn snapshot(app: &AppState) -> Arc<Snapshot> {
    app.snapshot.borrow().clone()
}

async fn post_records(State(app): State<AppState>, Path(stage): Path<String>, body: Bytes) -> ApiResult<IngestResponse> {
    let stage = parse_stage(&stage)?;
    let body: RecordsBody = parse_body(&body)?;
    Ok(Json(send(&app, |r| Command::Ingest(stage, body.records, r)).await?))
}

async fn post_analyze(State(app): State<AppState>, Path(stage): Path<String>) -> ApiResult<ClusterQualityMetrics> {
    let stage = parse_stage(&stage)?;
    Ok(Json(send(&app, |r| Command::Analyze(stage, r)).await?))
}

async fn get_graph(State(app): State<AppState>, Path(stage): Path<String>) -> Response {
    let stage = match parse_stage(&stage) {
        Ok(s) => s,
        Err(e) => return e.into_response(),
    };
    let snap = snapshot(&app);
    match snap.state.analysis(stage) {
        Some(a) => Json(&a.graph).into_response(),
        None => ApiError(Error::UnknownStage(stage)).into_response(),
    }
}

async fn get_metrics(State(app): State<AppState>, Path(stage): Path<String>) -> ApiResult<ClusterQualityMetrics> {
    let stage = parse_stage(&stage)?;
    let snap = snapshot(&app);
    let a = snap.state.analysis(stage).ok_or(Error::UnknownStage(stage))?;
    Ok(Json(a.metrics.clone()))
}

async fn post_final_run(State(app): State<AppState>, body: Bytes) -> ApiResult<serde_json::Value> {
    let body: FinalRunBody = if body.iter().all(u8::is_ascii_whitespace) {
        FinalRunBody::default()
    } else {
        parse_body(&body)?
    };
    Ok(Json(send(&app, |r| Command::FinalRun(body, r)).await?))
}

async fn get_novelty(State(app): State<AppState>) -> Response {
    let snap = snapshot(&app);
    match snap.state.pending() {
        Some(report) => Json(report).into_response(),
        None => ApiError(Error::NoPendingReport).into_response(),
    }
}

async fn post_labels(State(app): State<AppState>, body: Bytes) -> ApiResult<UpdateEvent> {
    let body: LabelBody = parse_body(&body)?;
    Ok(Json(send(&app, |r| Command::Label(body, r)).await?))
}

async fn get_report(State(app): State<AppState>) -> Response {
    let snap = snapshot(&app);
    match snap.state.soq_report() {
        Ok(mut report) => {
            for (i, e) in report.update_events.iter_mut().enumerate() {
                *e = snap.stamped(i, e);
            }
            Json(report).into_response()
        }
        Err(e) => ApiError(e).into_response(),
    }
}

async fn get_events(State(app): State<AppState>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let stream = BroadcastStream::new(app.events.subscribe()).filter_map(|item| async move {
        // a lagging subscriber skips ahead; the gap in `seq` tells it to refetch
        let event = item.ok()?;
        Some(Ok(Event::default()
            .id(event.seq.to_string())
            .event(event.kind.clone())
            .json_data(&event)
            .expect("event serializes")))
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

/// Binds `127.0.0.1:port` and serves until Ctrl-C.
pub async fn serve(initial: SoQState, port: u16) -> Result<(), SoqError> {
    let addr = format!("127.0.0.1:{port}");
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| SoqError::Bind { addr: addr.clone(), source })?;
    eprintln!("listening on http://{addr}/api/v1");
    axum::serve(listener, router(initial))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| SoqError::Bind { addr, source })
}

//! HTTP bridge for a browser console. Requests go through the same command
//! queue as the terminal.
//!
//! | route | |
//! |---|---|
//! | `GET /facts` | the fact ledger |
//! | `GET /vars?name=v` | `print v` |
//! | `POST /command` `{"line": "..."}` | any direction command |
//! | `GET /trace?var=v` | `trace print v` |
//! | `GET /events` | server-sent break, fact and connection events |

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::mpsc::RecvTimeoutError;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::Stream;
use phd_core::direction::DirectorFact;
use phd_core::director::{DirectorHandle, Outcome, ServiceError, ServiceEvent};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::mpsc;

pub struct ApiError(ServiceError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            ServiceError::BadCommand(_) => StatusCode::BAD_REQUEST,
            ServiceError::Controller(_) => StatusCode::BAD_GATEWAY,
            ServiceError::Stopped => StatusCode::SERVICE_UNAVAILABLE,
        };
        (status, Json(json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

fn fact_json(f: &DirectorFact) -> Value {
    json!({ "tag": f.tag.as_str(), "subject": f.subject, "bit": u8::from(f.bit) })
}

fn outcome_json(o: &Outcome) -> Value {
    match o {
        Outcome::Done => Value::Null,
        Outcome::Value(n) => json!(n),
        Outcome::Values(ns) => json!(ns),
    }
}

pub fn event_json(e: &ServiceEvent) -> (&'static str, Value) {
    match e {
        ServiceEvent::Break { code, text } => ("break", json!({ "code": code, "text": text })),
        ServiceEvent::ProcedureError(c) => (
            "procedure-error",
            json!({ "code": c.as_u16(), "text": c.describe() }),
        ),
        ServiceEvent::Facts(fs) => ("facts", Value::Array(fs.iter().map(fact_json).collect())),
        ServiceEvent::Closed => ("closed", Value::Null),
    }
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ServiceError> + Send + 'static,
) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or(Err(ServiceError::Stopped))
        .map_err(ApiError)
}

async fn facts(State(h): State<DirectorHandle>) -> ApiResult {
    let fs = blocking(move || h.facts()).await?;
    Ok(Json(Value::Array(fs.iter().map(fact_json).collect())))
}

#[derive(Deserialize)]
struct VarQuery {
    name: String,
}

async fn vars(State(h): State<DirectorHandle>, Query(q): Query<VarQuery>) -> ApiResult {
    let line = format!("print {}", q.name);
    let o = blocking(move || h.issue(&line)).await?;
    Ok(Json(json!({ "name": q.name, "value": outcome_json(&o) })))
}

#[derive(Deserialize)]
struct TraceQuery {
    var: String,
}

async fn trace(State(h): State<DirectorHandle>, Query(q): Query<TraceQuery>) -> ApiResult {
    let line = format!("trace print {}", q.var);
    let o = blocking(move || h.issue(&line)).await?;
    Ok(Json(json!({ "var": q.var, "values": outcome_json(&o) })))
}

#[derive(Deserialize)]
struct CommandBody {
    line: String,
}

async fn command(State(h): State<DirectorHandle>, Json(body): Json<CommandBody>) -> ApiResult {
    let o = blocking(move || h.issue(&body.line)).await?;
    Ok(Json(
        json!({ "output": o.to_string(), "value": outcome_json(&o) }),
    ))
}

async fn events(
    State(h): State<DirectorHandle>,
) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let (tx, rx) = mpsc::unbounded_channel();
    let sub = h.subscribe();
    std::thread::spawn(move || loop {
        match sub.recv_timeout(Duration::from_secs(1)) {
            Ok(e) => {
                if tx.send(e).is_err() {
                    return;
                }
            }
            Err(RecvTimeoutError::Timeout) if tx.is_closed() => return,
            Err(RecvTimeoutError::Timeout) => {}
            Err(RecvTimeoutError::Disconnected) => return,
        }
    });
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        let e = rx.recv().await?;
        let (name, data) = event_json(&e);
        Some((Ok(Event::default().event(name).data(data.to_string())), rx))
    });
    Sse::new(stream).keep_alive(KeepAlive::default())
}

pub fn router(handle: DirectorHandle) -> Router {
    Router::new()
        .route("/facts", get(facts))
        .route("/vars", get(vars))
        .route("/trace", get(trace))
        .route("/command", post(command))
        .route("/events", get(events))
        .with_state(handle)
}

/// Serves the bridge on its own thread. Returns the bound address.
pub fn spawn(
    addr: &str,
    handle: DirectorHandle,
) -> std::io::Result<(SocketAddr, std::thread::JoinHandle<()>)> {
    let listener = std::net::TcpListener::bind(addr)?;
    listener.set_nonblocking(true)?;
    let local = listener.local_addr()?;
    let rt = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(2)
        .enable_all()
        .build()?;
    let t = std::thread::Builder::new()
        .name("phd-bridge".into())
        .spawn(move || {
            rt.block_on(async move {
                let listener = match tokio::net::TcpListener::from_std(listener) {
                    Ok(l) => l,
                    Err(e) => return log::error!("bridge listener: {e}"),
                };
                if let Err(e) = axum::serve(listener, router(handle)).await {
                    log::error!("bridge stopped: {e}");
                }
            })
        })?;
    Ok((local, t))
}

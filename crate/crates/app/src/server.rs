//! JSON API over a solved run.
//!
//! Every response carries the current `revision`, which increases by one
//! each time the box changes. Mutating requests may send the revision they
//! were based on; a stale one is refused with 409, as is any mutation while
//! another is running.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use solspace::boxsolver::SolveError;
use solspace::run::{BoxRecord, RunDir};
use solspace::sections::{SectionError, DEFAULT_SECTION_SAMPLES};
use solspace::{make_section, BaselineResult, Problem, SolverParams, SolverTrace, Span};

use crate::session::{self, Session, SessionError};

/// Largest `n` accepted by `/api/section`.
pub const MAX_SECTION_SAMPLES: usize = 20_000;

const INDEX: &str = r#"<!doctype html>
<html><head><meta charset="utf-8"><title>solspace</title></head>
<body>
<h1>solspace</h1>
<p>JSON endpoints:</p>
<ul>
<li>GET /api/problem</li>
<li>GET /api/baseline</li>
<li>GET /api/box</li>
<li>GET /api/trace</li>
<li>GET /api/section?i=0&amp;j=1&amp;n=1000&amp;span=design_space</li>
<li>POST /api/tradeoff {"dv", "lower", "upper", "revision"?}</li>
<li>POST /api/solve {"seed"?, "revision"?}</li>
</ul>
</body></html>
"#;

#[derive(Debug)]
struct Current {
    baseline: BaselineResult,
    box_record: BoxRecord,
    trace: SolverTrace,
    revision: u64,
}

pub struct AppState {
    problem: Problem,
    dir: Option<RunDir>,
    current: RwLock<Current>,
    busy: AtomicBool,
}

impl AppState {
    /// `dir`, when given, receives every new box and trace.
    pub fn new(session: Session, dir: Option<RunDir>) -> Self {
        Self {
            problem: session.problem,
            dir,
            current: RwLock::new(Current {
                baseline: session.baseline,
                box_record: session.box_record,
                trace: session.trace,
                revision: 0,
            }),
            busy: AtomicBool::new(false),
        }
    }

    pub fn revision(&self) -> u64 {
        self.current.read().expect("state lock").revision
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            code: "bad_request",
            message: message.into(),
        }
    }

    fn conflict(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::CONFLICT,
            code: "conflict",
            message: message.into(),
        }
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            code: "unprocessable",
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "internal",
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"code": self.code, "message": self.message}))).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        match &e {
            SessionError::Solve(SolveError::NotNested { .. } | SolveError::NoGoodSample(_)) => {
                Self::unprocessable(e.to_string())
            }
            SessionError::Solve(SolveError::UnknownVariable(_) | SolveError::InvalidParams(_)) => {
                Self::bad_request(e.to_string())
            }
            SessionError::Solve(SolveError::InfeasibleSeed { .. }) => Self::unprocessable(e.to_string()),
            SessionError::Section(SectionError::BadDims { .. }) => Self::bad_request(e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}

type Shared = Arc<AppState>;
type ApiResult = Result<Json<Value>, ApiError>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/", get(|| async { Html(INDEX) }))
        .route("/api/problem", get(get_problem))
        .route("/api/baseline", get(get_baseline))
        .route("/api/box", get(get_box))
        .route("/api/trace", get(get_trace))
        .route("/api/section", get(get_section))
        .route("/api/tradeoff", post(post_tradeoff))
        .route("/api/solve", post(post_solve))
        .with_state(state)
}

pub async fn serve(addr: &str, session: Session, dir: RunDir) -> std::io::Result<()> {
    let state = Arc::new(AppState::new(session, Some(dir)));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    println!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("API payloads serialize")
}

async fn get_problem(State(st): State<Shared>) -> ApiResult {
    Ok(Json(json!({
        "revision": st.revision(),
        "problem": to_value(st.problem.file()),
        "requirements": to_value(&st.problem.requirements()),
        "qois": st.problem.qoi_names(),
    })))
}

async fn get_baseline(State(st): State<Shared>) -> ApiResult {
    let cur = st.current.read().expect("state lock");
    Ok(Json(json!({"revision": cur.revision, "baseline": to_value(&cur.baseline)})))
}

fn box_payload(st: &AppState, cur: &Current) -> Value {
    let status = if st.busy.load(Ordering::SeqCst) { "solving" } else { "ready" };
    json!({
        "revision": cur.revision,
        "status": status,
        "box": to_value(&cur.box_record),
        "variables": st.problem.variables().iter().map(|v| v.name.clone()).collect::<Vec<_>>(),
    })
}

async fn get_box(State(st): State<Shared>) -> ApiResult {
    let cur = st.current.read().expect("state lock");
    Ok(Json(box_payload(&st, &cur)))
}

async fn get_trace(State(st): State<Shared>) -> ApiResult {
    let cur = st.current.read().expect("state lock");
    Ok(Json(json!({"revision": cur.revision, "trace": to_value(&cur.trace)})))
}

fn query_num<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<Option<T>, ApiError> {
    q.get(key)
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| ApiError::bad_request(format!("query parameter {key}={s:?} is malformed")))
        })
        .transpose()
}

async fn get_section(State(st): State<Shared>, Query(q): Query<HashMap<String, String>>) -> ApiResult {
    let i: usize = query_num(&q, "i")?.ok_or_else(|| ApiError::bad_request("missing query parameter i"))?;
    let j: usize = query_num(&q, "j")?.ok_or_else(|| ApiError::bad_request("missing query parameter j"))?;
    let n: usize = query_num(&q, "n")?.unwrap_or(DEFAULT_SECTION_SAMPLES);
    let seed: u64 = query_num(&q, "seed")?.unwrap_or(0);
    if n > MAX_SECTION_SAMPLES {
        return Err(ApiError::bad_request(format!("n must not exceed {MAX_SECTION_SAMPLES}")));
    }
    let span = match q.get("span").map(String::as_str) {
        None | Some("design_space") => Span::DesignSpace,
        Some("box") => Span::Box,
        Some(other) => return Err(ApiError::bad_request(format!("unknown span {other:?}"))),
    };
    let (b, revision) = {
        let cur = st.current.read().expect("state lock");
        (cur.box_record.design_box(), cur.revision)
    };
    let problem = st.problem.clone();
    let section = tokio::task::spawn_blocking(move || make_section(&problem, &b, (i, j), n, seed, span))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(SessionError::from)?;
    Ok(Json(json!({"revision": revision, "section": to_value(&section)})))
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("malformed request body: {e}")))
}

/// Holds the busy flag for one mutation.
struct BusyGuard<'a>(&'a AtomicBool);

impl Drop for BusyGuard<'_> {
    fn drop(&mut self) {
        self.0.store(false, Ordering::SeqCst);
    }
}

fn acquire(st: &AppState, expected: Option<u64>) -> Result<BusyGuard<'_>, ApiError> {
    if st
        .busy
        .compare_exchange(false, true, Ordering::SeqCst, Ordering::SeqCst)
        .is_err()
    {
        return Err(ApiError::conflict("another solve is in progress"));
    }
    let guard = BusyGuard(&st.busy);
    let current = st.revision();
    if let Some(r) = expected {
        if r != current {
            return Err(ApiError::conflict(format!("stale revision {r}; current is {current}")));
        }
    }
    Ok(guard)
}

fn commit(st: &AppState, record: BoxRecord, trace: SolverTrace) -> Result<Value, ApiError> {
    if let Some(dir) = &st.dir {
        session::store_box(dir, &record, &trace)?;
    }
    let mut cur = st.current.write().expect("state lock");
    cur.box_record = record;
    cur.trace = trace;
    cur.revision += 1;
    Ok(json!({"revision": cur.revision, "status": "ready", "box": to_value(&cur.box_record)}))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TradeoffRequest {
    dv: String,
    lower: f64,
    upper: f64,
    revision: Option<u64>,
    seed: Option<u64>,
}

async fn post_tradeoff(State(st): State<Shared>, body: Bytes) -> ApiResult {
    let req: TradeoffRequest = parse_body(&body)?;
    if !(req.lower.is_finite() && req.upper.is_finite()) {
        return Err(ApiError::bad_request("lower and upper must be finite"));
    }
    if req.lower > req.upper {
        return Err(ApiError::unprocessable(format!(
            "lower {} exceeds upper {}",
            req.lower, req.upper
        )));
    }
    let _guard = acquire(&st, req.revision)?;
    let current = st.current.read().expect("state lock").box_record.clone();
    let seed = req.seed.unwrap_or(current.seed);
    let problem = st.problem.clone();
    let (record, trace) = tokio::task::spawn_blocking(move || {
        session::tradeoff(&problem, &current, &req.dv, (req.lower, req.upper), seed)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(commit(&st, record, trace)?))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveRequest {
    seed: Option<u64>,
    revision: Option<u64>,
}

async fn post_solve(State(st): State<Shared>, body: Bytes) -> ApiResult {
    let req: SolveRequest = if body.iter().all(u8::is_ascii_whitespace) {
        SolveRequest::default()
    } else {
        parse_body(&body)?
    };
    let _guard = acquire(&st, req.revision)?;
    let (baseline, previous) = {
        let cur = st.current.read().expect("state lock");
        (cur.baseline.clone(), cur.box_record.params)
    };
    let params = SolverParams {
        seed: req.seed.unwrap_or(previous.seed),
        ..previous
    };
    let problem = st.problem.clone();
    let (record, trace) = tokio::task::spawn_blocking(move || session::solve(&problem, &baseline, params))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(commit(&st, record, trace)?))
}

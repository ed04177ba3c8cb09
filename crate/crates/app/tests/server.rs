use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use solspace::run::RunDir;
use solspace::{Problem, SolverParams};
use solspace_app::server::{router, AppState};
use solspace_app::session::{self, Session};

const TOY: &str = include_str!("../../core/problems/toy_sum.json");

fn toy_session() -> Session {
    let problem = Problem::from_json(TOY).unwrap();
    let baseline = session::compute_baseline(&problem, 0, 0).unwrap();
    let problem = session::constrained(&problem, &baseline).unwrap();
    let (box_record, trace) = session::solve(&problem, &baseline, SolverParams::with_seed(1)).unwrap();
    Session {
        problem,
        baseline,
        box_record,
        trace,
    }
}

fn app_with(dir: Option<RunDir>) -> (Router, Arc<AppState>) {
    let state = Arc::new(AppState::new(toy_session(), dir));
    (router(state.clone()), state)
}

fn app() -> Router {
    app_with(None).0
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_string())).unwrap_or_else(Body::empty))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn read_endpoints_report_revision_zero() {
    let app = app();
    for uri in ["/api/problem", "/api/baseline", "/api/box", "/api/trace"] {
        let (status, body) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::OK, "{uri}");
        assert_eq!(body["revision"], 0, "{uri}");
    }
    let (_, b) = call(&app, "GET", "/api/box", None).await;
    assert_eq!(b["status"], "ready");
    assert_eq!(b["variables"], json!(["x1", "x2"]));
    assert!(b["box"]["mu"].as_f64().unwrap() > 0.2);
}

#[tokio::test]
async fn index_is_served() {
    let res = app().oneshot(Request::get("/").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(res.status(), StatusCode::OK);
}

#[tokio::test]
async fn section_endpoint_classifies_points() {
    let app = app();
    let (status, body) = call(&app, "GET", "/api/section?i=0&j=1&n=40&span=box", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["section"]["points"].as_array().unwrap().len(), 40);
    assert_eq!(body["section"]["span"], "box");

    for bad in [
        "/api/section?i=0",
        "/api/section?i=0&j=x",
        "/api/section?i=0&j=0",
        "/api/section?i=0&j=5",
        "/api/section?i=0&j=1&span=moon",
        "/api/section?i=0&j=1&n=1000000",
    ] {
        let (status, body) = call(&app, "GET", bad, None).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(body["code"], "bad_request");
        assert!(body["message"].is_string());
    }
}

#[tokio::test]
async fn tradeoff_bumps_revision_and_persists() {
    let tmp = tempfile::tempdir().unwrap();
    let (app, state) = app_with(Some(RunDir::new(tmp.path())));
    let (status, body) = call(
        &app,
        "POST",
        "/api/tradeoff",
        Some(r#"{"dv": "x1", "lower": 0.0, "upper": 0.2, "revision": 0}"#),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["revision"], 1);
    assert!(body["box"]["intervals"][1][1].as_f64().unwrap() >= 0.75);
    assert_eq!(state.revision(), 1);
    assert!(tmp.path().join("box.json").exists());
    assert!(tmp.path().join("manifest.json").exists());

    // Based on a stale revision.
    let (status, body) = call(
        &app,
        "POST",
        "/api/tradeoff",
        Some(r#"{"dv": "x1", "lower": 0.0, "upper": 0.1, "revision": 0}"#),
    )
    .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["code"], "conflict");
}

#[tokio::test]
async fn tradeoff_errors_map_to_status_codes() {
    let app = app();
    let cases = [
        ("not json", StatusCode::BAD_REQUEST),
        (r#"{"dv": "x1", "lower": 0.0}"#, StatusCode::BAD_REQUEST),
        (r#"{"dv": "x9", "lower": 0.0, "upper": 0.1}"#, StatusCode::BAD_REQUEST),
        (r#"{"dv": "x1", "lower": 0.2, "upper": 0.1}"#, StatusCode::UNPROCESSABLE_ENTITY),
        (r#"{"dv": "x1", "lower": 0.9, "upper": 0.95}"#, StatusCode::UNPROCESSABLE_ENTITY),
    ];
    for (body, expected) in cases {
        let (status, resp) = call(&app, "POST", "/api/tradeoff", Some(body)).await;
        assert_eq!(status, expected, "{body}: {resp}");
        assert!(resp["message"].as_str().is_some_and(|m| !m.is_empty()));
    }
    let (_, b) = call(&app, "GET", "/api/box", None).await;
    assert_eq!(b["revision"], 0);
}

#[tokio::test]
async fn solve_endpoint_reseeds() {
    let app = app();
    let (status, body) = call(&app, "POST", "/api/solve", Some(r#"{"seed": 9}"#)).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["revision"], 1);
    assert_eq!(body["box"]["seed"], 9);
    let (status, _) = call(&app, "POST", "/api/solve", None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, "POST", "/api/solve", Some(r#"{"seeds": 1}"#)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, t) = call(&app, "GET", "/api/trace", None).await;
    assert_eq!(t["revision"], 2);
}

#[tokio::test]
async fn concurrent_mutations_are_refused() {
    let app = app();
    let requests = (0..4).map(|s| {
        let app = app.clone();
        async move { call(&app, "POST", "/api/solve", Some(&format!(r#"{{"seed": {s}, "revision": 0}}"#))).await }
    });
    let results = futures_join(requests).await;
    let ok = results.iter().filter(|(s, _)| *s == StatusCode::OK).count();
    assert_eq!(ok, 1, "exactly one revision-0 solve can win");
    assert!(results
        .iter()
        .all(|(s, _)| *s == StatusCode::OK || *s == StatusCode::CONFLICT));
}

async fn futures_join<F, T>(futs: impl Iterator<Item = F>) -> Vec<T>
where
    F: std::future::Future<Output = T> + Send + 'static,
    T: Send + 'static,
{
    let handles: Vec<_> = futs.map(tokio::spawn).collect();
    let mut out = Vec::new();
    for h in handles {
        out.push(h.await.unwrap());
    }
    out
}

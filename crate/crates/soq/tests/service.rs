mod common;

use axum::http::{Method, StatusCode};
use serde_json::{json, Value};
use soq_core::pipeline::{PipelineConfig, SoQState};
use soq_core::synthgen::{generate, GeneratorConfig};

use common::{call, expect};

fn small() -> GeneratorConfig {
    GeneratorConfig {
        n_stages: 3,
        records_per_stage: 60,
        ..GeneratorConfig::default()
    }
}

fn app() -> axum::Router {
    soq::service::router(SoQState::new(PipelineConfig::default()).unwrap())
}

#[tokio::test]
async fn reingesting_a_stage_conflicts() {
    let ds = generate(&small()).unwrap();
    let app = app();
    let body = json!({ "records": ds.stage(1) });
    expect(&app, Method::POST, "/api/v1/stages/1/records", Some(&body), StatusCode::OK, "ingest_response")
        .await
        .unwrap();
    let e = expect(&app, Method::POST, "/api/v1/stages/1/records", Some(&body), StatusCode::CONFLICT, "error")
        .await
        .unwrap();
    assert_eq!(e["code"], "DuplicateId");
}

#[tokio::test]
async fn analyzing_out_of_order_conflicts() {
    let ds = generate(&small()).unwrap();
    let app = app();
    for stage in 1..=2 {
        let body = json!({ "records": ds.stage(stage) });
        let path = format!("/api/v1/stages/{stage}/records");
        call(&app, Method::POST, &path, Some(&body)).await;
    }
    let e = expect(&app, Method::POST, "/api/v1/stages/2/analyze", None, StatusCode::CONFLICT, "error")
        .await
        .unwrap();
    assert_eq!(e["code"], "UnanalyzedPredecessor");
    let e = expect(&app, Method::POST, "/api/v1/stages/5/analyze", None, StatusCode::NOT_FOUND, "error")
        .await
        .unwrap();
    assert_eq!(e["code"], "UnknownStage");
}

#[tokio::test]
async fn malformed_bodies_are_400() {
    let app = app();
    let cases: [(&str, Value); 3] = [
        ("/api/v1/stages/1/records", json!({ "rows": [] })),
        ("/api/v1/labels", json!({ "candidate": 0, "label": "shiny" })),
        ("/api/v1/final/run", json!({ "records": 3 })),
    ];
    for (path, body) in cases {
        let e = expect(&app, Method::POST, path, Some(&body), StatusCode::BAD_REQUEST, "error")
            .await
            .unwrap();
        assert_eq!(e["code"], "Parse", "{path}");
    }
    let e = expect(&app, Method::GET, "/api/v1/graph/one", None, StatusCode::BAD_REQUEST, "error")
        .await
        .unwrap();
    assert_eq!(e["code"], "Parse");
}

#[tokio::test]
async fn final_run_without_a_model_conflicts() {
    let app = app();
    let e = expect(&app, Method::POST, "/api/v1/final/run", None, StatusCode::CONFLICT, "error")
        .await
        .unwrap();
    assert!(e["code"] == "EmptyModel" || e["code"] == "UncalibratedReps", "{e}");
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_ingests_are_serialized() {
    let cfg = GeneratorConfig {
        n_stages: 2,
        ..small()
    };
    let ds = generate(&cfg).unwrap();
    let app = app();
    let body = json!({ "records": ds.stage(1) });
    let tasks: Vec<_> = (0..8)
        .map(|_| {
            let (app, body) = (app.clone(), body.clone());
            tokio::spawn(async move { call(&app, Method::POST, "/api/v1/stages/1/records", Some(&body)).await.0 })
        })
        .collect();
    let mut ok = 0;
    for t in tasks {
        let status = t.await.unwrap();
        assert!(status == StatusCode::OK || status == StatusCode::CONFLICT);
        ok += usize::from(status == StatusCode::OK);
    }
    assert_eq!(ok, 1);
    let m = expect(&app, Method::POST, "/api/v1/stages/1/analyze", None, StatusCode::OK, "metrics")
        .await
        .unwrap();
    assert_eq!(m["n_records"], json!(cfg.records_per_stage));
}

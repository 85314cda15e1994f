//! Golden HTTP fixtures: `tests/fixtures/http/<name>.json`, each holding
//! `{"request": {"method", "path", "body"?, "raw_body"?}, "response": {"status", "body"}}`.
//! Set `UPDATE_GOLDEN=1` to regenerate them from the current implementation.

use std::path::PathBuf;

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use scholarsum::corpus::ingest;
use scholarsum::llm::{LlmClient, LlmConfig};
use scholarsum::ranking::{search, Ordering, SearchRequest};
use scholarsum::service::Service;
use scholarsum::summarizer::{SourceArticle, SummaryRequest};
use scholarsum::SummaryPipeline;

use super::{fixtures_dir, toy_corpus_path, NOW_YEAR};

pub const SCENARIO_1_QUERY: &str = "artificial intelligence agriculture";
pub const SCENARIO_2_QUERY: &str = "citation ranking";
pub const SCENARIO_2_TOPIC: &str = "Artificial intelligence";

pub fn http_dir() -> PathBuf {
    fixtures_dir().join("http")
}

/// Mock-backed service with the toy corpus loaded and a fixed reference year.
pub fn fixture_service() -> Service {
    let service = bare_service();
    service
        .load_corpus(toy_corpus_path())
        .expect("toy corpus loads");
    service
}

/// Mock-backed service without a corpus.
pub fn bare_service() -> Service {
    let pipeline = SummaryPipeline::new(LlmClient::new(LlmConfig::mock()).unwrap());
    Service::from_pipeline(pipeline, Some(NOW_YEAR), None)
}

/// The top `top` toy-corpus articles for a search, as summarize input.
pub fn scenario_request(
    query: &str,
    ordering: Ordering,
    topic: Option<&str>,
    top: usize,
) -> SummaryRequest {
    let snapshot = ingest(toy_corpus_path()).unwrap();
    let request = SearchRequest {
        query: query.into(),
        ordering,
        topics: topic.map(|t| [t.to_string()].into()),
        limit: top,
        ..SearchRequest::default()
    };
    let page = search(&snapshot, &request, NOW_YEAR).unwrap();
    SummaryRequest {
        query: query.into(),
        articles: page
            .results
            .iter()
            .map(|r| {
                let a = snapshot.get(&r.article_id).unwrap();
                SourceArticle::new(a.id.clone(), a.title.clone(), a.abstract_text.clone())
            })
            .collect(),
    }
}

pub async fn send(router: &Router, method: &str, path: &str, body: Option<String>) -> (u16, Value) {
    let mut builder = Request::builder().method(method).uri(path);
    if body.is_some() {
        builder = builder.header("content-type", "application/json");
    }
    let request = builder
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let response = router.clone().oneshot(request).await.unwrap();
    let status = response.status().as_u16();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into_owned()));
    (status, value)
}

fn request_body(request: &Value) -> Option<String> {
    if let Some(raw) = request.get("raw_body") {
        return Some(raw.as_str().expect("raw_body is a string").to_string());
    }
    request.get("body").map(Value::to_string)
}

/// Requests recorded in the fixture set, by name.
pub fn fixture_requests() -> Vec<(&'static str, Value)> {
    let s1 = scenario_request(SCENARIO_1_QUERY, Ordering::Popularity, None, 5);
    let s2 = scenario_request(
        SCENARIO_2_QUERY,
        Ordering::Influence,
        Some(SCENARIO_2_TOPIC),
        10,
    );
    let many: Vec<Value> = (1..=21)
        .map(|i| json!({"id": format!("X{i:02}"), "title": format!("Title {i}"), "abstract": "Text."}))
        .collect();
    vec![
        (
            "summarize_concise_5",
            json!({"method": "POST", "path": "/summarize", "body": s1}),
        ),
        (
            "summarize_lit_review_10",
            json!({"method": "POST", "path": "/summarize", "body": s2}),
        ),
        (
            "summarize_too_many_21",
            json!({"method": "POST", "path": "/summarize", "body": {"query": "x", "articles": many}}),
        ),
        (
            "summarize_empty",
            json!({"method": "POST", "path": "/summarize", "body": {"query": "x", "articles": []}}),
        ),
        (
            "summarize_duplicate_ids",
            json!({"method": "POST", "path": "/summarize", "body": {"query": "x", "articles": [
                {"id": "D1", "title": "One", "abstract": "First."},
                {"id": "D1", "title": "Two", "abstract": "Second."}
            ]}}),
        ),
        (
            "summarize_malformed",
            json!({"method": "POST", "path": "/summarize", "raw_body": "{\"articles\": ["}),
        ),
        (
            "search_scenario_1",
            json!({"method": "GET", "path": "/search?q=artificial+intelligence+agriculture&limit=5"}),
        ),
        (
            "search_scenario_2",
            json!({"method": "GET", "path": "/search?q=citation%20ranking&order=influence&topic=Artificial%20intelligence&limit=10"}),
        ),
        (
            "search_paged_year",
            json!({"method": "GET", "path": "/search?order=year&doc_type=dataset,software&limit=3&offset=1"}),
        ),
        (
            "search_bad_order",
            json!({"method": "GET", "path": "/search?q=x&order=banana"}),
        ),
        ("health", json!({"method": "GET", "path": "/health"})),
    ]
}

/// Drops latency fields, which vary between runs.
pub fn normalize(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("latency_ms");
            map.values_mut().for_each(normalize);
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        _ => {}
    }
}

/// Structural equality; map key order is irrelevant and numbers compare by value.
pub fn json_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            match (x.as_u64(), y.as_u64(), x.as_i64(), y.as_i64()) {
                (Some(p), Some(q), _, _) => p == q,
                (_, _, Some(p), Some(q)) => p == q,
                _ => {
                    let (p, q) = (x.as_f64().unwrap(), y.as_f64().unwrap());
                    p == q || (p - q).abs() <= 1e-12 * p.abs().max(q.abs())
                }
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len()
                && x.iter()
                    .all(|(k, v)| y.get(k).is_some_and(|w| json_eq(v, w)))
        }
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(v, w)| json_eq(v, w))
        }
        _ => a == b,
    }
}

async fn replay(router: &Router, request: &Value) -> (u16, Value) {
    let (status, mut body) = send(
        router,
        request["method"].as_str().unwrap(),
        request["path"].as_str().unwrap(),
        request_body(request),
    )
    .await;
    normalize(&mut body);
    (status, body)
}

/// Rewrites every fixture from the current implementation.
pub async fn write_fixtures() {
    let router = fixture_service().router();
    std::fs::create_dir_all(http_dir()).unwrap();
    for (name, request) in fixture_requests() {
        let (status, body) = replay(&router, &request).await;
        let doc = json!({"request": request, "response": {"status": status, "body": body}});
        let path = http_dir().join(format!("{name}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    }
}

/// Replays every fixture file; returns (name, mismatch description) per file.
pub async fn check_fixtures() -> Vec<(String, Option<String>)> {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        write_fixtures().await;
    }
    let router = fixture_service().router();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(http_dir())
        .expect("fixture directory exists")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let (status, body) = replay(&router, &doc["request"]).await;
        let mut expected = doc["response"]["body"].clone();
        normalize(&mut expected);
        let want_status = doc["response"]["status"].as_u64().unwrap() as u16;
        let problem = if status != want_status {
            Some(format!("status {status}, expected {want_status}"))
        } else if !json_eq(&body, &expected) {
            Some(format!("body differs:\n got: {body}\nwant: {expected}"))
        } else {
            None
        };
        out.push((name, problem));
    }
    out
}

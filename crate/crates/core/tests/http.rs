mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use pagedex::service::{Engine, ServiceConfig};
use pagedex::store::Language;

fn app() -> Router {
    pagedex::http::router(Arc::new(common::fixture_engine()))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Value, axum::http::HeaderMap) {
    let response = app.clone().oneshot(req).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap(), headers)
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, v, _) = send(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, v)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let req = Request::post(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (s, v, _) = send(app, req).await;
    (s, v)
}

#[tokio::test]
async fn languages_list_dictionaries_but_no_index() {
    let app = app();
    let (status, body) = get(&app, "/api/languages").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body[0]["code"], "en");
    let ids: Vec<&str> = body[0]["dictionaries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["farhang", "lughat"]);
    assert_eq!(body[0]["dictionaries"][1]["index_state"], "fully_indexed");
    let text = body.to_string();
    for word in ["kiwi", "mango", "cherry"] {
        assert!(!text.contains(word), "index word {word} leaked");
    }
}

#[tokio::test]
async fn search_errors() {
    let app = app();
    let (status, body) = get(&app, "/api/search?lang=xx&q=kiwi").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "UNKNOWN_LANGUAGE");
    let (status, body) = get(&app, "/api/search?q=kiwi").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "INVALID_PAYLOAD");
}

#[tokio::test]
async fn prefix_expansion() {
    let mut store = common::fixture_store();
    let mut lang = Language::new("xw", "Wordlist");
    lang.prefix_depth = 2;
    let words = ["an", "and", "ant", "bat", "apple"].map(String::from).to_vec();
    store
        .register_language(lang, Some(pagedex::collation::latin_rules()), Some(words))
        .unwrap();
    let app = pagedex::http::router(Arc::new(Engine::new(store, &ServiceConfig::default())));

    let (status, root, headers) = send(
        &app,
        Request::get("/api/languages/xw/prefix").body(Body::empty()).unwrap(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        root["children"],
        json!([{"prefix": "a", "count": 4}, {"prefix": "b", "count": 1}])
    );
    assert!(headers[header::CACHE_CONTROL].to_str().unwrap().contains("max-age"));

    let (status, an) = get(&app, "/api/languages/xw/prefix/an").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(an["words"], json!(["an", "and", "ant"]));

    let (status, body) = get(&app, "/api/languages/xw/prefix/zz").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "UNKNOWN_PREFIX");
    let (_, body) = get(&app, "/api/languages/en/prefix/a").await;
    assert_eq!(body["code"], "UNKNOWN_PREFIX");
}

#[tokio::test]
async fn feedback_reaches_confirmation_on_third_vote() {
    let app = app();
    let vote = |who: &str| json!({"dictionary_id": "farhang", "page": 11, "word": "kiwi", "verdict": "present", "contributor": who});
    let (_, first) = post(&app, "/api/feedback", vote("a")).await;
    assert_eq!(first["tally"]["status"], "open");
    post(&app, "/api/feedback", vote("b")).await;
    let (status, third) = post(&app, "/api/feedback", vote("c")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        third["tally"],
        json!({"present_votes": 3, "absent_votes": 0, "status": "confirmed_present"})
    );
    assert_eq!(third["promotions"], json!([{"word": "kiwi", "page": 11}]));

    let (_, r) = get(&app, "/api/search?lang=en&q=kiwi").await;
    assert_eq!(r["dictionaries"][0]["exists"], "yes");
    assert_eq!(r["dictionaries"][0]["pages"][0]["number"], 11);

    let (status, body) = post(
        &app,
        "/api/feedback",
        json!({"dictionary_id": "farhang", "page": 2, "word": "kiwi", "verdict": "absent", "contributor": "a"}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "IRRELEVANT_PAGE");
}

#[tokio::test]
async fn marker_submission() {
    let app = app();
    let (status, body) = post(
        &app,
        "/api/markers",
        json!({"dictionary_id": "lughat", "page": 14, "word": "kiwi", "x": 40, "y": 50, "contributor": "a"}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["marker"]["x"], 40);
    assert_eq!(body["marker"]["proposal_count"], 1);

    let (status, body) = post(
        &app,
        "/api/markers",
        json!({"dictionary_id": "lughat", "page": 14, "word": "kiwi", "x": 900, "y": 50, "contributor": "a"}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "MARKER_OUT_OF_BOUNDS");

    let (_, r) = get(&app, "/api/search?lang=en&q=kiwi").await;
    assert_eq!(r["dictionaries"][1]["pages"][0]["location"], json!({"x": 40, "y": 50}));
}

#[tokio::test]
async fn annotation_round_trip() {
    let app = app();
    let ann = |word: &str, text: &str| {
        json!({"dictionary_id": "lughat", "page": 12, "word": word, "text": text,
               "meta": {"contributor": "a", "link": "https://example.org/fig"}})
    };
    let (status, body) = post(&app, "/api/annotations", ann("fig", "first")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["id"], 1);
    post(&app, "/api/annotations", ann("fig", "second")).await;
    let (_, r) = get(&app, "/api/search?lang=en&q=fig").await;
    let annotations = &r["dictionaries"][1]["pages"][0]["annotations"];
    assert_eq!(annotations[0]["text"], "first");
    assert_eq!(annotations[1]["text"], "second");
    assert_eq!(annotations[0]["meta"]["link"], "https://example.org/fig");

    let (status, body) = post(&app, "/api/annotations", ann("plum", "x")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "UNKNOWN_TARGET");
}

#[tokio::test]
async fn digitization_and_bad_payloads() {
    let app = app();
    let (status, body) = post(
        &app,
        "/api/digitizations",
        json!({"dictionary_id": "lughat", "word": "fig", "fields": {"definition": "A soft fruit.", "origin_language": "Latin"},
               "meta": {"contributor": "a"}}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["entry"]["boxes"], json!([]));
    let (_, r) = get(&app, "/api/search?lang=en&q=fig").await;
    assert_eq!(r["definitions"][0]["text"], "A soft fruit.");

    let req = Request::post("/api/markers").body(Body::from("{not json")).unwrap();
    let (status, body, _) = send(&app, req).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "INVALID_PAYLOAD");
    let (status, body) = post(
        &app,
        "/api/feedback",
        json!({"dictionary_id": "nope", "page": 1, "word": "a", "verdict": "present", "contributor": "a"}),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["code"], "UNKNOWN_DICTIONARY");
}

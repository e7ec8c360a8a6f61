mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::{fixture_engine, golden_dir, schema, GOLDEN_QUERIES};

async fn search_body(query: &str) -> Vec<u8> {
    let app = pagedex::http::router(Arc::new(fixture_engine()));
    let uri = format!("/api/search?lang=en&q={query}");
    let response = app
        .oneshot(Request::get(uri).body(Body::empty()).unwrap())
        .await
        .unwrap();
    assert_eq!(response.status(), StatusCode::OK);
    response.into_body().collect().await.unwrap().to_bytes().to_vec()
}

#[tokio::test]
async fn responses_match_golden_bytes() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    for (name, query) in GOLDEN_QUERIES {
        let body = search_body(query).await;
        let value: Value = serde_json::from_slice(&body).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");

        let path = golden_dir().join(format!("{name}.json"));
        if std::env::var_os("PAGEDEX_UPDATE_GOLDEN").is_some() {
            std::fs::write(&path, &body).unwrap();
        }
        let golden = std::fs::read(&path).unwrap();
        assert_eq!(
            String::from_utf8_lossy(&body),
            String::from_utf8_lossy(&golden),
            "{name}"
        );
    }
}

fn block<'a>(response: &'a Value, id: &str) -> &'a Value {
    response["dictionaries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["id"] == id)
        .unwrap()
}

fn page_numbers(block: &Value) -> Vec<u64> {
    block["pages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["number"].as_u64().unwrap())
        .collect()
}

#[tokio::test]
async fn fully_indexed_hit() {
    let r: Value = serde_json::from_slice(&search_body("kiwi").await).unwrap();
    let lughat = block(&r, "lughat");
    assert_eq!(lughat["exists"], "yes");
    assert_eq!(page_numbers(lughat), [14, 15]);
    assert_eq!(lughat["pages"][0]["src"], "https://scans.example.org/lughat/14.png");
    assert_eq!(page_numbers(block(&r, "farhang")), [10, 11, 12]);
}

#[tokio::test]
async fn sparse_maybe_with_contributions() {
    let r: Value = serde_json::from_slice(&search_body("date").await).unwrap();
    let farhang = block(&r, "farhang");
    assert_eq!(farhang["exists"], "maybe");
    assert_eq!(page_numbers(farhang), [7, 8, 9]);
    let pages = farhang["pages"].as_array().unwrap();
    assert!(pages[0].get("location").is_none());
    // mean of (100, 290) and (140, 310)
    assert_eq!(pages[1]["location"], json!({"x": 120, "y": 300}));
    assert_eq!(
        pages[1]["boxes"],
        json!([{"top": 300, "bottom": 420, "left": 80, "right": 480}])
    );
    assert_eq!(pages[1]["annotations"][0]["meta"]["source"], "margin note");
    assert_eq!(pages[1]["src"], "https://scans.example.org/farhang/0008.jpg");
    assert_eq!(pages[2]["missing"], true);
    assert!(pages[1].get("missing").is_none());
    assert_eq!(r["definitions"][0]["text"], "The sweet fruit of the date palm.");
    assert_eq!(r["resources"][0]["type"], "image");
    assert_eq!(block(&r, "lughat")["exists"], "yes");
}

#[tokio::test]
async fn absent_from_full_index() {
    let r: Value = serde_json::from_slice(&search_body("zucchini").await).unwrap();
    let lughat = block(&r, "lughat");
    assert_eq!(lughat["exists"], "no");
    assert_eq!(lughat["pages"], json!([]));
    let farhang = block(&r, "farhang");
    assert_eq!(farhang["exists"], "maybe");
    assert_eq!(page_numbers(farhang), [19, 20]);
}

#[test]
fn field_order_follows_wire_format() {
    let golden = std::fs::read_to_string(golden_dir().join("maybe_sparse.json")).unwrap();
    let keys = [
        "\"query\"",
        "\"language\"",
        "\"resources\"",
        "\"definitions\"",
        "\"dictionaries\"",
    ];
    let positions: Vec<usize> = keys.iter().map(|k| golden.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
    let page_keys = [
        "\"number\"",
        "\"src\"",
        "\"width\"",
        "\"height\"",
        "\"location\"",
        "\"boxes\"",
        "\"annotations\"",
    ];
    let start = golden.find("\"number\":8").unwrap();
    let positions: Vec<usize> = page_keys
        .iter()
        .map(|k| start + golden[start..].find(k).unwrap())
        .collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));
}

//! Run the chat service and talk to it over HTTP.
//!
//! cargo run --example server

use serde_json::{json, Value};
use synthdialog::config::Config;
use synthdialog::language::LanguageModel;
use synthdialog::server::{router, AppState};
use tower::ServiceExt;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> anyhow::Result<Value> {
    let req = axum::http::Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(axum::body::Body::from(body.to_string()))?;
    let resp = app.clone().oneshot(req).await?;
    let bytes = axum::body::to_bytes(resp.into_body(), 1 << 20).await?;
    Ok(serde_json::from_slice(&bytes)?)
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let app = router(AppState::new(LanguageModel::builtin()?, &Config::default()));
    let world = include_str!("../assets/worlds/exp2.world");
    let id = call(&app, "POST", "/sessions", json!({ "world": world })).await?["id"].clone();
    let id = id.as_str().unwrap_or_default();
    for text in ["the kibo capsule is connected to the harmony capsule", "go to the columbus capsule", "no", "yes"] {
        let out = call(&app, "POST", &format!("/sessions/{id}/utterances"), json!({ "text": text })).await?;
        println!("human: {text}");
        for m in out["messages"].as_array().into_iter().flatten() {
            println!("robot: {}", m["text"].as_str().unwrap_or_default());
        }
    }
    Ok(())
}

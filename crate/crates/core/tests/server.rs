#![cfg(feature = "server")]

mod common;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use synthdialog::config::Config;
use synthdialog::language::LanguageModel;
use synthdialog::server::{router, AppState};
use synthdialog::synth::Controller;
use tokio_tungstenite::tungstenite::Message;
use tower::ServiceExt;

const EXP1: &str = include_str!("../assets/worlds/exp1.world");
const EXP2: &str = include_str!("../assets/worlds/exp2.world");

fn state() -> AppState {
    AppState::new(LanguageModel::builtin().unwrap(), &Config::default())
}

async fn call(app: &axum::Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = axum::body::to_bytes(resp.into_body(), 1 << 22).await.unwrap();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

async fn session(app: &axum::Router, world: &str) -> String {
    let (status, v) = call(app, "POST", "/sessions", &json!({ "world": world }).to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    v["id"].as_str().unwrap().to_string()
}

async fn say(app: &axum::Router, id: &str, text: &str) -> Vec<String> {
    let (status, v) = call(app, "POST", &format!("/sessions/{id}/utterances"), &json!({ "text": text }).to_string()).await;
    assert_eq!(status, StatusCode::OK, "{v}");
    v["messages"].as_array().unwrap().iter().map(|m| m["text"].as_str().unwrap().to_string()).collect()
}

#[tokio::test]
async fn second_table_over_http() {
    let app = router(state());
    let id = session(&app, EXP2).await;
    say(&app, &id, "the kibo capsule is connected to the harmony capsule").await;
    assert_eq!(say(&app, &id, "go to the columbus capsule").await, ["is the kibo capsule connected to the columbus capsule?"]);
    assert_eq!(say(&app, &id, "no").await, ["is the harmony capsule connected to the columbus capsule?"]);
    assert_eq!(
        say(&app, &id, "yes").await,
        ["navigating to the columbus capsule", "arrived at the columbus capsule"]
    );
    let (_, world) = call(&app, "GET", &format!("/sessions/{id}/world"), "").await;
    assert_eq!(world["robot_at"], "columbus");
    let (_, t) = call(&app, "GET", &format!("/sessions/{id}/transcript"), "").await;
    assert_eq!(t.as_array().unwrap().len(), 9);
}

#[tokio::test]
async fn controller_after_first_table_matches_the_fixture() {
    let app = router(state());
    let id = session(&app, EXP1).await;
    let (_, none) = call(&app, "GET", &format!("/sessions/{id}/controller"), "").await;
    assert!(none.is_null());
    for u in [
        "the kibo capsule is connected to the harmony capsule",
        "the harmony capsule is connected to the columbus capsule",
        "go to the kibo capsule",
    ] {
        say(&app, &id, u).await;
    }
    let (status, v) = call(&app, "GET", &format!("/sessions/{id}/controller"), "").await;
    assert_eq!(status, StatusCode::OK);
    let c: Controller = serde_json::from_value(v).unwrap();
    assert!(common::isomorphic(&c.state_graph(), &common::chain_fixture()));
}

#[tokio::test]
async fn error_statuses() {
    let st = state();
    let app = router(st.clone());
    let (s, _) = call(&app, "POST", "/sessions/nope/utterances", r#"{"text":"yes"}"#).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "GET", "/sessions/nope/world", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let id = session(&app, EXP2).await;
    for bad in ["", "not json", r#"{"txt":"yes"}"#, r#"{"text":7}"#, r#"{"text":"   "}"#] {
        let (s, _) = call(&app, "POST", &format!("/sessions/{id}/utterances"), bad).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{bad}");
    }
    let (s, _) = call(&app, "POST", "/sessions", r#"{"world":"region Kibo"}"#).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);

    let guard = st.lock(&id).await.unwrap();
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/utterances"), r#"{"text":"yes"}"#).await;
    assert_eq!(s, StatusCode::CONFLICT);
    drop(guard);
    let (s, _) = call(&app, "POST", &format!("/sessions/{id}/utterances"), r#"{"text":"yes"}"#).await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn sessions_are_independent() {
    let app = router(state());
    let a = session(&app, EXP2).await;
    let b = session(&app, EXP2).await;
    assert_ne!(a, b);
    say(&app, &a, "the kibo capsule is connected to the columbus capsule").await;
    let (_, wb) = call(&app, "GET", &format!("/sessions/{b}/world"), "").await;
    assert_eq!(wb["connectivity"].as_array().map_or(0, |c| c.len()), 0);
}

#[tokio::test]
async fn event_stream_is_ordered() {
    let st = state();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, router(st)).await.unwrap() });

    let client = post_raw(addr, "/sessions", &json!({ "world": EXP2 }).to_string()).await;
    let id = client["id"].as_str().unwrap().to_string();
    post_raw(addr, &format!("/sessions/{id}/utterances"), r#"{"text":"the kibo capsule is connected to the harmony capsule"}"#).await;

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/sessions/{id}/events")).await.unwrap();
    for text in ["go to the columbus capsule", "no", "yes"] {
        ws.send(Message::text(json!({ "text": text }).to_string())).await.unwrap();
    }
    let mut seqs = Vec::new();
    let mut robot = Vec::new();
    while robot.last().map(String::as_str) != Some("arrived at the columbus capsule") {
        let msg = tokio::time::timeout(std::time::Duration::from_secs(10), ws.next()).await.unwrap().unwrap().unwrap();
        let Message::Text(t) = msg else { continue };
        let e: Value = serde_json::from_str(&t).unwrap();
        assert_ne!(e["type"], "error", "{e}");
        seqs.push(e["seq"].as_u64().unwrap());
        if e["type"] == "robot" {
            robot.push(e["payload"]["text"].as_str().unwrap().to_string());
        }
    }
    assert_eq!(seqs[0], 1, "backlog comes first");
    assert!(seqs.windows(2).all(|w| w[1] == w[0] + 1), "{seqs:?}");
    assert_eq!(
        robot,
        [
            "declarative knowledge received and processed",
            "is the kibo capsule connected to the columbus capsule?",
            "is the harmony capsule connected to the columbus capsule?",
            "navigating to the columbus capsule",
            "arrived at the columbus capsule",
        ]
    );
}

/// Minimal HTTP/1.1 POST over a raw socket, to stay off extra client crates.
async fn post_raw(addr: std::net::SocketAddr, path: &str, body: &str) -> Value {
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    let mut s = tokio::net::TcpStream::connect(addr).await.unwrap();
    let req = format!(
        "POST {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    s.write_all(req.as_bytes()).await.unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).await.unwrap();
    let (_, body) = out.split_once("\r\n\r\n").unwrap();
    serde_json::from_str(body).unwrap_or(Value::Null)
}

#[tokio::test]
async fn turns_are_persisted() {
    let dir = tempfile::tempdir().unwrap();
    let config = Config {
        persist_dir: Some(dir.path().to_path_buf()),
        ..Config::default()
    };
    let lm = LanguageModel::builtin().unwrap();
    let app = router(AppState::new(lm.clone(), &config));
    let id = session(&app, EXP2).await;
    say(&app, &id, "the kibo capsule is connected to the harmony capsule").await;
    say(&app, &id, "go to the harmony capsule").await;
    let restored = synthdialog::persist::load(&dir.path().join(format!("{id}.jsonl")), std::sync::Arc::new(lm)).unwrap();
    assert_eq!(restored.session().transcript().len(), 5);
    assert_eq!(restored.session().world().robot_at().unwrap(), "harmony");
}

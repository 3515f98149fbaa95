//! HTTP + WebSocket chat service.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | body `{"world": "<world file text>"}`, returns `{"id"}` |
//! | POST | `/sessions/{id}/utterances` | body `{"text"}`, returns `{"messages"}` |
//! | GET | `/sessions/{id}/world` | current world |
//! | GET | `/sessions/{id}/controller` | last synthesized controller or `null` |
//! | GET | `/sessions/{id}/transcript` | turns |
//! | GET | `/sessions/{id}/events` | WebSocket: `{type, payload, seq}` events; send `{"text"}` to talk |
//!
//! Unknown sessions give 404, malformed bodies 422, and an utterance posted
//! while the previous one is still being handled 409.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::broadcast;

use crate::agent::{Agent, AgentOptions, Event};
use crate::config::{Config, ConfigError};
use crate::language::LanguageModel;
use crate::persist;
use crate::world::WorldModel;

struct Slot {
    agent: Arc<tokio::sync::Mutex<Agent>>,
    events: broadcast::Sender<Event>,
}

#[derive(Clone)]
pub struct AppState {
    lm: Arc<LanguageModel>,
    options: AgentOptions,
    persist_dir: Option<PathBuf>,
    sessions: Arc<Mutex<HashMap<String, Arc<Slot>>>>,
    next_id: Arc<AtomicU64>,
}

impl AppState {
    pub fn new(lm: LanguageModel, config: &Config) -> Self {
        Self {
            lm: Arc::new(lm),
            options: config.agent,
            persist_dir: config.persist_dir.clone(),
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
        }
    }

    /// Exclusive access to a session's agent. Utterances posted while the
    /// guard is held are answered with 409.
    pub async fn lock(&self, id: &str) -> Option<tokio::sync::OwnedMutexGuard<Agent>> {
        let slot = self.slot(id).ok()?;
        Some(slot.agent.clone().lock_owned().await)
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.sessions
            .lock()
            .expect("session table lock")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, format!("unknown session `{id}`")))
    }
}

pub struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1 }))).into_response()
    }
}

fn unprocessable(msg: impl ToString) -> ApiError {
    ApiError(StatusCode::UNPROCESSABLE_ENTITY, msg.to_string())
}

fn body<T: for<'de> Deserialize<'de>>(bytes: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(bytes).map_err(unprocessable)
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/utterances", post(post_utterance))
        .route("/sessions/{id}/world", get(get_world))
        .route("/sessions/{id}/controller", get(get_controller))
        .route("/sessions/{id}/transcript", get(get_transcript))
        .route("/sessions/{id}/events", get(events))
        .with_state(state)
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Binds `config.listen` and serves until the process ends.
pub async fn serve(config: Config) -> Result<(), ServeError> {
    let lm = config.language_model()?;
    if let Some(dir) = &config.persist_dir {
        std::fs::create_dir_all(dir)?;
    }
    let listener = tokio::net::TcpListener::bind(&config.listen).await?;
    axum::serve(listener, router(AppState::new(lm, &config))).await?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateSession {
    world: String,
}

async fn create_session(State(st): State<AppState>, bytes: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = body(&bytes)?;
    let world = WorldModel::parse(&req.world).map_err(unprocessable)?;
    let id = format!("s{}", st.next_id.fetch_add(1, Ordering::SeqCst));
    let agent = Agent::new(&id, world, st.lm.clone(), st.options).map_err(unprocessable)?;
    let (tx, _) = broadcast::channel(1024);
    st.sessions.lock().expect("session table lock").insert(
        id.clone(),
        Arc::new(Slot {
            agent: Arc::new(tokio::sync::Mutex::new(agent)),
            events: tx,
        }),
    );
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))).into_response())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Utterance {
    text: String,
}

/// Handles one utterance with the session locked; a concurrent caller gets 409.
async fn handle(st: &AppState, id: &str, text: String) -> Result<Value, ApiError> {
    if text.trim().is_empty() {
        return Err(unprocessable("utterance text is empty"));
    }
    let slot = st.slot(id)?;
    let mut guard = slot
        .agent
        .clone()
        .try_lock_owned()
        .map_err(|_| ApiError(StatusCode::CONFLICT, "previous utterance still being processed".into()))?;
    let persist_path = st.persist_dir.as_ref().map(|d| d.join(format!("{id}.jsonl")));
    let (result, guard) = tokio::task::spawn_blocking(move || {
        let seen = guard.events().len();
        let r = guard.handle(&text).map(|msgs| (msgs, guard.events()[seen..].to_vec()));
        if let (Ok(_), Some(p)) = (&r, persist_path) {
            let _ = persist::save(&guard, &p);
        }
        (r, guard)
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let (msgs, new_events) = result.map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    for e in new_events {
        let _ = slot.events.send(e);
    }
    drop(guard);
    Ok(json!({ "messages": msgs }))
}

async fn post_utterance(State(st): State<AppState>, Path(id): Path<String>, bytes: Bytes) -> Result<Json<Value>, ApiError> {
    st.slot(&id)?;
    let req: Utterance = body(&bytes)?;
    Ok(Json(handle(&st, &id, req.text).await?))
}

async fn get_world(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let slot = st.slot(&id)?;
    let agent = slot.agent.lock().await;
    Ok(Json(json!(agent.session().world())))
}

async fn get_controller(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let slot = st.slot(&id)?;
    let agent = slot.agent.lock().await;
    Ok(Json(json!(agent.last_controller())))
}

async fn get_transcript(State(st): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let slot = st.slot(&id)?;
    let agent = slot.agent.lock().await;
    Ok(Json(json!(agent.session().transcript())))
}

async fn events(State(st): State<AppState>, Path(id): Path<String>, ws: WebSocketUpgrade) -> Result<Response, ApiError> {
    let slot = st.slot(&id)?;
    Ok(ws.on_upgrade(move |socket| stream(socket, st, id, slot)))
}

async fn stream(socket: WebSocket, st: AppState, id: String, slot: Arc<Slot>) {
    let (mut tx, mut rx) = socket.split();
    // subscribe before reading the backlog so nothing falls in between
    let mut live = slot.events.subscribe();
    let backlog = slot.agent.lock().await.events().to_vec();
    let mut last_seq = 0;
    for e in backlog {
        last_seq = e.seq;
        if tx.send(Message::Text(json!(e).to_string().into())).await.is_err() {
            return;
        }
    }
    loop {
        tokio::select! {
            ev = live.recv() => match ev {
                Ok(e) if e.seq > last_seq => {
                    last_seq = e.seq;
                    if tx.send(Message::Text(json!(e).to_string().into())).await.is_err() {
                        return;
                    }
                }
                Ok(_) => {}
                Err(broadcast::error::RecvError::Lagged(_)) => {}
                Err(broadcast::error::RecvError::Closed) => return,
            },
            msg = rx.next() => match msg {
                Some(Ok(Message::Text(t))) => {
                    let reply = match serde_json::from_str::<Utterance>(&t) {
                        Ok(u) => handle(&st, &id, u.text).await.err(),
                        Err(e) => Some(unprocessable(e)),
                    };
                    if let Some(ApiError(code, msg)) = reply {
                        let err = json!({ "type": "error", "payload": { "status": code.as_u16(), "error": msg } });
                        if tx.send(Message::Text(err.to_string().into())).await.is_err() {
                            return;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

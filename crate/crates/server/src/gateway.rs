//! HTTP side for the operator console: the protocol over WebSocket, the
//! latest snapshot, and static assets.

use std::path::PathBuf;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use launcher_client::{Snapshot, SnapshotFrame, MAX_FRAME_BYTES};
use tokio::sync::broadcast::error::RecvError;
use tower_http::services::ServeDir;

use crate::controller::ControllerHandle;
use crate::session::handle_frame;

const PLACEHOLDER_INDEX: &str = include_str!("../assets/index.html");

#[derive(Clone)]
struct Gateway {
    ctrl: ControllerHandle,
    budget: Duration,
    snapshot_period: Duration,
}

pub(crate) fn router(
    ctrl: ControllerHandle,
    budget: Duration,
    snapshot_period: Duration,
    static_dir: Option<PathBuf>,
) -> Router {
    let app = Router::new()
        .route("/ws", get(ws_upgrade))
        .route("/state", get(state));
    let app = match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(|| async { Html(PLACEHOLDER_INDEX) })),
    };
    app.with_state(Gateway {
        ctrl,
        budget,
        snapshot_period,
    })
}

async fn state(State(gw): State<Gateway>) -> Json<Snapshot> {
    Json(gw.ctrl.snapshot())
}

async fn ws_upgrade(ws: WebSocketUpgrade, State(gw): State<Gateway>) -> Response {
    ws.max_message_size(MAX_FRAME_BYTES)
        .on_upgrade(move |socket| ws_session(socket, gw))
        .into_response()
}

fn text<T: serde::Serialize>(v: &T) -> Message {
    Message::Text(serde_json::to_string(v).expect("protocol types serialize"))
}

async fn ws_session(socket: WebSocket, gw: Gateway) {
    let (mut tx, mut rx) = socket.split();
    let mut notes = gw.ctrl.subscribe();
    let mut stopped = gw.ctrl.stopped();
    let mut snapshots = tokio::time::interval(gw.snapshot_period);
    snapshots.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
    loop {
        if *stopped.borrow() {
            let _ = tx.send(Message::Close(None)).await;
            return;
        }
        let out = tokio::select! {
            msg = rx.next() => {
                let frame = match msg {
                    Some(Ok(Message::Text(t))) => t.into_bytes(),
                    Some(Ok(Message::Binary(b))) => b,
                    Some(Ok(Message::Ping(_) | Message::Pong(_))) => continue,
                    Some(Ok(Message::Close(_))) | Some(Err(_)) | None => return,
                };
                let h = handle_frame(&gw.ctrl, frame.trim_ascii(), gw.budget).await;
                if tx.send(text(&h.response)).await.is_err() || h.close {
                    let _ = tx.send(Message::Close(None)).await;
                    return;
                }
                continue;
            }
            note = notes.recv() => match note {
                Ok(n) => text(&n),
                Err(RecvError::Lagged(_)) | Err(RecvError::Closed) => continue,
            },
            _ = snapshots.tick() => text(&SnapshotFrame { snapshot: gw.ctrl.snapshot() }),
            _ = stopped.changed() => continue,
        };
        if tx.send(out).await.is_err() {
            return;
        }
    }
}

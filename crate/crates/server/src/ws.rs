//! `/api/sessions/{id}/events`: replay from a cursor, then live events.

use archiguesser_core::api::PublicEvent;
use axum::extract::ws::{close_code, CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, Query, State};
use axum::response::Response;
use serde::Deserialize;
use tokio::sync::broadcast::error::RecvError;

use crate::AppState;

#[derive(Debug, Deserialize)]
pub struct CursorQuery {
    /// First sequence number the client has not seen yet.
    #[serde(default)]
    pub cursor: u64,
}

pub async fn events(
    ws: WebSocketUpgrade,
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<CursorQuery>,
) -> Response {
    ws.on_upgrade(move |socket| stream(socket, state, id, query.cursor))
}

async fn send(socket: &mut WebSocket, event: &PublicEvent) -> bool {
    let text = serde_json::to_string(event).expect("events serialize");
    socket.send(Message::Text(text.into())).await.is_ok()
}

/// Sends stored events from `next` on; returns the new cursor, or `None`
/// once the client is gone.
async fn catch_up(socket: &mut WebSocket, state: &AppState, id: &str, mut next: u64) -> Option<u64> {
    let backlog = state.engine.events_since(id, next).ok()?;
    for event in backlog {
        if !send(socket, &event).await {
            return None;
        }
        next = event.seq + 1;
    }
    Some(next)
}

async fn stream(mut socket: WebSocket, state: AppState, id: String, cursor: u64) {
    // Subscribe before reading the backlog so nothing falls in between.
    let mut live = state.events.subscribe();
    if state.engine.session(&id).is_err() {
        let frame = CloseFrame {
            code: close_code::POLICY,
            reason: format!("unknown session {id}").into(),
        };
        let _ = socket.send(Message::Close(Some(frame))).await;
        return;
    }
    let Some(mut next) = catch_up(&mut socket, &state, &id, cursor).await else {
        return;
    };
    loop {
        tokio::select! {
            received = live.recv() => match received {
                Ok(event) if event.session_id != id || event.seq < next => {}
                Ok(event) if event.seq == next => {
                    if !send(&mut socket, &event).await {
                        return;
                    }
                    next += 1;
                }
                Ok(_) | Err(RecvError::Lagged(_)) => {
                    match catch_up(&mut socket, &state, &id, next).await {
                        Some(n) => next = n,
                        None => return,
                    }
                }
                Err(RecvError::Closed) => break,
            },
            incoming = socket.recv() => match incoming {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => return,
                Some(Ok(_)) => {}
            },
        }
    }
    let _ = socket.send(Message::Close(None)).await;
}

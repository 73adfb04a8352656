//! The `/editor` websocket: one JSON request per text frame, one JSON
//! response per request, with supersession by key.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::ws::{close_code, CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use tokio::sync::mpsc;

use crate::envelope::{ConvertRequest, ConvertResponse, ResponseStatus};
use crate::server::AppState;

pub async fn editor(ws: WebSocketUpgrade, State(state): State<Arc<AppState>>) -> Response {
    let limit = state.config.max_body;
    ws.max_message_size(limit).on_upgrade(move |socket| session(socket, state))
}

/// Latest request sequence number and its cancel flag, per supersede key.
type Latest = Arc<Mutex<HashMap<String, (u64, Arc<AtomicBool>)>>>;

async fn session(socket: WebSocket, state: Arc<AppState>) {
    let (mut sink, mut stream) = socket.split();
    let (out_tx, mut out_rx) = mpsc::unbounded_channel::<Message>();
    let writer = tokio::spawn(async move {
        while let Some(msg) = out_rx.recv().await {
            let closing = matches!(msg, Message::Close(_));
            if sink.send(msg).await.is_err() || closing {
                break;
            }
        }
    });
    let latest: Latest = Arc::default();
    let mut seq = 0u64;
    while let Some(Ok(msg)) = stream.next().await {
        match msg {
            Message::Text(text) => {
                seq += 1;
                let req = match serde_json::from_str::<ConvertRequest>(text.as_str()) {
                    Ok(r) => r,
                    Err(e) => {
                        let id = serde_json::from_str::<Value>(text.as_str()).ok().and_then(|v| v.get("id").cloned()).unwrap_or(Value::Null);
                        send(&out_tx, &ConvertResponse::error(id, "malformed-request", format!("malformed JSON request: {e}")));
                        continue;
                    }
                };
                let cancel = Arc::new(AtomicBool::new(false));
                if let Some(key) = &req.supersede_key {
                    let mut map = latest.lock().unwrap_or_else(|e| e.into_inner());
                    if let Some((_, older)) = map.insert(key.clone(), (seq, cancel.clone())) {
                        older.store(true, Ordering::SeqCst);
                    }
                }
                tokio::spawn(answer(state.clone(), latest.clone(), seq, req, cancel, out_tx.clone()));
            }
            Message::Binary(_) => {
                let frame = CloseFrame { code: close_code::UNSUPPORTED, reason: "binary frames are not supported".into() };
                let _ = out_tx.send(Message::Close(Some(frame)));
                break;
            }
            Message::Close(_) => break,
            Message::Ping(_) | Message::Pong(_) => {}
        }
    }
    drop(out_tx);
    let _ = writer.await;
}

async fn answer(state: Arc<AppState>, latest: Latest, seq: u64, req: ConvertRequest, cancel: Arc<AtomicBool>, out: mpsc::UnboundedSender<Message>) {
    let key = req.supersede_key.clone();
    let drop_superseded = req.drop_superseded;
    let id = req.id.clone();
    let (_, mut resp) = state.handle(req, cancel).await;
    if let Some(key) = &key {
        let mut map = latest.lock().unwrap_or_else(|e| e.into_inner());
        match map.get(key) {
            Some((current, _)) if *current == seq => {
                map.remove(key);
            }
            _ => resp = ConvertResponse::superseded(id),
        }
    }
    if resp.status == ResponseStatus::Superseded && drop_superseded {
        return;
    }
    send(&out, &resp);
}

fn send(out: &mpsc::UnboundedSender<Message>, resp: &ConvertResponse) {
    let text = serde_json::to_string(resp).expect("response serializes");
    let _ = out.send(Message::Text(text.into()));
}

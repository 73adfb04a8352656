//! Talk to the live server's editor socket: newer requests supersede older
//! ones that share a key.

use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use texmath_service::config::ServiceConfig;
use texmath_service::server::{live_router, spawn_local, AppState};
use tokio_tungstenite::tungstenite::Message;

#[tokio::main]
async fn main() {
    let state = AppState::new(ServiceConfig { workers: 1, ..ServiceConfig::default() }).expect("state");
    let addr = spawn_local(live_router(state)).await.expect("bind");
    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/editor")).await.expect("connect");

    let keystrokes = ["x", "x^", "x^2", "x^2+", "x^2+y^2"];
    for (i, src) in keystrokes.iter().enumerate() {
        let req = json!({ "id": i, "source": src, "supersede-key": "buffer" });
        ws.send(Message::text(req.to_string())).await.expect("send");
    }
    let mut answered = 0;
    while answered < keystrokes.len() {
        let Some(Ok(Message::Text(text))) = ws.next().await else { break };
        let r: Value = serde_json::from_str(&text).expect("json");
        println!("{} {}", r["id"], r["status"]);
        answered += 1;
    }
    ws.close(None).await.ok();
}

#![allow(dead_code)]

use std::net::SocketAddr;
use std::sync::Arc;

use texmath_service::config::ServiceConfig;
use texmath_service::server::{batch_router, live_router, spawn_local, AppState};

pub fn small_config() -> ServiceConfig {
    ServiceConfig { workers: 2, recycle_after: 50, ..ServiceConfig::default() }
}

pub async fn start_batch(config: ServiceConfig) -> (SocketAddr, Arc<AppState>) {
    let state = AppState::new(config).expect("state");
    let addr = spawn_local(batch_router(state.clone())).await.expect("bind");
    (addr, state)
}

pub async fn start_live(config: ServiceConfig) -> (SocketAddr, Arc<AppState>) {
    let state = AppState::new(config).expect("state");
    let addr = spawn_local(live_router(state.clone())).await.expect("bind");
    (addr, state)
}

/// A batch server on its own runtime thread, for blocking callers.
pub fn start_batch_blocking(config: ServiceConfig) -> SocketAddr {
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().expect("runtime");
        rt.block_on(async move {
            let (addr, _state) = start_batch(config).await;
            tx.send(addr).expect("send addr");
            std::future::pending::<()>().await;
        });
    });
    rx.recv().expect("server address")
}

pub fn corpus(n: usize) -> Vec<String> {
    include_str!("../../../../fixtures/corpus.txt").lines().filter(|l| !l.is_empty() && !l.starts_with('#')).take(n).map(str::to_string).collect()
}

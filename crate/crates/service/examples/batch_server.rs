//! Run the batch server on an ephemeral port and convert through the client.

use texmath_service::client::RemoteClient;
use texmath_service::config::ServiceConfig;
use texmath_service::envelope::ConvertRequest;
use texmath_service::server::{batch_router, spawn_local, AppState};

fn main() {
    let rt = tokio::runtime::Runtime::new().expect("runtime");
    let state = AppState::new(ServiceConfig { workers: 2, ..ServiceConfig::default() }).expect("state");
    let addr = rt.block_on(spawn_local(batch_router(state))).expect("bind");
    println!("listening on {addr}");

    let client = RemoteClient::new(&format!("http://{addr}")).expect("client");
    println!("health: {}", client.health().expect("health"));
    for (id, tex) in [(1, r"\sqrt{a^2+b^2}"), (2, r"a^")] {
        let r = client.convert(&ConvertRequest::source(id, tex)).expect("convert");
        println!("{id}: {:?}, {} bytes, {} log entries", r.status, r.result.len(), r.log.len());
    }
    let mut bad = ConvertRequest::source(3, "x");
    bad.profile = Some("nope".into());
    match client.convert(&bad) {
        Err(e) => println!("3: {e}"),
        Ok(r) => println!("3: unexpected {:?}", r.status),
    }
}

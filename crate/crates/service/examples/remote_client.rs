//! Query a running server: `cargo run --example remote_client -- http://127.0.0.1:8751 'x^2'`.

use texmath_service::client::RemoteClient;
use texmath_service::envelope::ConvertRequest;

fn main() {
    let mut args = std::env::args().skip(1);
    let base = args.next().unwrap_or_else(|| "http://127.0.0.1:8750".to_string());
    let tex = args.next().unwrap_or_else(|| r"e^{i\pi}+1=0".to_string());
    let client = RemoteClient::new(&base).expect("client");
    match client.examples() {
        Ok(examples) => println!("{} examples, first: {:?}", examples.len(), examples.first().map(|e| &e.name)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(69);
        }
    }
    match client.convert(&ConvertRequest::source("cli", tex)) {
        Ok(r) => println!("{:?}\n{}", r.status, r.result),
        Err(e) => eprintln!("{e}"),
    }
}
